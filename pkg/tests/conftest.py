"""Shared random-instance generators for the test suite."""
from __future__ import annotations

import numpy as np
import pytest

from meanrisk import FiniteSpace, Market, RandVar, check_classical_arbitrage


def random_space(rng, n: int) -> FiniteSpace:
    w = rng.uniform(0.2, 1.0, n)
    return FiniteSpace(w / w.sum())


def random_randvar(rng, n: int, scale: float = 1.0) -> RandVar:
    return RandVar(random_space(rng, n), rng.normal(0.0, scale, n))


def random_market(rng, n: int | None = None, d: int | None = None,
                  arbitrage_free: bool | None = None,
                  r: float = 0.0) -> Market:
    """A valid random market; optionally filtered on classical arbitrage."""
    for _ in range(500):
        n_ = int(n if n is not None else rng.integers(2, 7))
        d_ = int(d if d is not None else rng.integers(1, min(4, n_)))
        if d_ + 1 > n_:
            continue
        w = rng.uniform(0.2, 1.0, n_)
        excess = rng.normal(0.03, 0.4, (n_, d_))
        try:
            m = Market.from_excess(w / w.sum(), r, excess)
        except ValueError:
            continue
        if arbitrage_free is None:
            return m
        has_arb = check_classical_arbitrage(m) is not None
        if has_arb == arbitrage_free:
            continue
        return m
    raise RuntimeError("could not draw a market with the requested features")


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
