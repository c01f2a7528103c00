"""Text formats: market files, measure grammar, CSV/plot emission.

Market files are UTF-8 and line oriented (``key = values``), with ``#``
starting a comment:

    space.probs = 0.25 0.25 0.5
    market.r = 0.01
    asset.1.excess = 0.3 -0.2 0.1      # excess returns per atom
    asset.2.price = 1.0
    asset.2.payoffs = 1.2 0.9 1.05

Each asset uses exactly one of the two forms.  Floats are emitted with 17
significant digits so a parse/emit round trip is exact in decimal text.
"""
from __future__ import annotations

import re

import numpy as np

from .losses import (LossFunction, TargetProfile, lses_profile, step_profile,
                     table_profile, zero_profile)
from .market import Market
from .measures import RiskSpec


def _fmt(x: float) -> str:
    return f"{x:.17g}"


# ---------------------------------------------------------------------------
# Market files
# ---------------------------------------------------------------------------

def parse_market(text: str) -> Market:
    probs = None
    r = None
    excess: dict[int, np.ndarray] = {}
    prices: dict[int, float] = {}
    payoffs: dict[int, np.ndarray] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"malformed market line: {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        vec = np.array([float(tok) for tok in val.split()])
        if key == "space.probs":
            probs = vec
        elif key == "market.r":
            if vec.size != 1:
                raise ValueError("market.r takes a single value")
            r = float(vec[0])
        else:
            mobj = re.fullmatch(r"asset\.(\d+)\.(excess|price|payoffs)", key)
            if not mobj:
                raise ValueError(f"unknown market key {key!r}")
            idx = int(mobj.group(1))
            field = mobj.group(2)
            if field == "excess":
                excess[idx] = vec
            elif field == "price":
                if vec.size != 1:
                    raise ValueError("asset price takes a single value")
                prices[idx] = float(vec[0])
            else:
                payoffs[idx] = vec
    if probs is None or r is None:
        raise ValueError("market file needs space.probs and market.r")
    indices = sorted(set(excess) | set(prices) | set(payoffs))
    if indices != list(range(1, len(indices) + 1)):
        raise ValueError("assets must be numbered 1..d without gaps")
    n = probs.size
    cols = []
    all_priced = True
    for i in indices:
        has_excess = i in excess
        has_priced = i in prices or i in payoffs
        if has_excess and has_priced:
            raise ValueError(f"asset {i}: give either excess or price+payoffs")
        if has_excess:
            col = excess[i]
            all_priced = False
        else:
            if i not in prices or i not in payoffs:
                raise ValueError(f"asset {i}: price and payoffs must both be given")
            col = payoffs[i] / prices[i] - 1.0 - r
        if col.size != n:
            raise ValueError(f"asset {i}: expected {n} atom values")
        cols.append(col)
    if not cols:
        raise ValueError("market file defines no assets")
    if all_priced:
        return Market.from_prices(probs, r,
                                  np.array([prices[i] for i in indices]),
                                  np.column_stack([payoffs[i] for i in indices]))
    return Market.from_excess(probs, r, np.column_stack(cols))


def emit_market(m: Market) -> str:
    lines = [
        "space.probs = " + " ".join(_fmt(p) for p in m.space.probs),
        "market.r = " + _fmt(m.r),
    ]
    if m.prices is not None:
        for k in range(m.d):
            lines.append(f"asset.{k + 1}.price = " + _fmt(m.prices[k]))
            lines.append(f"asset.{k + 1}.payoffs = "
                         + " ".join(_fmt(v) for v in m.payoffs[:, k]))
    else:
        for k in range(m.d):
            lines.append(f"asset.{k + 1}.excess = "
                         + " ".join(_fmt(v) for v in m.excess[:, k]))
    return "\n".join(lines) + "\n"


def load_market(path: str) -> Market:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_market(fh.read())


# ---------------------------------------------------------------------------
# Measure grammar
# ---------------------------------------------------------------------------

def parse_loss(text: str) -> LossFunction:
    text = text.strip()
    if text == "exp":
        return LossFunction.exp()
    if text == "identity":
        return LossFunction.identity()
    mobj = re.fullmatch(r"power\(([^,]+),([^)]+)\)", text)
    if mobj:
        return LossFunction.power(float(mobj.group(1)), float(mobj.group(2)))
    mobj = re.fullmatch(r"pwl\(([^)]*)\)", text)
    if mobj:
        vals = [float(tok) for tok in mobj.group(1).split(",") if tok.strip()]
        if len(vals) % 2 == 0:
            raise ValueError("pwl needs an odd count: s0, x1, s1, x2, s2, ...")
        slopes = vals[0::2]
        breaks = vals[1::2]
        return LossFunction.pwl(slopes, breaks)
    raise ValueError(f"cannot parse loss {text!r}")


def parse_profile(text: str) -> TargetProfile:
    text = text.strip()
    if text == "zero":
        return zero_profile()
    mobj = re.fullmatch(r"([0-9.eE+-]+)\*\(1/x-1\)", text)
    if mobj:
        return lses_profile(float(mobj.group(1)))
    mobj = re.fullmatch(r"step\(([^)]+)\)", text)
    if mobj:
        return step_profile(float(mobj.group(1)))
    mobj = re.fullmatch(r"table\(([^)]*)\)", text)
    if mobj:
        nodes = []
        for pair in mobj.group(1).split(";"):
            x, g = pair.split(",")
            nodes.append((float(x), float(g)))
        return table_profile(nodes)
    raise ValueError(f"cannot parse profile {text!r}")


def parse_measure(text: str) -> RiskSpec:
    """Grammar: wc | eloss | var:A | es:A | lses:B | adjes:g=EXPR |
    (oce|sr|ew):l=LOSS."""
    text = text.strip()
    if text == "wc":
        return RiskSpec.wc()
    if text == "eloss":
        return RiskSpec.expected_loss()
    head, _, rest = text.partition(":")
    if head in ("var", "es", "lses"):
        try:
            value = float(rest)
        except ValueError:
            raise ValueError(f"cannot parse measure {text!r}") from None
        if head == "var":
            return RiskSpec.var_at(value)
        if head == "es":
            return RiskSpec.es_at(value)
        return RiskSpec.lses_at(value)
    if head == "adjes":
        if not rest.startswith("g="):
            raise ValueError("adjusted ES needs g=<profile>")
        return RiskSpec.adjusted(parse_profile(rest[2:]))
    if head in ("oce", "sr", "ew"):
        if not rest.startswith("l="):
            raise ValueError(f"{head} needs l=<loss>")
        loss = parse_loss(rest[2:])
        return RiskSpec(head, loss=loss)
    raise ValueError(f"cannot parse measure {text!r}")


# ---------------------------------------------------------------------------
# CSV / plot-data emission
# ---------------------------------------------------------------------------

def frontier_csv(fr, d: int) -> str:
    header = ["nu", "rho_nu", "rho_inf_nu"] + [f"pi_{k + 1}" for k in range(d)]
    lines = [",".join(header)]
    inf_vals = fr.rho_inf_values()
    for i, nu in enumerate(fr.nu_grid):
        pi = fr.optimal_portfolios[i]
        cells = [_fmt(nu), _fmt(fr.rho_values[i]), _fmt(inf_vals[i])]
        cells += [_fmt(v) for v in pi] if pi is not None else ["nan"] * d
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def frontier_plot_data(fr, eff) -> str:
    lines = ["# optimal_boundary: risk return"]
    for nu, rho in zip(fr.nu_grid, fr.rho_values):
        lines.append(f"{_fmt(rho)} {_fmt(nu)}")
    lines.append("# efficient_frontier: risk return")
    if not eff.empty:
        for nu, rho in zip(eff.nu_values, eff.rho_values):
            lines.append(f"{_fmt(rho)} {_fmt(nu)}")
    return "\n".join(lines) + "\n"


def density_csv(density) -> str:
    lines = ["atom,probability,z"]
    for i, (p, z) in enumerate(zip(density.space.probs, density.z)):
        lines.append(f"{i},{_fmt(p)},{_fmt(z)}")
    return "\n".join(lines) + "\n"


def price_interval_csv(interval) -> str:
    lines = ["kind,lower,upper,lower_attained,upper_attained",
             ",".join([interval.kind, _fmt(interval.lower),
                       _fmt(interval.upper),
                       str(interval.lower_attained).lower(),
                       str(interval.upper_attained).lower()])]
    return "\n".join(lines) + "\n"
