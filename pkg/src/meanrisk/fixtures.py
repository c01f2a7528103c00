"""Constructed inputs used by the experiment commands and the test suite.

* an explicit irregular optimal-boundary function (star-shaped but wildly
  non-convex) used as plot data,
* a target profile whose convex-hull transform changes the adjusted ES of an
  exponential loss variable (the two values differ by about 0.01),
* quantile discretisations of the exponential and normal laws,
* a binomial market tuned so that its unique martingale density sits exactly
  on the sup-norm bound of an unbounded profile with beta = 3/4.
"""
from __future__ import annotations

import numpy as np

from .losses import GPiece, TargetProfile
from .lses import normal_quantile_grid
from .market import FiniteSpace, Market, RandVar


def irregular_boundary(nu) -> np.ndarray:
    """A lower semicontinuous star-shaped boundary with jumps and curved arcs.

    Piecewise: -nu up to 10, a rising line to -7.5 on (10, 15], the plateau
    -6 on (15, 20], -nu/4 on (20, 40], a parabola on (40, 47], zero on the
    gap (47, 50], an inverted parabola on (50, 53] and nu - 40 beyond.
    """
    nu = np.asarray(nu, dtype=float)
    out = np.zeros(nu.shape)
    out = np.where((nu >= 0) & (nu <= 10), -nu, out)
    out = np.where((nu > 10) & (nu <= 15), nu / 2.0 - 15.0, out)
    out = np.where((nu > 15) & (nu <= 20), -6.0, out)
    out = np.where((nu > 20) & (nu <= 40), -nu / 4.0, out)
    out = np.where((nu > 40) & (nu <= 47), (nu - 39.0) ** 2 / 10.0 - 8.0, out)
    out = np.where((nu > 50) & (nu <= 53), 10.0 - (nu - 53.0) ** 2, out)
    out = np.where(nu > 53, nu - 40.0, out)
    return out if out.ndim else float(out)


IRREGULAR_SPOT_VALUES = {
    10.0: -10.0,
    15.0: -7.5,
    20.0: -6.0,
    40.0: -10.0,
    47.0: -1.6,
    53.0: 10.0,
    60.0: 20.0,
}


def hull_gap_profile() -> TargetProfile:
    """Profile with beta = 0.5, infinite there, and a concave-in-1/x branch.

    Taking the lsc convex hull in 1/x replaces the last branch and shifts
    the adjusted ES of the exponential-loss fixture from about 1.52 to 1.53.
    """
    def mid(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return 1.0 / (2.0 * x - 1.0) - 109.0 / 25.0

    def tail(x):
        x = np.asarray(x, dtype=float)
        return 1.0 - x * x

    pieces = (GPiece(0.5, 0.6, "general", fn=mid),
              GPiece(0.6, 1.0, "general", fn=tail))
    return TargetProfile(pieces, 0.5, True)


def hull_gap_profile_hat() -> TargetProfile:
    """Closed form of the convex-hull transform of ``hull_gap_profile``."""
    def mid(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return 1.0 / (2.0 * x - 1.0) - 109.0 / 25.0

    pieces = (GPiece(0.5, 0.6, "general", fn=mid),
              GPiece(0.6, 1.0, "invlin", a=-24.0 / 25.0, b=24.0 / 25.0))
    return TargetProfile(pieces, 0.5, True)


def exponential_loss_variable(count: int = 200000,
                              rate: float = 0.7) -> RandVar:
    """Y = -X for X exponential, discretised at the quantile midpoints."""
    u = (np.arange(count) + 0.5) / count
    x = -np.log1p(-u) / rate
    space = FiniteSpace(np.full(count, 1.0 / count))
    return RandVar(space, -x)


def standard_normal_variable(count: int = 100000) -> RandVar:
    """Equiprobable quantile-midpoint discretisation of N(0, 1)."""
    space = FiniteSpace(np.full(count, 1.0 / count))
    return RandVar(space, normal_quantile_grid(count))


def boundary_norm_market() -> Market:
    """Binomial market whose unique martingale density is (2/3, 4/3)."""
    return Market.from_excess([0.5, 0.5], 0.0, [[1.0], [-0.5]])


def boundary_norm_profile() -> TargetProfile:
    """Unbounded profile with beta = 3/4 = the reciprocal sup-norm of the
    martingale density of ``boundary_norm_market``; the combination shows
    strong rho-arbitrage without strong recession-measure arbitrage."""
    beta = 0.75

    def fn(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return 1.0 / (x - beta) - 1.0 / (1.0 - beta)

    return TargetProfile((GPiece(beta, 1.0, "general", fn=fn),), beta, True)
