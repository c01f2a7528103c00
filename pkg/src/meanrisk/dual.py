"""Dual representations: density sets, penalties, recession values and the
martingale-measure feasibility programs.

Every density set used by the arbitrage detectors is polyhedral on a finite
space:

* ``box``          lo <= z_i <= hi
* ``supnorm``      z_i <= hi, optionally strict (an open bound)
* ``scaled_box``   a <= k z_i <= b for some k > 0 (shortfall-risk family)
* ``penalized``    alpha(Z) = E[l*(Z)] over the domain of l*
* ``penalized_sup`` alpha(Z) depends on ||Z||_inf only (adjusted-ES family)

Feasibility against the martingale sets M (absolutely continuous) and P
(equivalent) is decided by linear programming; strict constraints are
resolved by slack maximisation with threshold ``SLACK_TOL``, which is the
numerical meaning of "Z > 0 a.s." on a finite space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .losses import GPiece, LossFunction, TargetProfile
from .market import FiniteSpace, Market, RandVar
from .measures import (RiskSpec, es, evaluate, quantile_pieces,
                        worst_case)
from .simplex import OPTIMAL, LPError, solve_lp

SLACK_TOL = 1e-9
MEMBER_TOL = 1e-9


@dataclass(frozen=True)
class Density:
    """Nonnegative Z with E[Z] = 1 over a finite space."""

    space: FiniteSpace
    z: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        if z.shape != (self.space.n,):
            raise ValueError("density length must equal the atom count")
        if np.any(z < -1e-12):
            raise ValueError("density values must be nonnegative")
        if abs(float(self.space.probs @ z) - 1.0) > 1e-10:
            raise ValueError("density must integrate to one")
        object.__setattr__(self, "z", z)

    def pair(self, X: RandVar) -> float:
        """E[-Z X]."""
        return -float(self.space.probs @ (self.z * X.values))

    @property
    def sup_norm(self) -> float:
        return float(np.max(self.z))


@dataclass(frozen=True)
class DualSetSpec:
    """Family-derived constraint description plus its penalty evaluator."""

    kind: str                    # box | supnorm | scaled_box | penalized | penalized_sup
    lo: float = 0.0
    hi: float = math.inf
    strict: bool = False
    a_l: float | None = None
    b_l: float | None = None
    loss: LossFunction | None = None
    profile: TargetProfile | None = None
    b: float | None = None       # linear sup-norm penalty coefficient

    def penalty(self, z, probs) -> float:
        """alpha(Z) for a density given as a vector over the atoms."""
        z = np.asarray(z, dtype=float)
        probs = np.asarray(probs, dtype=float)
        if self.kind in ("box", "supnorm"):
            if self.profile is not None:
                return float(self.profile.value(1.0 / float(np.max(z))))
            return 0.0
        if self.kind == "penalized_sup":
            m = float(np.max(z))
            if self.b is not None:
                return self.b * (m - 1.0)
            return float(self.profile.value(1.0 / m))
        if self.kind == "penalized":
            return float(probs @ self.loss.conjugate_value(z))
        if self.kind == "scaled_box":
            return _scaled_box_penalty(z, probs, self.loss)
        raise ValueError(f"unknown dual set kind {self.kind!r}")  # pragma: no cover

    def contains(self, z, tol: float = MEMBER_TOL) -> bool:
        z = np.asarray(z, dtype=float)
        if np.any(z < -tol):
            return False
        if self.kind in ("box", "penalized"):
            lo = self.lo if self.kind == "box" else self.loss.a_l
            hi = self.hi if self.kind == "box" else self.loss.b_l
            return bool(np.all(z >= lo - tol) and np.all(z <= hi + tol))
        if self.kind == "supnorm":
            if self.strict:
                return bool(np.max(z) < self.hi - tol)
            return bool(np.max(z) <= self.hi + tol)
        if self.kind == "penalized_sup":
            return True
        if self.kind == "scaled_box":
            a = self.a_l if self.a_l else 0.0
            b = self.b_l if self.b_l is not None else math.inf
            if a <= 0.0 and b == math.inf:
                return True
            zmax, zmin = float(np.max(z)), float(np.min(z))
            if b == math.inf:
                return zmin > tol
            # exists k with a <= k z <= b  <=>  a / zmin <= b / zmax
            if zmin <= tol:
                return a <= tol
            return a / zmin <= b / zmax + tol
        raise ValueError(f"unknown dual set kind {self.kind!r}")  # pragma: no cover


@dataclass(frozen=True)
class MartingaleSets:
    """The martingale density sets of a market.

    M holds the absolutely continuous densities (E[Z (R^i - r)] = 0 for all
    assets) and P the equivalent ones (Z > 0 on every atom, decided by slack
    maximisation).
    """

    market: Market

    def member_of_m(self, z, tol: float = MEMBER_TOL) -> bool:
        m = self.market
        z = np.asarray(z, dtype=float)
        if np.any(z < -tol) or abs(float(m.space.probs @ z) - 1.0) > 1e-10:
            return False
        moments = (m.space.probs * z) @ m.excess
        return bool(np.max(np.abs(moments)) <= tol)

    def member_of_p(self, z, tol: float = MEMBER_TOL) -> bool:
        return self.member_of_m(z, tol) and bool(np.min(np.asarray(z)) > SLACK_TOL)

    def element_of_m(self) -> "Density | None":
        return martingale_feasibility(self.market, None)

    def element_of_p(self) -> "Density | None":
        return interior_martingale_feasibility(
            self.market, DualSetSpec("box", 0.0, math.inf))


def _scaled_box_penalty(z, probs, loss: LossFunction) -> float:
    """inf_{k > 0} (1/k) E[l*(k Z)] by golden section over the feasible k."""
    a, b = loss.a_l, loss.b_l
    zmin, zmax = float(np.min(z)), float(np.max(z))
    lo = a / zmin if (a > 0 and zmin > 0) else 1e-8
    hi = b / zmax if b != math.inf else max(lo * 1e6, 1e6)
    if a > 0 and zmin <= 0:
        return math.inf
    if lo > hi:
        return math.inf

    def val(k: float) -> float:
        return float(probs @ loss.conjugate_value(k * z)) / k

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1, x2 = lo, hi
    c = x2 - invphi * (x2 - x1)
    d = x1 + invphi * (x2 - x1)
    fc, fd = val(c), val(d)
    for _ in range(200):
        if x2 - x1 < 1e-12 * max(1.0, abs(x2)):
            break
        if fc < fd:
            x2, d, fd = d, c, fc
            c = x2 - invphi * (x2 - x1)
            fc = val(c)
        else:
            x1, c, fc = c, d, fd
            d = x1 + invphi * (x2 - x1)
            fd = val(d)
    return val(0.5 * (x1 + x2))


# ---------------------------------------------------------------------------
# Family -> dual set
# ---------------------------------------------------------------------------

_DUAL_FAMILIES = ("es", "wc", "eloss", "lses", "adjes", "oce", "sr")


def dual_set(spec: RiskSpec) -> DualSetSpec:
    """Constraint description and penalty of the family's dual representation."""
    fam = spec.family
    if fam not in _DUAL_FAMILIES:
        raise ValueError(f"family {fam!r} has no supported dual representation")
    if fam == "es":
        return DualSetSpec("box", 0.0, 1.0 / spec.alpha)
    if fam == "wc":
        return DualSetSpec("box", 0.0, math.inf)
    if fam == "eloss":
        return DualSetSpec("box", 1.0, 1.0)
    if fam == "lses":
        return DualSetSpec("penalized_sup", b=spec.b)
    if fam == "adjes":
        g = spec.profile
        if g.beta == 0.0:
            return DualSetSpec("penalized_sup", profile=g)
        return DualSetSpec("supnorm", hi=1.0 / g.beta,
                           strict=not g.bounded_on_domain, profile=g)
    if fam == "oce":
        return DualSetSpec("penalized", loss=spec.loss)
    loss = spec.loss
    if loss.zero_on_negatives:
        return DualSetSpec("box", 0.0, math.inf)
    return DualSetSpec("scaled_box", a_l=loss.a_l, b_l=loss.b_l, loss=loss)


def closure_dual_set(spec: RiskSpec) -> DualSetSpec:
    """Effective domain of the lsc convex hull of the penalty."""
    fam = spec.family
    if fam not in _DUAL_FAMILIES:
        raise ValueError(f"family {fam!r} has no supported dual representation")
    if fam == "es":
        return DualSetSpec("box", 0.0, 1.0 / spec.alpha)
    if fam in ("wc", "lses"):
        return DualSetSpec("box", 0.0, math.inf)
    if fam == "eloss":
        return DualSetSpec("box", 1.0, 1.0)
    if fam == "adjes":
        g = spec.profile
        if g.beta == 0.0:
            return DualSetSpec("box", 0.0, math.inf)
        return DualSetSpec("supnorm", hi=1.0 / g.beta,
                           strict=not g.bounded_on_domain, profile=g)
    if fam == "oce":
        loss = spec.loss
        return DualSetSpec("box", loss.a_l, loss.b_l, loss=loss)
    loss = spec.loss
    if loss.zero_on_negatives or loss.a_l == 0.0 or loss.b_l == math.inf:
        return DualSetSpec("box", 0.0, math.inf)
    return DualSetSpec("scaled_box", a_l=loss.a_l, b_l=loss.b_l, loss=loss)


# ---------------------------------------------------------------------------
# Polyhedral form of the closed sets (used by LPs)
# ---------------------------------------------------------------------------

@dataclass
class SetPolytope:
    """{w >= 0 : A_ub w <= b_ub, A_eq w = b_eq}; the first n coords are z.

    ``strict_rows`` flags the A_ub rows that are strict in the underlying set
    (resolved by slack maximisation when it matters).
    """

    n: int
    nvars: int
    A_ub: np.ndarray
    b_ub: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    strict_rows: list


def set_polytope(ds: DualSetSpec | None, space: FiniteSpace) -> SetPolytope:
    """Closed polyhedral description of a dual set over the given space."""
    n = space.n
    p = space.probs
    rows_ub, rhs_ub, strict = [], [], []
    nvars = n
    if ds is None:
        ds = DualSetSpec("box", 0.0, math.inf)
    kind = ds.kind
    if kind == "penalized":
        ds = DualSetSpec("box", ds.loss.a_l, ds.loss.b_l, loss=ds.loss)
        kind = "box"
    if kind == "penalized_sup":
        ds = DualSetSpec("box", 0.0, math.inf)
        kind = "box"

    if kind in ("box", "supnorm"):
        hi = ds.hi
        lo = ds.lo if kind == "box" else 0.0
        if hi != math.inf:
            for i in range(n):
                row = np.zeros(n)
                row[i] = 1.0
                rows_ub.append(row)
                rhs_ub.append(hi)
                if ds.strict:
                    strict.append(len(rows_ub) - 1)
        if lo > 0.0:
            for i in range(n):
                row = np.zeros(n)
                row[i] = -1.0
                rows_ub.append(row)
                rhs_ub.append(-lo)
        A_eq = p[None, :]
        b_eq = np.array([1.0])
    elif kind == "scaled_box":
        a = ds.a_l or 0.0
        b = ds.b_l if ds.b_l is not None else math.inf
        if a <= 0.0 and b == math.inf:
            return set_polytope(DualSetSpec("box", 0.0, math.inf), space)
        nvars = n + 1  # auxiliary scale s with z in [a s, b s]
        for i in range(n):
            if b != math.inf:
                row = np.zeros(nvars)
                row[i] = 1.0
                row[n] = -b
                rows_ub.append(row)
                rhs_ub.append(0.0)
            if a > 0.0:
                row = np.zeros(nvars)
                row[i] = -1.0
                row[n] = a
                rows_ub.append(row)
                rhs_ub.append(0.0)
        A_eq = np.zeros((1, nvars))
        A_eq[0, :n] = p
        b_eq = np.array([1.0])
    else:  # pragma: no cover
        raise ValueError(f"unsupported kind {kind!r}")

    A_ub = np.array(rows_ub) if rows_ub else np.zeros((0, nvars))
    b_ub = np.array(rhs_ub) if rhs_ub else np.zeros(0)
    return SetPolytope(n, nvars, A_ub, b_ub, A_eq, b_eq, strict)


def _martingale_rows(m: Market, nvars: int) -> tuple[np.ndarray, np.ndarray]:
    """E[Z (R^i - r)] = 0 rows over the z part of the variable vector."""
    rows = np.zeros((m.d, nvars))
    rows[:, :m.space.n] = (m.excess * m.space.probs[:, None]).T
    return rows, np.zeros(m.d)


def martingale_feasibility(m: Market, ds: DualSetSpec | None = None
                           ) -> Density | None:
    """A density in M intersected with the (closed form of the) dual set.

    Strict sup-norm bounds are decided by maximising the bound slack; every
    other case is a plain feasibility program.
    """
    pt = set_polytope(ds, m.space)
    mg_A, mg_b = _martingale_rows(m, pt.nvars)
    A_eq = np.vstack([pt.A_eq, mg_A])
    b_eq = np.concatenate([pt.b_eq, mg_b])
    if pt.strict_rows:
        q = pt.nvars
        A_ub = np.hstack([pt.A_ub, np.zeros((pt.A_ub.shape[0], 1))])
        for r in pt.strict_rows:
            A_ub[r, q] = 1.0
        c = np.zeros(q + 1)
        c[q] = 1.0
        res = solve_lp(c, A_ub=A_ub, b_ub=pt.b_ub,
                       A_eq=np.hstack([A_eq, np.zeros((A_eq.shape[0], 1))]),
                       b_eq=b_eq, maximize=True)
        if res.status != OPTIMAL or res.x[q] <= SLACK_TOL:
            return None
        return Density(m.space, res.x[:pt.n])
    res = solve_lp(np.zeros(pt.nvars), A_ub=pt.A_ub, b_ub=pt.b_ub,
                   A_eq=A_eq, b_eq=b_eq)
    if res.status != OPTIMAL:
        return None
    return Density(m.space, res.x[:pt.n])


def interior_slack(m: Market, ds: DualSetSpec) -> tuple[float, Density | None]:
    """Maximal joint slack for Z in M with Z >= eps and strict-interior bounds."""
    base = interior_polytope(ds, m.space)
    q = base.nvars - 1  # slack is the last variable
    mg_A, mg_b = _martingale_rows(m, base.nvars)
    A_eq = np.vstack([base.A_eq, mg_A])
    b_eq = np.concatenate([base.b_eq, mg_b])
    c = np.zeros(base.nvars)
    c[q] = 1.0
    res = solve_lp(c, A_ub=base.A_ub, b_ub=base.b_ub, A_eq=A_eq, b_eq=b_eq,
                   maximize=True)
    if res.status != OPTIMAL:
        return -math.inf, None
    eps = float(res.x[q])
    if eps <= SLACK_TOL:
        return eps, None
    return eps, Density(m.space, res.x[:base.n])


def interior_polytope(ds: DualSetSpec, space: FiniteSpace) -> SetPolytope:
    """Strict-interior form: z >= delta plus inward-shifted set bounds."""
    n = space.n
    p = space.probs
    kind = ds.kind
    if kind == "penalized":
        ds = DualSetSpec("box", ds.loss.a_l, ds.loss.b_l, loss=ds.loss)
        kind = "box"
    if kind == "penalized_sup":
        ds = DualSetSpec("box", 0.0, math.inf)
        kind = "box"

    rows, rhs = [], []
    if kind in ("box", "supnorm"):
        nvars = n + 1
        lo = ds.lo if kind == "box" else 0.0
        hi = ds.hi
        for i in range(n):
            row = np.zeros(nvars)
            row[i] = -1.0
            row[n] = 1.0
            rows.append(row)
            rhs.append(-max(lo, 0.0))      # z_i - delta >= max(lo, 0)
            if hi != math.inf:
                row = np.zeros(nvars)
                row[i] = 1.0
                row[n] = 1.0
                rows.append(row)
                rhs.append(hi)             # z_i + delta <= hi
        A_eq = np.zeros((1, nvars))
        A_eq[0, :n] = p
    elif kind == "scaled_box":
        a = ds.a_l or 0.0
        b = ds.b_l if ds.b_l is not None else math.inf
        if a <= 0.0 and b == math.inf:
            return interior_polytope(DualSetSpec("box", 0.0, math.inf), space)
        nvars = n + 2                      # z, s, delta
        for i in range(n):
            row = np.zeros(nvars)
            row[i] = -1.0
            row[n + 1] = 1.0
            rows.append(row)
            rhs.append(0.0)                # z_i >= delta
            if a > 0.0:
                row = np.zeros(nvars)
                row[i] = -1.0
                row[n] = a
                row[n + 1] = 1.0
                rows.append(row)
                rhs.append(0.0)            # z_i >= a s + delta
            if b != math.inf:
                row = np.zeros(nvars)
                row[i] = 1.0
                row[n] = -b
                row[n + 1] = 1.0
                rows.append(row)
                rhs.append(0.0)            # z_i <= b s - delta
        A_eq = np.zeros((1, nvars))
        A_eq[0, :n] = p
    else:  # pragma: no cover
        raise ValueError(f"unsupported kind {kind!r}")
    b_eq = np.array([1.0])
    return SetPolytope(n, nvars, np.array(rows), np.array(rhs), A_eq, b_eq, [])


def interior_martingale_feasibility(m: Market, ds: DualSetSpec
                                    ) -> Density | None:
    """Witness of tilde-Q intersected with P, or None when no slack exists."""
    _, witness = interior_slack(m, ds)
    return witness


# ---------------------------------------------------------------------------
# Support values and recession functions
# ---------------------------------------------------------------------------

def support_value(ds: DualSetSpec | None, X: RandVar) -> float:
    """max E[-ZX] over the closed form of the dual set (an LP)."""
    pt = set_polytope(ds, X.space)
    c = np.zeros(pt.nvars)
    c[:pt.n] = -X.space.probs * X.values
    res = solve_lp(c, A_ub=pt.A_ub, b_ub=pt.b_ub, A_eq=pt.A_eq, b_eq=pt.b_eq,
                   maximize=True)
    if res.status != OPTIMAL:
        raise LPError(f"support-value LP ended with status {res.status}")
    return float(res.value)


def recession_value(spec: RiskSpec, X: RandVar) -> float:
    """The smallest positively homogeneous majorant evaluated at X."""
    fam = spec.family
    if fam in ("var", "es", "wc", "eloss"):
        return evaluate(spec, X)
    if fam == "lses":
        return worst_case(X)
    if fam == "adjes":
        beta = spec.profile.beta
        return es(X, beta) if beta > 0.0 else worst_case(X)
    if fam == "oce":
        return support_value(closure_dual_set(spec), X)
    if fam == "sr":
        cd = closure_dual_set(spec)
        if cd.kind == "box" and cd.hi == math.inf and cd.lo == 0.0:
            return worst_case(X)
        return support_value(cd, X)
    if fam == "ew":
        loss = spec.loss
        y = -X.values
        out = 0.0
        for pi, yi in zip(X.space.probs, y):
            if yi > 0:
                if loss.b_l == math.inf:
                    return math.inf
                out += pi * loss.b_l * yi
            elif yi < 0:
                out += pi * loss.a_l * yi
        return float(out)
    raise ValueError(f"no recession rule for family {fam!r}")  # pragma: no cover


def numeric_recession_probe(spec: RiskSpec, X: RandVar,
                            t_ladder=None) -> np.ndarray:
    """rho(tX)/t along an increasing ladder; nondecreasing by star-shapedness."""
    if t_ladder is None:
        t_ladder = [2.0 ** k for k in range(0, 21, 2)]
    t_ladder = list(t_ladder)
    if any(t < 1.0 for t in t_ladder) or any(
            t_ladder[i] >= t_ladder[i + 1] for i in range(len(t_ladder) - 1)):
        raise ValueError("ladder must be increasing and start at t >= 1")
    return np.array([evaluate(spec, X.scaled(t)) / t for t in t_ladder])


# ---------------------------------------------------------------------------
# Dual-side evaluation of the risk measures
# ---------------------------------------------------------------------------

def dual_evaluate(spec: RiskSpec, X: RandVar) -> float:
    """sup_Z {E[-ZX] - alpha(Z)} computed on the dual side.

    Linear programs cover the box/sup-norm families (loss sensitive ES gets a
    single LP in (z, M)); piecewise-linear conjugates become exact cutting
    planes; smooth conjugates go through the one-dimensional Lagrangian dual
    with a primal witness recovered for the reported value.
    """
    fam = spec.family
    if fam in ("es", "wc", "eloss"):
        return support_value(dual_set(spec), X)
    if fam == "lses":
        return _lses_dual_lp(X, spec.b)
    if fam == "adjes":
        return _adjes_dual(X, spec.profile)
    if fam == "oce":
        if spec.loss.kind == "pwl":
            return _penalized_cut_lp(X, spec.loss)
        return _oce_smooth_dual(X, spec.loss)
    if fam == "sr":
        loss = spec.loss
        if loss.zero_on_negatives:
            return support_value(DualSetSpec("box", 0.0, math.inf), X)
        if loss.kind == "pwl":
            return _perspective_cut_lp(X, loss)
        return _sr_smooth_dual(X, loss)
    raise ValueError(f"family {fam!r} is not dual-capable")


def _lses_dual_lp(X: RandVar, b: float) -> float:
    n = X.space.n
    p = X.space.probs
    # variables (z_1..z_n, M): maximize E[-zX] - b(M - 1)
    c = np.concatenate([-p * X.values, [-b]])
    A_ub = np.hstack([np.eye(n), -np.ones((n, 1))])   # z_i <= M
    b_ub = np.zeros(n)
    A_eq = np.concatenate([p, [0.0]])[None, :]
    res = solve_lp(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                   maximize=True)
    if res.status != OPTIMAL:
        raise LPError(f"loss-sensitive dual LP status {res.status}")
    return float(res.value) + b


def _box_lp_value(X: RandVar, hi: float) -> float:
    return support_value(DualSetSpec("box", 0.0, hi), X)


def _adjes_dual(X: RandVar, profile: TargetProfile) -> float:
    """Outer scan over the sup-norm bound with a box LP at each candidate.

    For constant / affine-in-1/x profile pieces the objective is piecewise
    linear in the bound, so candidate bounds (quantile breakpoints and piece
    edges) are exhaustive; general pieces get a golden-section refinement.
    """
    _, _, cum, _ = quantile_pieces(X)
    has_general = any(pc.kind == "general" for pc in profile.pieces)
    if has_general and X.space.n > 400:
        raise ValueError("dual evaluation of general profiles is limited to "
                         "small spaces")
    beta = profile.beta
    m_cap = 1.0 / float(cum[0])
    if beta > 0.0:
        m_cap = min(m_cap, 1.0 / beta)
    cand = {1.0, m_cap}
    for f in cum[:-1]:
        mm = 1.0 / float(f)
        if 1.0 <= mm <= m_cap:
            cand.add(mm)
    for pc in profile.pieces:
        for edge in (pc.lo, pc.hi):
            if edge > 0 and 1.0 <= 1.0 / edge <= m_cap:
                cand.add(1.0 / edge)

    def value_at(m_bound: float) -> float:
        g = float(profile.value(1.0 / m_bound))
        if not math.isfinite(g):
            return -math.inf
        return _box_lp_value(X, m_bound) - g

    cand = sorted(cand)
    vals = [value_at(m) for m in cand]
    best = max(vals)
    if has_general:
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        order = np.argsort(vals)[-3:]
        for i in order:
            lo = cand[max(int(i) - 1, 0)]
            hi = cand[min(int(i) + 1, len(cand) - 1)]
            a_, b_ = lo, hi
            c_ = b_ - invphi * (b_ - a_)
            d_ = a_ + invphi * (b_ - a_)
            fc, fd = value_at(c_), value_at(d_)
            for _ in range(80):
                if b_ - a_ < 1e-10 * max(1.0, b_):
                    break
                if fc > fd:
                    b_, d_, fd = d_, c_, fc
                    c_ = b_ - invphi * (b_ - a_)
                    fc = value_at(c_)
                else:
                    a_, c_, fc = c_, d_, fd
                    d_ = a_ + invphi * (b_ - a_)
                    fd = value_at(d_)
            best = max(best, fc, fd)
    return best


def _penalized_cut_lp(X: RandVar, loss: LossFunction) -> float:
    """Exact LP for OCE duals with piecewise-linear conjugates."""
    n = X.space.n
    p = X.space.probs
    cuts = loss.conjugate_cuts()
    # variables (z, t): maximize E[-Xz] - E[t], t_i >= A z_i + B per cut
    c = np.concatenate([-p * X.values, -p])
    rows, rhs = [], []
    for (A, B) in cuts:
        for i in range(n):
            row = np.zeros(2 * n)
            row[i] = A
            row[n + i] = -1.0
            rows.append(row)
            rhs.append(-B)
    A_eq = np.concatenate([p, np.zeros(n)])[None, :]
    lower = np.concatenate([np.full(n, max(loss.a_l, 0.0)), np.zeros(n)])
    upper = np.concatenate([np.full(n, loss.b_l), np.full(n, np.inf)])
    res = solve_lp(c, A_ub=np.array(rows), b_ub=np.array(rhs),
                   A_eq=A_eq, b_eq=[1.0], lower=lower, upper=upper,
                   maximize=True)
    if res.status != OPTIMAL:
        raise LPError(f"penalized dual LP status {res.status}")
    return float(res.value)


def _perspective_cut_lp(X: RandVar, loss: LossFunction) -> float:
    """Exact LP for shortfall-risk duals: sup E[-Xz] - s E[l*(z/s)].

    Uses the scaled variables (z, s) where the true density is z and the
    penalty is the perspective of E[l*]; the perspective of a piecewise
    linear function is the pointwise max of the same cuts made positively
    homogeneous in (z, s).
    """
    n = X.space.n
    p = X.space.probs
    cuts = loss.conjugate_cuts()
    # variables (z, t, s)
    c = np.concatenate([-p * X.values, -p, [0.0]])
    rows, rhs = [], []
    for (A, B) in cuts:
        for i in range(n):
            row = np.zeros(2 * n + 1)
            row[i] = A
            row[n + i] = -1.0
            row[2 * n] = B
            rows.append(row)
            rhs.append(0.0)               # t_i >= A z_i + B s
    a, b = loss.a_l, loss.b_l
    for i in range(n):
        if b != math.inf:
            row = np.zeros(2 * n + 1)
            row[i] = 1.0
            row[2 * n] = -b
            rows.append(row)
            rhs.append(0.0)
        if a > 0.0:
            row = np.zeros(2 * n + 1)
            row[i] = -1.0
            row[2 * n] = a
            rows.append(row)
            rhs.append(0.0)
    A_eq = np.concatenate([p, np.zeros(n + 1)])[None, :]
    res = solve_lp(c, A_ub=np.array(rows), b_ub=np.array(rhs),
                   A_eq=A_eq, b_eq=[1.0], maximize=True)
    if res.status != OPTIMAL:
        raise LPError(f"perspective dual LP status {res.status}")
    return float(res.value)


def _oce_smooth_dual(X: RandVar, loss: LossFunction) -> float:
    """One-dimensional Lagrangian dual with a primal density witness."""
    p = X.space.probs
    x = X.values

    def phi(lam: float) -> float:
        return lam + float(p @ loss.value(-x - lam))

    lam = _golden_min(phi, -worst_case(X) - 50.0, worst_case(X) + 50.0)
    z = loss.derivative(-x - lam)
    total = float(p @ z)
    if total <= 0:
        return phi(lam)
    z = z / total
    return -float(p @ (z * x)) - float(p @ loss.conjugate_value(z))


def _sr_smooth_dual(X: RandVar, loss: LossFunction) -> float:
    """Nested one-dimensional duals: sup over the scale of an OCE-type dual."""
    p = X.space.probs
    x = X.values

    def inner(lam: float) -> float:
        def phi(mu: float) -> float:
            return mu + float(p @ loss.value(-x - mu)) / lam
        mu = _golden_min(phi, -worst_case(X) - 60.0, worst_case(X) + 60.0)
        z = loss.derivative(-x - mu) / lam
        total = float(p @ z)
        if total <= 0:
            return phi(mu)
        z = z / total
        k = lam * total  # scale back to the un-normalised multiplier
        pen = float(p @ loss.conjugate_value(k * z)) / k
        return -float(p @ (z * x)) - pen

    def outer(u: float) -> float:
        return -inner(math.exp(u))

    u = _golden_min(outer, -16.0, 16.0)
    return inner(math.exp(u))


def _golden_min(f, lo: float, hi: float) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(300):
        if b - a < 1e-12 * max(1.0, abs(a), abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# Profile transform: lsc convex hull in 1/x
# ---------------------------------------------------------------------------

def g_hat_transform(profile: TargetProfile, grid: int = 20000) -> TargetProfile:
    """Lower semicontinuous convex hull of y -> g(1/y), mapped back to x.

    Samples the transformed profile on a dense grid over [1, 1/beta), takes
    the lower convex hull of the sampled epigraph (monotone chain) and
    returns the piecewise-linear interpolation as a new profile.  Accuracy is
    grid limited; g(beta) = inf is preserved for profiles unbounded near
    beta.
    """
    beta = profile.beta
    if not 0.0 < beta < 1.0:
        raise ValueError("transform needs beta in (0, 1)")
    if grid < 100:
        raise ValueError("grid too coarse")
    y_cap = 1.0 / beta
    ys = 1.0 + (y_cap - 1.0) * (np.arange(grid) / grid)
    with np.errstate(divide="ignore", over="ignore"):
        gt = np.asarray(profile.value(1.0 / ys), dtype=float)
    mask = np.isfinite(gt)
    ys, gt = ys[mask], gt[mask]
    if ys.size < 2:
        raise ValueError("profile has too little finite support to transform")

    hull_x, hull_y = _lower_hull(ys, gt)

    def hat(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            y = 1.0 / x
        out = np.interp(y, hull_x, hull_y)
        # linear continuation beyond the last hull vertex
        if hull_x.size >= 2:
            slope = (hull_y[-1] - hull_y[-2]) / (hull_x[-1] - hull_x[-2])
            beyond = y > hull_x[-1]
            out = np.where(beyond, hull_y[-1] + slope * (y - hull_x[-1]), out)
        out = np.where(y < hull_x[0], hull_y[0], out)
        # chords over convex stretches exceed the sampled function between
        # grid nodes; capping by the original keeps hat <= g pointwise
        out = np.minimum(out, profile.value(x))
        return out if out.ndim else float(out)

    pieces = (GPiece(beta, 1.0, "general", fn=hat),)
    return TargetProfile(pieces, beta, profile.unbounded_near_beta,
                         profile.tail_coeff)


def _lower_hull(xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lower convex hull of points sorted by x (Andrew's monotone chain)."""
    hx: list[float] = []
    hy: list[float] = []
    for x, y in zip(xs, ys):
        while len(hx) >= 2:
            cross = ((hx[-1] - hx[-2]) * (y - hy[-2])
                     - (hy[-1] - hy[-2]) * (x - hx[-2]))
            if cross <= 0:
                hx.pop()
                hy.pop()
            else:
                break
        hx.append(float(x))
        hy.append(float(y))
    return np.asarray(hx), np.asarray(hy)
