"""Optimal boundaries, efficient frontiers and the arbitrage detectors.

``rho_nu`` minimises a risk measure over the affine slice of portfolios with
a prescribed expected excess return; family-specific reformulations keep
every solve exact where possible:

* expected shortfall    -> auxiliary-variable LP
* worst case            -> minimax LP
* pwl loss families     -> epigraph LPs over the loss pieces
* exp loss families     -> damped Newton on the smooth convex objective
* loss sensitive ES and adjusted ES with analytic profiles
                        -> epigraph LP over the finite level candidates
                           (subset sums of the atom probabilities) on small
                           spaces, cutting planes otherwise

Recession frontiers are linear programs obtained by dualising the inner
support-function maximisation over the closed dual polytope, so the primal
arbitrage detectors never consult the martingale feasibility programs they
are checked against.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import lses as lses_mod
from .dual import (Density, closure_dual_set, dual_set,
                   interior_martingale_feasibility, martingale_feasibility)
from .market import (ArbitrageWitness, Market, RandVar,
                     check_classical_arbitrage, excess_return,
                     portfolio_slice)
from .measures import RiskSpec, adjusted_es_argmax, evaluate
from .simplex import OPTIMAL, UNBOUNDED, LPError, solve_lp

SIGN_TOL = 1e-7          # sign classification of rho_inf_1 and ball minima
OBJ_TOL = 1e-8           # cutting-plane convergence on objective values
MAX_CANDIDATE_LEVELS = 80


# ---------------------------------------------------------------------------
# Portfolio parametrisations
# ---------------------------------------------------------------------------

@dataclass
class _Param:
    """X = x0 + C theta over a variable vector theta with optional rows."""

    x0: np.ndarray
    C: np.ndarray                  # (n, q)
    lower: np.ndarray
    upper: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    to_portfolio: object           # theta -> pi


def _slice_param(m: Market, nu: float) -> _Param:
    sl = portfolio_slice(m, nu)
    B = sl.null_basis
    q = B.shape[1]
    return _Param(m.excess @ sl.particular, m.excess @ B,
                  np.full(q, -np.inf), np.full(q, np.inf),
                  np.zeros((0, q)), np.zeros(0),
                  lambda t: sl.particular + (B @ t if q else 0.0))


def _ball_param(m: Market) -> _Param:
    d = m.d
    C = np.hstack([m.excess, -m.excess])
    row = np.ones((1, 2 * d))
    return _Param(np.zeros(m.space.n), C,
                  np.zeros(2 * d), np.full(2 * d, np.inf),
                  row, np.array([1.0]),
                  lambda t: t[:d] - t[d:])


# ---------------------------------------------------------------------------
# Family optimisers over a parametrised portfolio set
# ---------------------------------------------------------------------------

def _es_min(par: _Param, p: np.ndarray, alpha: float):
    """min ES_alpha(X(theta)): variables (theta, m, u >= 0)."""
    n, q = par.C.shape[0], par.C.shape[1]
    nv = q + 1 + n
    c = np.zeros(nv)
    c[q] = 1.0
    c[q + 1:] = p / alpha
    rows = np.zeros((n, nv))
    rows[:, :q] = -par.C
    rows[:, q] = -1.0
    rows[:, q + 1:] = -np.eye(n)
    rhs = par.x0.copy()
    A_ub = np.vstack([rows, np.hstack([par.A_ub, np.zeros((par.A_ub.shape[0],
                                                           nv - q))])])
    b_ub = np.concatenate([rhs, par.b_ub])
    lower = np.concatenate([par.lower, [-np.inf], np.zeros(n)])
    upper = np.concatenate([par.upper, [np.inf], np.full(n, np.inf)])
    res = solve_lp(c, A_ub=A_ub, b_ub=b_ub, lower=lower, upper=upper)
    return res, (res.x[:q] if res.status == OPTIMAL else None)


def _wc_min(par: _Param, p: np.ndarray):
    n, q = par.C.shape
    nv = q + 1
    c = np.zeros(nv)
    c[q] = 1.0
    rows = np.zeros((n, nv))
    rows[:, :q] = -par.C
    rows[:, q] = -1.0
    A_ub = np.vstack([rows, np.hstack([par.A_ub, np.zeros((par.A_ub.shape[0], 1))])])
    b_ub = np.concatenate([par.x0, par.b_ub])
    lower = np.concatenate([par.lower, [-np.inf]])
    upper = np.concatenate([par.upper, [np.inf]])
    res = solve_lp(c, A_ub=A_ub, b_ub=b_ub, lower=lower, upper=upper)
    return res, (res.x[:q] if res.status == OPTIMAL else None)


def _pwl_family_min(par: _Param, p: np.ndarray, spec: RiskSpec):
    """Epigraph LP for ew/sr/oce with piecewise-linear losses."""
    loss = spec.loss
    lines = loss.pieces_as_lines()
    n, q = par.C.shape
    fam = spec.family
    extra = 0 if fam == "ew" else 1       # sr: capital m, oce: eta
    nv = q + extra + n
    rows, rhs = [], []
    for (A, B) in lines:
        for i in range(n):
            row = np.zeros(nv)
            # argument y_i = -X_i - m (sr), eta - X_i (oce), -X_i (ew)
            row[:q] = -A * par.C[i]
            if fam == "sr":
                row[q] = -A
            elif fam == "oce":
                row[q] = A
            row[q + extra + i] = -1.0
            rows.append(row)
            rhs.append(A * par.x0[i] - B)
    c = np.zeros(nv)
    if fam == "sr":
        c[q] = 1.0
        row = np.zeros(nv)
        row[q + extra:] = p
        rows.append(row)
        rhs.append(0.0)                   # E[l(-X-m)] <= 0
    elif fam == "oce":
        c[q] = -1.0
        c[q + extra:] = p
    else:
        c[q + extra:] = p
    A_ub = np.vstack([np.array(rows),
                      np.hstack([par.A_ub, np.zeros((par.A_ub.shape[0],
                                                     nv - q))])])
    b_ub = np.concatenate([np.array(rhs), par.b_ub])
    lower = np.concatenate([par.lower, np.full(extra, -np.inf),
                            np.full(n, -np.inf)])
    upper = np.concatenate([par.upper, np.full(extra + n, np.inf)])
    res = solve_lp(c, A_ub=A_ub, b_ub=b_ub, lower=lower, upper=upper)
    return res, (res.x[:q] if res.status == OPTIMAL else None)


def _entropic_min(par: _Param, p: np.ndarray):
    """min log E[exp(-X(theta))] by damped Newton (slice parametrisation)."""
    q = par.C.shape[1]
    t = np.zeros(q)

    def value(tv):
        expo = -(par.x0 + par.C @ tv)
        mx = float(np.max(expo))
        return mx + math.log(float(p @ np.exp(expo - mx)))

    for _ in range(200):
        expo = -(par.x0 + par.C @ t)
        w = p * np.exp(expo - np.max(expo))
        w = w / w.sum()
        grad = -par.C.T @ w
        H = par.C.T @ (par.C * w[:, None]) - np.outer(par.C.T @ w, par.C.T @ w)
        H = H + 1e-12 * np.eye(q)
        try:
            step = np.linalg.solve(H, -grad)
        except np.linalg.LinAlgError:  # pragma: no cover
            step = -grad
        if float(np.linalg.norm(grad)) < 1e-12:
            break
        f0 = value(t)
        lamb = 1.0
        while lamb > 1e-12 and value(t + lamb * step) > f0 - 1e-14:
            lamb *= 0.5
        if lamb <= 1e-12:
            break
        t = t + lamb * step
    return value(t), t


def _ew_exp_min(par: _Param, p: np.ndarray):
    """min E[exp(-X(theta)) - 1] by damped Newton."""
    q = par.C.shape[1]
    t = np.zeros(q)

    def value(tv):
        return float(p @ np.expm1(-(par.x0 + par.C @ tv)))

    for _ in range(200):
        e = p * np.exp(-(par.x0 + par.C @ t))
        grad = -par.C.T @ e
        if float(np.linalg.norm(grad)) < 1e-12:
            break
        H = par.C.T @ (par.C * e[:, None]) + 1e-12 * np.eye(q)
        step = np.linalg.solve(H, -grad)
        f0 = value(t)
        lamb = 1.0
        while lamb > 1e-12 and value(t + lamb * step) > f0 - 1e-14:
            lamb *= 0.5
        if lamb <= 1e-12:
            break
        t = t + lamb * step
    return value(t), t


def _candidate_levels(p: np.ndarray, profile=None) -> list[float]:
    """Levels that can maximise ES_a - g(a) for any portfolio: subset sums
    of the atom probabilities plus the profile piece edges."""
    n = p.size
    sums = {1.0}
    for k in range(1, n):
        for idx in combinations(range(n), k):
            sums.add(float(np.sum(p[list(idx)])))
    if profile is not None:
        for pc in profile.pieces:
            for edge in (pc.lo, pc.hi):
                if 0.0 < edge <= 1.0:
                    sums.add(float(edge))
        sums = {a for a in sums if a >= profile.beta - 1e-15}
    return sorted(a for a in sums if a > 1e-12)


def _sup_es_min_lp(par: _Param, p: np.ndarray, levels, penalties):
    """min over theta of max_k (ES_{a_k}(X) - pen_k): joint epigraph LP."""
    n, q = par.C.shape
    k = len(levels)
    # variables: theta (q), tau, then per level (m_j, u_j (n))
    nv = q + 1 + k * (1 + n)
    c = np.zeros(nv)
    c[q] = 1.0
    rows, rhs = [], []
    for j, (a, pen) in enumerate(zip(levels, penalties)):
        base = q + 1 + j * (1 + n)
        row = np.zeros(nv)
        row[base] = 1.0
        row[base + 1:base + 1 + n] = p / a
        row[q] = -1.0
        rows.append(row)
        rhs.append(pen)                    # m_j + E[u_j]/a - pen <= tau
        for i in range(n):
            row = np.zeros(nv)
            row[:q] = -par.C[i]
            row[base] = -1.0
            row[base + 1 + i] = -1.0
            rows.append(row)
            rhs.append(par.x0[i])          # u_ji >= -X_i - m_j
    A_ub = np.vstack([np.array(rows),
                      np.hstack([par.A_ub, np.zeros((par.A_ub.shape[0],
                                                     nv - q))])])
    b_ub = np.concatenate([np.array(rhs), par.b_ub])
    lower = np.full(nv, -np.inf)
    lower[:q] = par.lower
    upper = np.full(nv, np.inf)
    upper[:q] = par.upper
    for j in range(k):
        base = q + 1 + j * (1 + n)
        lower[base + 1:base + 1 + n] = 0.0
    res = solve_lp(c, A_ub=A_ub, b_ub=b_ub, lower=lower, upper=upper)
    return res, (res.x[:q] if res.status == OPTIMAL else None)


def _tail_density(X: RandVar, alpha: float) -> np.ndarray:
    """A maximiser of E[-ZX] over {0 <= Z <= 1/alpha, E[Z] = 1}."""
    order = np.argsort(X.values, kind="stable")
    p = X.space.probs[order]
    cum = np.cumsum(p)
    z = np.zeros(X.space.n)
    budget = alpha
    for pos, idx in enumerate(order):
        take = min(p[pos], budget)
        z[idx] = take / (alpha * p[pos])
        budget -= take
        if budget <= 1e-15:
            break
    return z


def _kelley_min(oracle, q: int, radius: float = 16.0):
    """Minimise a convex function from value/subgradient cuts on a box."""
    if q == 0:
        v, _ = oracle(np.zeros(0))
        return v, np.zeros(0)
    cuts = []
    t = np.zeros(q)
    best_v, best_t = math.inf, t
    R = radius
    for _ in range(400):
        v, g = oracle(t)
        if v < best_v - 1e-15:
            best_v, best_t = v, t.copy()
        cuts.append((g.copy(), v - float(g @ t)))
        nv = q + 1
        rows = np.zeros((len(cuts), nv))
        rhs = np.zeros(len(cuts))
        for i, (gi, ci) in enumerate(cuts):
            rows[i, :q] = gi
            rows[i, q] = -1.0
            rhs[i] = -ci
        c = np.zeros(nv)
        c[q] = 1.0
        res = solve_lp(c, A_ub=rows, b_ub=rhs,
                       lower=np.concatenate([np.full(q, -R), [-np.inf]]),
                       upper=np.concatenate([np.full(q, R), [np.inf]]))
        if res.status != OPTIMAL:  # pragma: no cover
            raise LPError("cutting-plane master LP failed")
        t_new, bound = res.x[:q], res.x[q]
        if np.max(np.abs(t_new)) > R - 1e-6 and R < 2 ** 24:
            R *= 4.0
            t = t_new
            continue
        if best_v - bound <= OBJ_TOL * max(1.0, abs(best_v)):
            break
        t = t_new
    return best_v, best_t


def _sup_es_oracle(par: _Param, space, spec: RiskSpec):
    """Value/subgradient oracle for lses / adjusted-ES objectives."""
    p = space.probs

    def oracle(t):
        X = RandVar(space, par.x0 + par.C @ t)
        if spec.family == "lses":
            bd = lses_mod.evaluate(X, spec.b)
            alpha, value = bd.alpha_star, bd.value
        else:
            value, alpha = adjusted_es_argmax(X, spec.profile)
        z = _tail_density(X, alpha)
        grad = -par.C.T @ (p * z)
        return value, grad

    return oracle


def rho_nu(spec: RiskSpec, m: Market, nu: float):
    """(rho_nu, minimiser): minimal risk over portfolios with E[X_pi] = nu.

    Returns (-inf, direction) when the slice problem is certified unbounded,
    which cannot happen for the built-in expectation-bounded families.
    """
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    par = _slice_param(m, nu)
    p = m.space.probs
    fam = spec.family
    if par.C.shape[1] == 0:
        pi = par.to_portfolio(np.zeros(0))
        return evaluate(spec, excess_return(m, pi)), pi
    if fam == "var":
        raise ValueError("value-at-risk slice minimisation is not supported")
    if fam == "eloss":
        return -nu, par.to_portfolio(np.zeros(par.C.shape[1]))
    if fam == "es":
        res, t = _es_min(par, p, spec.alpha)
    elif fam == "wc":
        res, t = _wc_min(par, p)
    elif fam in ("ew", "sr", "oce"):
        loss = spec.loss
        if fam == "sr" and loss.zero_on_negatives:
            res, t = _wc_min(par, p)
        elif loss.kind == "pwl":
            res, t = _pwl_family_min(par, p, spec)
        elif loss.kind == "exp":
            if fam == "ew":
                v, t = _ew_exp_min(par, p)
            else:
                v, t = _entropic_min(par, p)
            return v, par.to_portfolio(t)
        else:
            raise ValueError(f"{fam} slice minimisation unsupported for "
                             f"{loss.kind} losses")
    elif fam in ("lses", "adjes"):
        profile = spec.profile
        analytic = (fam == "lses") or all(pc.kind != "general"
                                          for pc in profile.pieces)
        # the joint epigraph LP grows as 2^n levels; cutting planes take
        # over once the dense tableau would dominate the solve
        use_lp = analytic and m.space.n <= 4
        if use_lp:
            levels = _candidate_levels(p, profile if fam == "adjes" else None)
            use_lp = len(levels) <= MAX_CANDIDATE_LEVELS
        if use_lp:
            if fam == "lses":
                pens = [spec.b * (1.0 / a - 1.0) for a in levels]
            else:
                pens = [float(profile.value(a)) for a in levels]
            keep = [(a, w) for a, w in zip(levels, pens) if math.isfinite(w)]
            res, t = _sup_es_min_lp(par, p, [a for a, _ in keep],
                                    [w for _, w in keep])
        else:
            v, t = _kelley_min(_sup_es_oracle(par, m.space, spec),
                               par.C.shape[1])
            return v, par.to_portfolio(t)
    else:  # pragma: no cover
        raise ValueError(f"unsupported family {fam!r}")

    if res.status == UNBOUNDED:
        direction = _descent_direction(spec, m, par)
        return -math.inf, direction
    if res.status != OPTIMAL:
        raise LPError(f"slice LP ended with status {res.status}")
    return float(res.value), par.to_portfolio(t)


def _descent_direction(spec: RiskSpec, m: Market, par: _Param):
    """A null direction along which the recession risk is negative, if any."""
    value, pi = recession_ball_min(spec, m)
    return pi if value < -SIGN_TOL else None


# ---------------------------------------------------------------------------
# Recession frontier (linear programs over the closed dual polytopes)
# ---------------------------------------------------------------------------

def _recession_descriptor(spec: RiskSpec):
    fam = spec.family
    if fam == "es":
        return ("es", spec.alpha)
    if fam in ("wc", "lses"):
        return ("wc",)
    if fam == "eloss":
        return ("eloss",)
    if fam == "adjes":
        beta = spec.profile.beta
        return ("es", beta) if beta > 0 else ("wc",)
    if fam == "oce":
        a, b = spec.loss.a_l, spec.loss.b_l
        if a == 0.0 and b == math.inf:
            return ("wc",)
        return ("dualbox", a, b)
    if fam == "sr":
        loss = spec.loss
        if loss.zero_on_negatives or loss.a_l == 0.0 or loss.b_l == math.inf:
            return ("wc",)
        return ("scaled", loss.a_l, loss.b_l)
    raise ValueError(f"no recession frontier for family {fam!r}")


def _dualbox_min(par: _Param, p: np.ndarray, a: float, b: float,
                 scaled: bool):
    """min over theta of max{E[-ZX] : Z in the box/scaled-box density set}.

    The inner maximisation is dualised, so the joint problem is one LP in
    (theta, mu, y1, y2).
    """
    n, q = par.C.shape
    has_up = b != math.inf
    has_lo = a > 0.0
    n_y1 = n if has_up else 0
    n_y2 = n if has_lo else 0
    nv = q + 1 + n_y1 + n_y2
    c = np.zeros(nv)
    c[q] = 1.0
    if not scaled:
        if has_up:
            c[q + 1:q + 1 + n_y1] = b
        if has_lo:
            c[q + 1 + n_y1:] = -a
    rows, rhs = [], []
    for i in range(n):
        row = np.zeros(nv)
        row[:q] = -p[i] * par.C[i]
        row[q] = -p[i]
        if has_up:
            row[q + 1 + i] = -1.0
        if has_lo:
            row[q + 1 + n_y1 + i] = 1.0
        rows.append(row)
        rhs.append(p[i] * par.x0[i])       # mu p_i + y1_i - y2_i >= c_i(theta)
    if scaled:
        row = np.zeros(nv)
        if has_up:
            row[q + 1:q + 1 + n_y1] = b
        if has_lo:
            row[q + 1 + n_y1:] = -a
        rows.append(row)
        rhs.append(0.0)                    # -b sum y1 + a sum y2 >= 0
    A_ub = np.vstack([np.array(rows),
                      np.hstack([par.A_ub, np.zeros((par.A_ub.shape[0],
                                                     nv - q))])])
    b_ub = np.concatenate([np.array(rhs), par.b_ub])
    lower = np.concatenate([par.lower, [-np.inf], np.zeros(n_y1 + n_y2)])
    upper = np.concatenate([par.upper, np.full(1 + n_y1 + n_y2, np.inf)])
    res = solve_lp(c, A_ub=A_ub, b_ub=b_ub, lower=lower, upper=upper)
    return res, (res.x[:q] if res.status == OPTIMAL else None)


def _recession_min(spec: RiskSpec, m: Market, par: _Param):
    p = m.space.probs
    desc = _recession_descriptor(spec)
    if desc[0] == "es":
        res, t = _es_min(par, p, desc[1])
    elif desc[0] == "wc":
        res, t = _wc_min(par, p)
    elif desc[0] == "eloss":
        # min E[-X(theta)] is linear
        c0 = -float(p @ par.x0)
        ct = -(p @ par.C)
        res = solve_lp(ct, A_ub=par.A_ub, b_ub=par.b_ub,
                       lower=par.lower, upper=par.upper)
        if res.status == OPTIMAL:
            return float(res.value) + c0, par.to_portfolio(res.x)
        return -math.inf, None
    elif desc[0] == "dualbox":
        res, t = _dualbox_min(par, p, desc[1], desc[2], scaled=False)
    else:
        res, t = _dualbox_min(par, p, desc[1], desc[2], scaled=True)
    if res.status == UNBOUNDED:
        return -math.inf, None
    if res.status != OPTIMAL:
        raise LPError(f"recession LP ended with status {res.status}")
    return float(res.value), par.to_portfolio(t)


def rho_inf_nu(spec: RiskSpec, m: Market, nu: float) -> float:
    """Recession-boundary value: min of the recession risk over the slice."""
    value, _ = _recession_min(spec, m, _slice_param(m, nu))
    return value


def recession_ball_min(spec: RiskSpec, m: Market):
    """(min, argmin) of the recession risk over the l1 ball of portfolios."""
    value, pi = _recession_min(spec, m, _ball_param(m))
    return value, pi


# ---------------------------------------------------------------------------
# Boundary sweep and efficient frontier
# ---------------------------------------------------------------------------

REGIME_POSITIVE = "POSITIVE"
REGIME_ZERO = "ZERO"
REGIME_NEGATIVE = "NEGATIVE"
REGIME_INFINITE = "INFINITE"


@dataclass
class FrontierResult:
    nu_grid: np.ndarray
    rho_values: np.ndarray
    optimal_portfolios: list
    nu_min: float
    rho_min: float
    rho_inf_1: float
    regime: str
    errors: list = field(default_factory=list)

    def rho_inf_values(self) -> np.ndarray:
        return self.nu_grid * self.rho_inf_1


def optimal_boundary(spec: RiskSpec, m: Market, nu_max: float,
                     steps: int, jobs: int = 1) -> FrontierResult:
    """Sweep rho_nu over a uniform grid and classify the regime.

    In convex families the boundary minimiser is refined by golden section
    between the neighbouring grid nodes of the argmin; otherwise the grid
    argmin stands (irregular boundaries are legal for star-shaped measures).
    """
    if nu_max <= 0 or steps < 2:
        raise ValueError("need nu_max > 0 and steps >= 2")
    grid = np.linspace(0.0, nu_max, steps)
    errors: list[str] = []

    def solve_point(nu):
        try:
            return rho_nu(spec, m, float(nu))
        except LPError as exc:           # recorded, not fatal
            errors.append(f"nu={nu:g}: {exc}")
            return math.nan, None

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(solve_point, grid))
    else:
        results = [solve_point(nu) for nu in grid]
    values = np.array([v for v, _ in results])
    portfolios = [piv for _, piv in results]

    rho_inf_1 = rho_inf_nu(spec, m, 1.0)
    if rho_inf_1 == math.inf:
        regime = REGIME_INFINITE
    elif rho_inf_1 > SIGN_TOL:
        regime = REGIME_POSITIVE
    elif rho_inf_1 < -SIGN_TOL:
        regime = REGIME_NEGATIVE
    else:
        regime = REGIME_ZERO

    k = int(np.nanargmin(values))
    nu_min, rho_min = float(grid[k]), float(values[k])
    if spec.convex and regime == REGIME_POSITIVE and 0 < k < steps - 1:
        lo, hi = float(grid[k - 1]), float(grid[k + 1])
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        a, b = lo, hi
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        fc = rho_nu(spec, m, c)[0]
        fd = rho_nu(spec, m, d)[0]
        for _ in range(60):
            if b - a < 1e-9 * max(1.0, nu_max):
                break
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - invphi * (b - a)
                fc = rho_nu(spec, m, c)[0]
            else:
                a, c, fc = c, d, fd
                d = a + invphi * (b - a)
                fd = rho_nu(spec, m, d)[0]
        nu_ref = 0.5 * (a + b)
        rho_ref = rho_nu(spec, m, nu_ref)[0]
        if rho_ref <= rho_min:
            nu_min, rho_min = nu_ref, rho_ref
    if regime == REGIME_NEGATIVE:
        nu_min, rho_min = math.inf, -math.inf
    elif regime == REGIME_ZERO and np.all(np.diff(values) < 0):
        nu_min = math.inf               # nonincreasing boundary, no minimiser
    return FrontierResult(grid, values, portfolios, nu_min, rho_min,
                          rho_inf_1, regime, errors)


@dataclass
class EfficientFrontier:
    empty: bool
    nu_values: np.ndarray
    rho_values: np.ndarray
    portfolios: list


def efficient_frontier(spec: RiskSpec, m: Market,
                       fr: FrontierResult) -> EfficientFrontier:
    """The efficient part of a convex boundary; empty under rho-arbitrage."""
    if not spec.convex:
        raise ValueError("the efficient-frontier rule needs a convex family")
    if fr.rho_inf_1 <= SIGN_TOL:
        return EfficientFrontier(True, np.zeros(0), np.zeros(0), [])
    mask = (fr.nu_grid >= fr.nu_min - 1e-12) & np.isfinite(fr.rho_values)
    return EfficientFrontier(False, fr.nu_grid[mask], fr.rho_values[mask],
                             [pi for pi, keep in zip(fr.optimal_portfolios, mask)
                              if keep])


def recession_efficient_frontier(rho_inf_1: float):
    """Three-case efficient frontier of the recession measure itself.

    Returns ("empty",), ("ray", slope) with the frontier {(nu*slope, nu)},
    or ("origin",) when every nonzero portfolio has infinite recession risk.
    """
    if rho_inf_1 == math.inf:
        return ("origin",)
    if rho_inf_1 <= 0.0:
        return ("empty",)
    return ("ray", rho_inf_1)


# ---------------------------------------------------------------------------
# Arbitrage detectors
# ---------------------------------------------------------------------------

@dataclass
class ArbitrageReport:
    classical: ArbitrageWitness | None
    rho_arbitrage: bool
    strong_rho_arbitrage: bool
    strong_recession_arbitrage: bool
    rho_inf_1: float
    ball_min: float
    interior_witness: Density | None
    closure_witness: Density | None
    descent_ray: np.ndarray | None
    errors: list = field(default_factory=list)


def detect_arbitrage(spec: RiskSpec, m: Market) -> ArbitrageReport:
    """Classical, rho- and strong-rho-arbitrage with primal/dual cross checks.

    rho-arbitrage: dual test = emptiness of the strict-interior dual set
    intersected with the equivalent martingale densities; primal test = sign
    of the recession boundary at unit return.  Strong rho-arbitrage: dual
    test = emptiness of the closed (lsc convex hull) dual set intersected
    with the absolutely continuous martingale densities; the primal descent
    ray over the l1 ball certifies the recession-measure variant, which can
    be strictly weaker for adjusted-ES profiles unbounded near beta.
    Disagreements beyond tolerance are recorded as internal errors.
    """
    errors: list[str] = []
    classical = check_classical_arbitrage(m)

    interior = interior_martingale_feasibility(m, dual_set(spec))
    rho_arb = interior is None
    rho_inf_1 = rho_inf_nu(spec, m, 1.0)
    if interior is not None and rho_inf_1 < -SIGN_TOL:
        errors.append("dual interior witness exists but rho_inf_1 < 0")
    if interior is None and rho_inf_1 > SIGN_TOL:
        errors.append("no dual interior witness but rho_inf_1 > 0")

    closure_w = martingale_feasibility(m, closure_dual_set(spec))
    strong = closure_w is None
    ball_min, ball_pi = recession_ball_min(spec, m)
    strong_inf = ball_min < -SIGN_TOL
    ray = ball_pi if strong_inf else None
    if strong_inf and not strong:
        errors.append("descent ray found but the closure dual set meets M")
    if strong and not rho_arb:
        errors.append("strong rho-arbitrage without rho-arbitrage")
    if classical is not None and not rho_arb:
        errors.append("classical arbitrage without rho-arbitrage")

    return ArbitrageReport(classical, rho_arb, strong, strong_inf,
                           rho_inf_1, ball_min, interior, closure_w, ray,
                           errors)


# ---------------------------------------------------------------------------
# The two mean-risk problems
# ---------------------------------------------------------------------------

@dataclass
class MeanRiskSolution:
    status: str                      # optimal | unbounded | infeasible
    value: float | None = None       # optimal risk (min-risk) or return
    portfolio: np.ndarray | None = None
    nu: float | None = None
    cause: str | None = None


def mean_rho_solve(spec: RiskSpec, m: Market, mode: str,
                   level: float) -> MeanRiskSolution:
    """MIN_RISK(nu*): least risk with expected excess return >= nu*.
    MAX_RETURN(rho*): largest expected excess return with risk <= rho*.

    Both are declared unbounded when the market admits rho-arbitrage for the
    family (negative or zero recession boundary slope).
    """
    if level < 0:
        raise ValueError("the target level must be nonnegative")
    rho_inf_1 = rho_inf_nu(spec, m, 1.0)
    if mode == "MIN_RISK":
        if rho_inf_1 < -SIGN_TOL:
            return MeanRiskSolution("unbounded",
                                    cause="negative recession slope")
        # golden over nu >= nu* of the convex map nu -> rho_nu
        lo = level
        hi = max(level + 1.0, 2.0 * level)
        f_lo = rho_nu(spec, m, lo)[0]
        for _ in range(80):
            if rho_nu(spec, m, hi)[0] > f_lo or hi > 1e12:
                break
            hi *= 2.0
        if hi > 1e12:
            return MeanRiskSolution("unbounded",
                                    cause="risk keeps decreasing with return")
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        a, b = lo, hi
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        fc = rho_nu(spec, m, c)[0]
        fd = rho_nu(spec, m, d)[0]
        for _ in range(200):
            if b - a < 1e-9 * max(1.0, hi):
                break
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - invphi * (b - a)
                fc = rho_nu(spec, m, c)[0]
            else:
                a, c, fc = c, d, fd
                d = a + invphi * (b - a)
                fd = rho_nu(spec, m, d)[0]
        candidates = [lo, 0.5 * (a + b)]
        best_nu = min(candidates, key=lambda x: rho_nu(spec, m, x)[0])
        value, pi = rho_nu(spec, m, best_nu)
        return MeanRiskSolution("optimal", value, pi, best_nu)
    if mode == "MAX_RETURN":
        if rho_inf_1 <= SIGN_TOL:
            return MeanRiskSolution(
                "unbounded", cause="rho-arbitrage: nonpositive recession slope")
        fr_probe = rho_nu(spec, m, 0.0)[0]
        rho_min_proxy = min(0.0, fr_probe)
        if level < rho_min_proxy - 1e-12:
            return MeanRiskSolution("infeasible",
                                    cause="risk budget below minimal risk")
        # rho_nu -> inf as nu -> inf, so bisect the increasing branch
        hi = 1.0
        for _ in range(200):
            if rho_nu(spec, m, hi)[0] > level:
                break
            hi *= 2.0
        lo = 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if rho_nu(spec, m, mid)[0] <= level:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-10 * max(1.0, hi):
                break
        value, pi = rho_nu(spec, m, lo)
        return MeanRiskSolution("optimal", lo, pi, lo)
    raise ValueError(f"unknown mode {mode!r}")
