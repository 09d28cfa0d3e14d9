"""Stationary points, global maximizers and the phase diagram of H.

Stationary points are located in the variable u = artanh(x): H'(tanh u) = 0
is equivalent to ``F(u) = beta p tanh(u)^(p-1) + h - u = 0``, and every root
satisfies |u| <= beta p + |h|, so a bounded u-grid brackets all of them no
matter how close to +-1 the magnetization sits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import SolverError
from .model import H_eval, ModelParams, free_energy, free_energy_prime, ipow

GRID_INTERVALS = 4096
DEDUP_RADIUS = 1e-8
STATIONARY_TOL = 1e-12

REGULAR = "regular"
CRITICAL = "critical"
SPECIAL = "special"


@dataclass(frozen=True)
class Maximizer:
    m: float
    H_value: float
    second_deriv: float
    fourth_deriv: float


@dataclass(frozen=True)
class Landscape:
    params: ModelParams
    stationary: Tuple[float, ...]
    global_maximizers: Tuple[Maximizer, ...]
    classification: str
    height_gap: float
    curvature: float
    tol_height: float = 1e-9
    tol_curv: float = 1e-7

    @property
    def K(self) -> int:
        return len(self.global_maximizers)

    @property
    def maximizer_locations(self) -> List[float]:
        return [mx.m for mx in self.global_maximizers]

    @property
    def top(self) -> Maximizer:
        return max(self.global_maximizers, key=lambda mx: mx.H_value)

    def neighborhood(self, k: int = 0) -> Tuple[float, float]:
        """Conditioning interval [lo, hi) for the k-th maximizer.

        Bounded by midpoints between adjacent global maximizers, with
        -inf/+inf at the extremes.
        """
        ms = self.maximizer_locations
        lo = -math.inf if k == 0 else 0.5 * (ms[k - 1] + ms[k])
        hi = math.inf if k == len(ms) - 1 else 0.5 * (ms[k] + ms[k + 1])
        return lo, hi

    def to_dict(self) -> dict:
        return {
            "beta": self.params.beta,
            "h": self.params.h,
            "p": self.params.p,
            "classification": self.classification,
            "K": self.K,
            "stationary": list(self.stationary),
            "global_maximizers": [
                {
                    "m": mx.m,
                    "H": mx.H_value,
                    "H2": mx.second_deriv,
                    "H4": mx.fourth_deriv,
                }
                for mx in self.global_maximizers
            ],
            "margins": {"height_gap": self.height_gap, "curvature": self.curvature},
        }


@dataclass(frozen=True)
class SpecialPoint:
    p: int
    beta: float
    h: float
    m_star: float
    fourth_deriv: float
    residuals: Tuple[float, float, float] = field(default=(0.0, 0.0, 0.0))

    @property
    def in_theta(self) -> bool:
        """Whether the point lies in the positive quadrant beta, h > 0."""
        return self.beta > 0 and self.h > 0

    def params(self, N: Optional[int] = None) -> ModelParams:
        return ModelParams(self.beta, self.h, self.p, N)


@dataclass(frozen=True)
class CurvePoint:
    beta: float
    h: float
    m_low: float
    m_high: float
    present: bool = True


def _F(params: ModelParams, u):
    return params.beta * params.p * ipow(np.tanh(u), params.p - 1) + params.h - u


def _F_prime(params: ModelParams, u: float) -> float:
    t = math.tanh(u)
    return params.beta * params.p * (params.p - 1) * ipow(t, params.p - 2) * (1 - t * t) - 1.0


def _u_bound(params: ModelParams) -> float:
    return params.beta * params.p + abs(params.h) + 1.0


def _polish(params: ModelParams, u: float) -> float:
    best_u, best_r = u, abs(_F(params, u))
    for _ in range(8):
        d = _F_prime(params, best_u)
        if d == 0 or not math.isfinite(d):
            break
        cand = best_u - _F(params, best_u) / d
        r = abs(_F(params, cand))
        if r >= best_r:
            break
        best_u, best_r = cand, r
    return best_u


def find_stationary(params: ModelParams, intervals: int = GRID_INTERVALS) -> List[float]:
    """All roots of H' in (-1, 1), ascending.

    Sign changes on a grid of ``intervals`` cells are refined by bracketing
    root finding plus Newton polish and deduplicated within 1e-8.  Clusters
    produced by round-off around a degenerate (e.g. triple) root are merged.
    """
    U = _u_bound(params)
    u = np.linspace(-U, U, intervals + 1)
    f = _F(params, u)
    roots = []
    for j in range(intervals):
        a, b = f[j], f[j + 1]
        if a == 0.0:
            roots.append(u[j])
        elif a * b < 0:
            r = brentq(lambda s: _F(params, s), u[j], u[j + 1], xtol=1e-15, rtol=1e-15, maxiter=200)
            roots.append(_polish(params, r))
    if f[-1] == 0.0:
        roots.append(u[-1])
    xs = sorted(math.tanh(r) for r in roots)
    out: List[float] = []
    for x in xs:
        if out and abs(x - out[-1]) <= DEDUP_RADIUS:
            continue
        if out and abs(x - out[-1]) < 1e-4 and _flat_between(params, out[-1], x):
            # keep whichever has the smaller residual
            if abs(free_energy_prime(params, x)) < abs(free_energy_prime(params, out[-1])):
                out[-1] = x
            continue
        out.append(x)
    return out


def _flat_between(params: ModelParams, a: float, b: float) -> bool:
    mids = np.linspace(a, b, 5)
    return bool(np.all(np.abs(free_energy_prime(params, mids)) <= 1e-10))


def classify_point(params: ModelParams, tol_height: float = 1e-9, tol_curv: float = 1e-7) -> Landscape:
    """Classify (beta, h) as regular, critical or special.

    Global maximizers are stationary points whose H value lies within
    ``tol_height * max(1, |H_max|)`` of the top value; points with
    H'' > tol_curv are minima and never count.
    """
    stationary = find_stationary(params)
    bundles = [H_eval(params, m, 4) for m in stationary]
    candidates = [b for b in bundles if b[2] <= tol_curv]
    if not candidates:  # pragma: no cover - H' -> -+inf at +-1 guarantees a max
        raise SolverError("no local maximizer found")
    top_value = max(b[0] for b in candidates)
    thresh = tol_height * max(1.0, abs(top_value))
    chosen = [b for b in candidates if top_value - b[0] <= thresh]
    maximizers = tuple(Maximizer(b.point, b[0], b[2], b[4]) for b in sorted(chosen, key=lambda b: b.point))
    others = [b[0] for b in bundles if b not in chosen]
    height_gap = top_value - max(others) if others else math.inf
    top = max(maximizers, key=lambda mx: mx.H_value)
    curvature = abs(top.second_deriv)
    if len(maximizers) >= 2:
        cls = CRITICAL
    elif curvature <= tol_curv:
        cls = SPECIAL
        top = _polish_special(params, top)
        maximizers = (top,)
        stationary = [top.m if abs(s - top.m) < 1e-4 else s for s in stationary]
    else:
        cls = REGULAR
    return Landscape(
        params=params,
        stationary=tuple(stationary),
        global_maximizers=maximizers,
        classification=cls,
        height_gap=height_gap,
        curvature=curvature,
        tol_height=tol_height,
        tol_curv=tol_curv,
    )


def _polish_special(params: ModelParams, mx: Maximizer) -> Maximizer:
    """Newton on H''' near a degenerate maximizer; keeps the result only if H' does not get worse."""
    m = mx.m
    for _ in range(20):
        b = H_eval(params, m, 5)
        if b[4] == 0:
            break
        step = b[3] / b[4]
        m_new = m - step
        if not abs(m_new) < 1 or abs(step) > 1e-3:
            break
        m = m_new
        if abs(step) <= 1e-16:
            break
    b_old = H_eval(params, mx.m, 1)
    b = H_eval(params, m, 4)
    if abs(b[1]) > max(abs(b_old[1]), 1e-12):
        return mx
    return Maximizer(b.point, b[0], b[2], b[4])


def _special_residuals(p: int, beta: float, h: float, m: float):
    b = H_eval(ModelParams(beta, h, p), m, 4)
    return np.array([b[1], b[2], b[3]]), b


def _seed(p: int, m: float):
    beta = 1.0 / (p * (p - 1) * ipow(m, p - 2) * (1 - m * m))
    h = math.atanh(m) - beta * p * ipow(m, p - 1)
    return beta, h


def _newton_special(p: int, m0: float, tol: float = 1e-13, maxiter: int = 60):
    beta, h = _seed(p, m0)
    m = m0
    if not beta > 0:
        return None
    best = None
    for _ in range(maxiter):
        try:
            res, b = _special_residuals(p, beta, h, m)
        except ValueError:
            return best
        rnorm = float(np.max(np.abs(res)))
        if best is None or rnorm < best[3]:
            best = (beta, h, m, rnorm)
        if rnorm <= tol:
            break
        J = np.array(
            [
                [p * ipow(m, p - 1), 1.0, b[2]],
                [p * (p - 1) * ipow(m, p - 2), 0.0, b[3]],
                [p * (p - 1) * (p - 2) * ipow(m, p - 3) if p >= 3 else 0.0, 0.0, b[4]],
            ]
        )
        try:
            step = np.linalg.solve(J, -res)
        except np.linalg.LinAlgError:
            return best
        lam = 1.0
        while lam > 1e-4:
            nb, nh, nm = beta + lam * step[0], h + lam * step[1], m + lam * step[2]
            if nb > 0 and abs(nm) < 1:
                break
            lam *= 0.5
        beta, h, m = nb, nh, nm
        if not (beta > 0 and abs(m) < 1):
            return best
    return best


def special_points(p: int, tol: float = 1e-10) -> List[SpecialPoint]:
    """Solve H' = H'' = H''' = 0 in (beta, h, m) by multi-start Newton.

    Seeds m in {+-0.05, ..., +-0.95}; (beta, h) at each seed zero H' and H''
    (a linear system for fixed m).  Odd p yields one point, even p a pair
    related by (beta, h, m) -> (beta, -h, -m).
    """
    if p < 3:
        raise ValueError("special points are defined for p >= 3")
    seeds = [round(0.05 * k, 2) for k in range(1, 20)]
    seeds = seeds + [-s for s in seeds]
    found: List[Tuple[float, float, float, float]] = []
    best_res = math.inf
    for s in seeds:
        sol = _newton_special(p, s)
        if sol is None:
            continue
        beta, h, m, r = sol
        best_res = min(best_res, r)
        if r > tol or not beta > 0:
            continue
        if any(abs(m - f[2]) < 1e-8 and abs(h - f[1]) < 1e-8 for f in found):
            continue
        found.append(sol)
    if not found:
        raise SolverError(f"special-point Newton failed for p={p}", best_residual=best_res)
    out = []
    for beta, h, m, _ in sorted(found, key=lambda f: f[2]):
        res, b = _special_residuals(p, beta, h, m)
        out.append(SpecialPoint(p, float(beta), float(h), float(m), float(b[4]), tuple(float(v) for v in res)))
    return out


def _concave_branches(params: ModelParams, intervals: int = GRID_INTERVALS):
    """Maximal sub-intervals of (-1, 1) on which H'' < 0, as (c, d) pairs."""
    eps = 1e-12
    xs = np.linspace(-1 + eps, 1 - eps, intervals + 1)
    b, p = params.beta, params.p
    h2 = lambda x: b * p * (p - 1) * ipow(x, p - 2) - 1.0 / (1 - x * x)
    vals = h2(xs)
    edges = [-1.0]
    for j in range(intervals):
        if vals[j] * vals[j + 1] < 0:
            edges.append(brentq(h2, xs[j], xs[j + 1], xtol=1e-15))
    edges.append(1.0)
    branches = []
    for c, d in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (c + d)
        if h2(mid) < 0:
            branches.append((c, d))
    return branches


def _branch_max(params: ModelParams, c: float, d: float) -> Optional[float]:
    U = _u_bound(params)
    lo = max(c, math.tanh(-U)) if c > -1 else math.tanh(-U)
    hi = min(d, math.tanh(U)) if d < 1 else math.tanh(U)
    flo, fhi = free_energy_prime(params, lo), free_energy_prime(params, hi)
    if not (flo > 0 > fhi):
        return None
    return brentq(lambda x: free_energy_prime(params, x), lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)


def _g(params_beta: float, p: int, x: float) -> float:
    if x <= -1:
        return math.inf
    if x >= 1:
        return -math.inf
    return params_beta * p * ipow(x, p - 1) - math.atanh(x)


def critical_curve(p: int, beta_grid: Sequence[float]) -> List[CurvePoint]:
    """Equal-height coexistence field h(beta) along ``beta_grid``.

    For each beta the two competing local maximizers live on adjacent concave
    branches of H; the height difference is increasing in h (its h-derivative
    is m_high - m_low > 0), so it is bracketed and bisected to machine
    precision.  Points where no globally coexisting pair exists are returned
    with ``present=False``.
    """
    out = []
    for beta in beta_grid:
        out.append(_curve_point(p, float(beta)))
    return out


def _curve_point(p: int, beta: float) -> CurvePoint:
    base = ModelParams(beta, 0.0, p)
    branches = _concave_branches(base)
    cands = []
    for (c1, d1), (c2, d2) in zip(branches[:-1], branches[1:]):
        h_lo = max(-_g(beta, p, c1), -_g(beta, p, c2))
        h_hi = min(-_g(beta, p, d1), -_g(beta, p, d2))
        if not h_lo < h_hi:
            continue
        span = h_hi - h_lo
        a, b = h_lo + 1e-12 * max(1.0, span), h_hi - 1e-12 * max(1.0, span)

        def gap(h):
            prm = ModelParams(beta, h, p)
            ml, mh = _branch_max(prm, c1, d1), _branch_max(prm, c2, d2)
            if ml is None or mh is None:
                return math.nan, ml, mh
            return free_energy(prm, mh) - free_energy(prm, ml), ml, mh

        ga, gb = gap(a)[0], gap(b)[0]
        if not (ga < 0 < gb):
            continue
        h_star = brentq(lambda h: gap(h)[0], a, b, xtol=1e-16, rtol=1e-15, maxiter=300)
        _, ml, mh = gap(h_star)
        cands.append(CurvePoint(beta, h_star, ml, mh))
    valid = []
    for cp in cands:
        land = classify_point(ModelParams(beta, cp.h, p))
        if land.classification == CRITICAL:
            valid.append(cp)
    if not valid:
        return CurvePoint(beta, math.nan, math.nan, math.nan, present=False)
    return min(valid, key=lambda cp: abs(cp.h))


def sup_H_on_unit(beta: float, p: int) -> float:
    """sup over [0, 1] of H_{beta, 0, p}."""
    prm = ModelParams(beta, 0.0, p)
    vals = [0.0, beta - math.log(2.0)]
    vals += [free_energy(prm, m) for m in find_stationary(prm) if 0 < m < 1]
    return max(vals)


def beta_star(p: int, tol: float = 1e-10) -> float:
    """Consistency threshold inf{beta : sup_[0,1] H_{beta,0,p} > 0} by bisection."""
    lo, hi = 1e-6, math.log(2.0) + 1e-3
    if sup_H_on_unit(lo, p) > 0 or not sup_H_on_unit(hi, p) > 0:  # pragma: no cover
        raise SolverError("beta_star bracket invalid")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if sup_H_on_unit(mid, p) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
