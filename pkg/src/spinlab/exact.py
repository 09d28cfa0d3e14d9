"""Exact finite-N law of the magnetization.

For the p-spin Curie-Weiss model the Gibbs weight depends on a configuration
only through S = sum of spins, so the law of xbar = S/N lives on the N+1
atoms m_k = (2k - N)/N with weight binom(N, k) exp(N(beta m^p + h m)).
Everything here is kept in log space; exponents reach O(N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from .errors import DegenerateCurvatureError, DomainError, SizeError
from .landscape import CRITICAL, Landscape
from .model import ModelParams, ipow

BRUTE_FORCE_MAX_N = 20


def logsumexp(a) -> float:
    """log(sum(exp(a))) with one max shift; numpy's pairwise summation does the rest."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return -math.inf
    amax = float(np.max(a))
    if not math.isfinite(amax):
        return amax
    return amax + math.log(float(np.sum(np.exp(a - amax))))


@dataclass(frozen=True, eq=False)
class MagnetizationLaw:
    """Exact log-probability table of xbar over the lattice {-1, -1+2/N, ..., 1}.

    Atoms are indexed by k = N(1+m)/2 in 0..N, so S = 2k - N.
    """

    params: ModelParams
    log_weights: np.ndarray
    shift: float
    log_scaled_sum: float

    @property
    def log_norm(self) -> float:
        """log of the partition sum, shift + log sum exp(lw - shift)."""
        return self.shift + self.log_scaled_sum

    @property
    def N(self) -> int:
        return self.params.N

    @property
    def k(self) -> np.ndarray:
        return np.arange(self.N + 1)

    @property
    def S(self) -> np.ndarray:
        return 2 * self.k - self.N

    @property
    def support(self) -> np.ndarray:
        return self.S / self.N

    @property
    def log_probs(self) -> np.ndarray:
        # subtracting shift and the O(1) log-sum separately keeps the
        # normalization free of the rounding of a large log_norm
        return (self.log_weights - self.shift) - self.log_scaled_sum

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs)

    def mask(self, condition: Optional[Tuple[float, float]]) -> np.ndarray:
        """Atoms of xbar lying in the half-open interval [lo, hi)."""
        if condition is None:
            return np.ones(self.N + 1, dtype=bool)
        lo, hi = condition
        m = self.support
        return (m >= lo) & (m < hi)

    def conditional_log_probs(self, condition: Optional[Tuple[float, float]]):
        """(mask, log-probabilities renormalized over the atoms in ``condition``)."""
        sel = self.mask(condition)
        if not sel.any():
            raise DomainError(f"conditioning event {condition} has no atoms")
        lw = self.log_weights[sel]
        shift = float(np.max(lw))
        return sel, (lw - shift) - logsumexp(lw - shift)

    def mean(self) -> float:
        return float(np.sum(self.probs * self.support))


def _check_condition(condition):
    if condition is None:
        return None
    lo, hi = condition
    if not lo < hi:
        raise DomainError(f"empty conditioning interval {condition}")
    return float(lo), float(hi)


def build_law(params: ModelParams) -> MagnetizationLaw:
    """Exact law of xbar via log-gamma binomials; deterministic."""
    N = params.require_N()
    k = np.arange(N + 1)
    m = (2 * k - N) / N
    log_binom = gammaln(N + 1.0) - gammaln(k + 1.0) - gammaln(N - k + 1.0)
    # binom(N,0) = binom(N,N) = 1 exactly
    log_binom[0] = log_binom[-1] = 0.0
    lw = log_binom + N * (params.beta * ipow(m, params.p) + params.h * m)
    return _freeze(params, lw)


def _freeze(params: ModelParams, lw: np.ndarray) -> MagnetizationLaw:
    lw.flags.writeable = False
    shift = float(np.max(lw))
    return MagnetizationLaw(params, lw, shift, logsumexp(lw - shift))


def brute_force_pmf(params: ModelParams) -> MagnetizationLaw:
    """Law of xbar by enumerating all 2^N spin configurations (N <= 20).

    Each configuration is weighted by exp(beta N^(1-p) S^p + h S), using
    sum_{i_1..i_p} X_{i_1}...X_{i_p} = S^p, and accumulated per S.
    """
    N = params.require_N()
    if N > BRUTE_FORCE_MAX_N:
        raise SizeError(f"brute force enumeration limited to N <= {BRUTE_FORCE_MAX_N}, got {N}")
    configs = np.arange(2**N, dtype=np.int64)
    n_up = np.zeros(2**N, dtype=np.int64)
    for bit in range(N):
        n_up += (configs >> bit) & 1
    S = 2 * n_up - N
    energy = params.beta * float(N) ** (1 - params.p) * S.astype(float) ** params.p + params.h * S
    shift = float(np.max(energy))
    acc = np.bincount(n_up, weights=np.exp(energy - shift), minlength=N + 1)
    with np.errstate(divide="ignore"):
        lw = np.log(acc) + shift
    return _freeze(params, lw)


@dataclass(frozen=True)
class TailQuery:
    """Event (-1)^sign (S - N center) / alpha_N > x, optionally given xbar in A.

    alpha_N = spread * N**scale_exponent; for Gaussian regimes spread is the
    limiting standard deviation sqrt(-1/H''(m)).
    """

    center: float
    scale_exponent: float = 0.5
    sign: int = 0
    x: float = 0.0
    condition: Optional[Tuple[float, float]] = None
    spread: float = 1.0

    def __post_init__(self):
        if self.sign not in (0, 1):
            raise DomainError("sign must be 0 or 1")
        if not self.x >= 0:
            raise DomainError("tail threshold x must be nonnegative")
        if self.scale_exponent not in (0.5, 0.75):
            raise DomainError("scale_exponent must be 1/2 or 3/4")
        cond = _check_condition(self.condition)
        if cond is not None and not cond[0] < self.center < cond[1]:
            raise DomainError("center must lie inside the conditioning interval")

    def alpha(self, N: int) -> float:
        return self.spread * N**self.scale_exponent


def standardized_values(law: MagnetizationLaw, center: float, alpha: float) -> np.ndarray:
    """(S - N center) / alpha for every atom."""
    return (law.S - law.N * center) / alpha


def log_tail_prob(law: MagnetizationLaw, q: TailQuery) -> float:
    sel, lp = law.conditional_log_probs(q.condition)
    w = standardized_values(law, q.center, q.alpha(law.N))[sel]
    if q.sign:
        w = -w
    return logsumexp(lp[w > q.x])


def tail_prob(law: MagnetizationLaw, q: TailQuery) -> float:
    """Exact P((-1)^r (S - N center)/alpha_N > x [| xbar in A])."""
    return math.exp(log_tail_prob(law, q))


def mixture_weights(landscape: Landscape) -> np.ndarray:
    """Limiting masses p_k ~ [(m_k^2 - 1) H''(m_k)]^(-1/2) at a critical point."""
    if landscape.classification != CRITICAL:
        raise DomainError("mixture weights need a critical point")
    raw = []
    for mx in landscape.global_maximizers:
        if abs(mx.second_deriv) <= landscape.tol_curv:
            raise DegenerateCurvatureError(f"H''({mx.m}) = {mx.second_deriv} is too close to zero")
        raw.append(((mx.m * mx.m - 1.0) * mx.second_deriv) ** -0.5)
    raw = np.array(raw)
    return raw / math.fsum(raw)


def kolmogorov_distance(
    law: MagnetizationLaw,
    center: float,
    alpha: float,
    target,
    condition: Optional[Tuple[float, float]] = None,
) -> float:
    """sup_x |P(W <= x [| A]) - G(x)| for W = (S - N center)/alpha.

    The supremum is exact: F_N is a step function, so it is attained at an
    atom either from the right (F(w) vs G(w)) or from the left
    (F(w-) vs G(w-)).  ``target`` needs ``cdf``; a discontinuous target may
    also provide ``cdf_left``.
    """
    sel, lp = law.conditional_log_probs(_check_condition(condition))
    w = standardized_values(law, center, alpha)[sel]
    return kolmogorov_points(w, np.exp(lp), target)


def kolmogorov_points(values, probs, target, extra_mass: float = 0.0) -> float:
    """Exact sup_x |F(x) - G(x)| for the discrete law sum_j probs[j] delta(values[j]).

    Tied values are merged.  ``extra_mass`` is mass sitting at +inf (it only
    lowers F everywhere on the real line).
    """
    w, inv = np.unique(np.asarray(values, dtype=float), return_inverse=True)
    p = np.bincount(inv.ravel(), weights=np.asarray(probs, dtype=float).ravel(), minlength=w.size)
    F = np.cumsum(p)
    F_left = np.concatenate(([0.0], F[:-1]))
    G = np.asarray(target.cdf(w), dtype=float)
    G_left = np.asarray(target.cdf_left(w), dtype=float) if hasattr(target, "cdf_left") else G
    d = max(np.max(np.abs(F - G)), np.max(np.abs(F_left - G_left)))
    if extra_mass:
        # beyond the last atom F stays at 1 - extra_mass while G -> 1
        d = max(d, extra_mass)
    return float(d)


def standardized_moments(
    law: MagnetizationLaw,
    center: float,
    alpha: float,
    orders: Sequence[int] = (1, 2, 3, 4, 5, 6),
    condition: Optional[Tuple[float, float]] = None,
) -> list:
    """Exact E[W^s] for W = (S - N center)/alpha, s in ``orders`` (<= 6)."""
    sel, lp = law.conditional_log_probs(_check_condition(condition))
    w = standardized_values(law, center, alpha)[sel]
    p = np.exp(lp)
    out = []
    for s in orders:
        if not 0 <= s <= 6:
            raise DomainError("moment orders are limited to 0..6")
        out.append(float(np.sum(p * w**s)))
    return out
