"""Exchangeable pair for the conditioned magnetization and the Stein-method constants.

Given X with xbar = S/N near a maximizer m (H''(m) < 0), set
sigma^2 = -N/H''(m), T = (S - N m)/sigma, and build X' by resampling one
uniformly chosen site from its conditional law.  Everything depends on X
only through S, so all conditional expectations are evaluated atom by atom
on the exact law.

Two single-site conditionals are available:

* ``"tanh"``: P(+1) = e^z / (2 cosh z), z = beta p xbar^(p-1) + h, with xbar
  including the resampled site.  This is the form the drift algebra uses.
* ``"exact"``: the true Gibbs conditional, logistic of
  beta N^(1-p) [(S_-i + 1)^p - (S_-i - 1)^p] + 2h.

They differ at O(1/N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import expit

from .errors import DomainError, RegimeError
from .exact import MagnetizationLaw
from .model import H_eval, ModelParams, ipow

CONDITIONALS = ("tanh", "exact")


class InvalidMaximizerError(DomainError):
    """The point handed in is not a nondegenerate maximizer (H''(m) >= 0)."""


def _curvature(params: ModelParams, m: float) -> float:
    if not abs(m) < 1:
        raise DomainError(f"maximizer must lie in (-1, 1), got {m!r}")
    H2 = H_eval(params, m, 2)[2]
    if not H2 < 0:
        raise InvalidMaximizerError(f"H''({m}) = {H2} is not negative")
    return H2


def lambda_forms(params: ModelParams, m: float, N: int = 1) -> Tuple[float, float]:
    """Both closed forms of lambda:
    (1 - beta p (p-1) m^(p-2) (1 - m^2)) / N  and  H''(m) / (N (H''(m) - beta p (p-1) m^(p-2)))."""
    H2 = _curvature(params, m)
    b, p = params.beta, params.p
    c = b * p * (p - 1) * ipow(m, p - 2)
    return (1.0 - c * (1.0 - m * m)) / N, H2 / (N * (H2 - c))


def lambda_const(params: ModelParams, m: float, N: Optional[int] = None, rtol: float = 1e-12) -> float:
    """lambda for the pair at maximizer m; the two closed forms are cross-checked."""
    N = params.require_N() if N is None else N
    lam1, lam2 = lambda_forms(params, m, N)
    if abs(lam1 - lam2) > rtol * abs(lam2):
        raise DomainError(f"lambda forms disagree: {lam1!r} vs {lam2!r}")
    return lam2


def sigma(params: ModelParams, m: float, N: int) -> float:
    return math.sqrt(-N / _curvature(params, m))


def _z(params: ModelParams, xbar):
    return params.beta * params.p * ipow(xbar, params.p - 1) + params.h


def AB_factors(params: ModelParams, m: float, T, N: Optional[int] = None, sig: Optional[float] = None):
    """(A(T), B(T)) with A = e^-z / (2 cosh z), B = e^z / (2 cosh z), z = beta p (sigma T/N + m)^(p-1) + h.

    A is the tanh-form probability of resampling a +1 site to -1, B that of
    resampling a -1 site to +1.  Computed as logistic(-2z), logistic(2z).
    """
    N = params.require_N() if N is None else N
    sig = sigma(params, m, N) if sig is None else sig
    T = np.asarray(T, dtype=float)
    xbar = sig * T / N + m
    if np.any(np.abs(xbar) >= 1):
        raise DomainError("sigma T / N + m must lie in (-1, 1)")
    z = _z(params, xbar)
    A, B = expit(-2 * z), expit(2 * z)
    if T.ndim == 0:
        return float(A), float(B)
    return A, B


def exact_conditional(params: ModelParams, spins, i: int) -> float:
    """Gibbs probability that X_i = +1 given the other spins."""
    x = np.asarray(spins)
    N = x.size
    if not np.all(np.abs(x) == 1):
        raise DomainError("spins must be +-1")
    s = int(np.sum(x)) - int(x[i])
    return float(_exact_up_prob(params, N, s))


def _exact_up_prob(params: ModelParams, N: int, s_rest):
    """P(X_i = +1 | S_-i = s_rest) for the Hamiltonian N(beta xbar^p + h xbar)."""
    s_rest = np.asarray(s_rest, dtype=float)
    p = params.p
    # beta N^(1-p) [(s+1)^p - (s-1)^p] written as beta N [((s+1)/N)^p - ((s-1)/N)^p]
    field = params.beta * N * (ipow((s_rest + 1) / N, p) - ipow((s_rest - 1) / N, p)) + 2 * params.h
    return expit(field)


def tanh_conditional(params: ModelParams, spins, i: int) -> float:
    """Surrogate P(X_i = +1 | rest) = e^z / (2 cosh z), z = beta p xbar^(p-1) + h (xbar includes X_i)."""
    x = np.asarray(spins)
    xbar = float(np.sum(x)) / x.size
    return float(expit(2 * _z(params, xbar)))


def flip_probs(params: ModelParams, N: int, S, conditional: str = "tanh"):
    """(P(+1 -> -1), P(-1 -> +1)) for a site of the given sign, as functions of S."""
    S = np.asarray(S, dtype=float)
    if conditional == "tanh":
        z = _z(params, S / N)
        return expit(-2 * z), expit(2 * z)
    if conditional == "exact":
        down = 1.0 - _exact_up_prob(params, N, S - 1)
        up = _exact_up_prob(params, N, S + 1)
        return down, up
    raise DomainError(f"conditional must be one of {CONDITIONALS}")


@dataclass(frozen=True)
class PairMoments:
    """Atomwise E(T - T'|X), E((T - T')^2|X) and the boundary indicators."""

    S: np.ndarray
    T: np.ndarray
    drift: np.ndarray
    second: np.ndarray
    interior: np.ndarray


def pair_moments(params: ModelParams, m: float, N: int, S, ab: Tuple[float, float], conditional: str = "tanh") -> PairMoments:
    """Conditional first and second moments of T - T' at each S.

    ``ab`` = (a, b) is the conditioning interval; E_a = {S - 2 >= aN},
    E_b = {S + 2 <= bN}.  A move that would leave [a, b] is suppressed,
    which is what the indicators encode.
    """
    S = np.asarray(S, dtype=float)
    a, b = ab
    sig = sigma(params, m, N)
    T = (S - N * m) / sig
    down, up = flip_probs(params, N, S, conditional)
    n_plus, n_minus = (N + S) / 2, (N - S) / 2
    Ea = S - 2 >= a * N
    Eb = S + 2 <= b * N
    fa = n_plus * down * Ea
    fb = n_minus * up * Eb
    drift = 2.0 / (N * sig) * (fa - fb)
    second = 4.0 / (N * sig * sig) * (fa + fb)
    return PairMoments(S, T, drift, second, Ea & Eb)


def drift_closed_form(params: ModelParams, m: float, N: int, T):
    """(T/N + m/sigma) - tanh(beta p (sigma T/N + m)^(p-1) + h) / sigma, valid where no boundary term acts."""
    sig = sigma(params, m, N)
    T = np.asarray(T, dtype=float)
    return (T / N + m / sig) - np.tanh(_z(params, sig * T / N + m)) / sig


@dataclass(frozen=True)
class DriftReport:
    N: int
    m: float
    lam: float
    n_atoms: int
    n_interior: int
    max_interior_discrepancy: float
    B_hat: float
    mean_drift: float
    mean_lambda_T_minus_R: float


def _interval(law: MagnetizationLaw, condition) -> Tuple[float, float]:
    lo, hi = condition
    lo = max(lo, -1.0)
    hi = min(hi, 1.0)
    return lo, hi


def drift_check(law: MagnetizationLaw, m: float, condition: Tuple[float, float], window: Optional[float] = None) -> DriftReport:
    """Compare the site-sum drift with its closed form on interior atoms and fit B in |R| <= B T^2 / sqrt(N).

    ``condition`` = (a, b) is the neighbourhood A of m.  B is fitted over
    atoms with |xbar - m| <= ``window`` (all atoms of A when None).
    """
    params, N = law.params, law.N
    ab = _interval(law, condition)
    if not ab[0] < m < ab[1]:
        raise DomainError("m must lie inside the conditioning interval")
    sel, lp = law.conditional_log_probs(condition)
    mom = pair_moments(params, m, N, law.S[sel], ab)
    closed = drift_closed_form(params, m, N, mom.T)
    inner = mom.interior
    disc = float(np.max(np.abs(mom.drift[inner] - closed[inner]))) if inner.any() else math.nan
    lam = lambda_const(params, m, N)
    R = mom.T - mom.drift / lam
    xb = law.support[sel]
    use = (mom.T != 0) & inner
    if window is not None:
        use &= np.abs(xb - m) <= window
    B_hat = float(np.max(np.abs(R[use]) * math.sqrt(N) / mom.T[use] ** 2)) if use.any() else math.nan
    p = np.exp(lp)
    return DriftReport(
        N=N,
        m=m,
        lam=lam,
        n_atoms=int(sel.sum()),
        n_interior=int(inner.sum()),
        max_interior_discrepancy=disc,
        B_hat=B_hat,
        mean_drift=float(np.sum(p * mom.drift)),
        mean_lambda_T_minus_R=float(lam * (np.sum(p * mom.T) - np.sum(p * R))),
    )


def default_K(params: ModelParams, m: float, condition=None, half_width: float = 0.1) -> float:
    """K with |T| <= K sqrt(N) equivalent to |xbar - m| <= half_width.

    The half-width is shrunk to half the distance from m to the ends of the
    neighbourhood ``condition`` and of [-1, 1] when those are closer.
    """
    lo, hi = (-1.0, 1.0) if condition is None else condition
    lo, hi = max(lo, -1.0), min(hi, 1.0)
    hw = min(half_width, 0.5 * (m - lo), 0.5 * (hi - m))
    return hw * math.sqrt(-_curvature(params, m))


@dataclass(frozen=True)
class PairConstants:
    m: float
    N: int
    K: float
    sigma2: float
    lam: float
    delta: float
    theta_hat: float
    delta1_hat: float
    delta2_hat: float
    alpha: float
    min_ED: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def hypothesis_constants(
    law: MagnetizationLaw,
    m: float,
    condition: Tuple[float, float],
    K: Optional[float] = None,
    conditional: str = "tanh",
) -> PairConstants:
    """Constants of the Stein hypotheses for T = W | {|W| <= K sqrt(N)}.

    delta = 2/sigma; delta1 = max |E(D|T) - 1| / (1 + |T|); theta = max E(D|T);
    delta2 = max |R| / (1 + T^2) with R = T - E(T - T'|X)/lambda; alpha = delta2 K sqrt(N).
    The maxima run over the atoms of the conditioned law.
    """
    params, N = law.params, law.N
    H2 = _curvature(params, m)
    K = default_K(params, m, condition) if K is None else K
    if not K > 0:
        raise DomainError("K must be positive")
    half = K / math.sqrt(-H2)
    ab = _interval(law, condition)
    if not ab[0] < m < ab[1]:
        raise DomainError("m must lie inside the conditioning interval")
    if m - half < condition[0] or m + half > condition[1]:
        raise RegimeError(
            f"K = {K} gives |xbar - m| <= {half:.4g}, which leaves the neighbourhood {ab} of m"
        )
    sig = math.sqrt(-N / H2)
    sel = law.mask(condition) & (np.abs(law.S - N * m) <= K * math.sqrt(N) * sig)
    if not sel.any():
        raise DomainError("K window contains no atoms")
    mom = pair_moments(params, m, N, law.S[sel], ab, conditional)
    lam = lambda_const(params, m, N)
    ED = mom.second / (2 * lam)
    R = mom.T - mom.drift / lam
    d2 = float(np.max(np.abs(R) / (1 + mom.T**2)))
    return PairConstants(
        m=m,
        N=N,
        K=K,
        sigma2=sig * sig,
        lam=lam,
        delta=2.0 / sig,
        theta_hat=float(np.max(ED)),
        delta1_hat=float(np.max(np.abs(ED - 1) / (1 + np.abs(mom.T)))),
        delta2_hat=d2,
        alpha=d2 * K * math.sqrt(N),
        min_ED=float(np.min(ED)),
    )
