"""Maximum pseudolikelihood estimation of beta at h = 0.

With the tanh-form single-site conditionals the pseudolikelihood depends on
X only through xbar, and its maximizer is beta_hat = g(xbar) with
g(t) = artanh(t) / (p t^(p-1)).  The exact Gibbs conditionals give a
slightly different maximizer; both are available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit, log_expit

from .errors import DomainError
from .exact import build_law, kolmogorov_points
from .landscape import beta_star, classify_point, find_stationary
from .limits import GaussianLaw
from .model import H_eval, ModelParams
from .rates import RateReport, rate_report
from .sampler import make_rng, sample_magnetization


class ConsistencyError(DomainError):
    """beta <= beta*(p): no consistent estimator exists."""


def _check_t(p: int, t: float) -> None:
    if t == 0:
        raise DomainError("g is undefined at t = 0")
    if p % 2 == 0 and t < 0:
        raise DomainError("for even p, g needs t > 0")


def g_link(p: int, t: float) -> float:
    """artanh(t) / (p t^(p-1)); +-inf at |t| = 1."""
    _check_t(p, t)
    if abs(t) > 1:
        raise DomainError("g needs |t| <= 1")
    if abs(t) == 1:
        return math.copysign(math.inf, t)
    return math.atanh(t) / (p * t ** (p - 1))


def g_prime(p: int, t: float) -> float:
    _check_t(p, t)
    return ((1 - p) * t ** (-p) * math.atanh(t) + t ** (1 - p) / ((1 - t) * (1 + t))) / p


def g_second(p: int, t: float) -> float:
    _check_t(p, t)
    at, w = math.atanh(t), 1.0 / ((1 - t) * (1 + t))
    return (
        (1 - p) * (-p) * t ** (-p - 1) * at
        + 2 * (1 - p) * t ** (-p) * w
        + 2 * t ** (2 - p) * w * w
    ) / p


@dataclass(frozen=True)
class MplResult:
    """beta_hat = g(x_bar).  ``flag`` is "ok", "zero", "boundary" (|x_bar| = 1) or "negative"."""

    beta_hat: float
    x_bar: float
    valid: bool
    flag: str = "ok"


def mpl_estimate(x, p: int) -> MplResult:
    """MPL estimate from a spin vector or from x_bar directly."""
    xb = float(np.mean(x)) if np.ndim(x) else float(x)
    if xb == 0 or (p % 2 == 0 and xb < 0):
        return MplResult(math.nan, xb, False, "zero" if xb == 0 else "negative")
    b = g_link(p, xb)
    if math.isinf(b):
        return MplResult(b, xb, False, "boundary")
    if b < 0:
        return MplResult(b, xb, True, "negative")
    return MplResult(b, xb, True, "ok")


def log_pseudolikelihood(beta: float, S: int, N: int, p: int, form: str = "tanh") -> float:
    """log prod_i P_beta(X_i | rest) at h = 0 for a configuration with spin sum S."""
    n_plus, n_minus = (N + S) / 2, (N - S) / 2
    if form == "tanh":
        z = beta * p * (S / N) ** (p - 1)
        return n_plus * float(log_expit(2 * z)) + n_minus * float(log_expit(-2 * z))
    if form == "exact":
        def field(s):
            return beta * N * (((s + 1) / N) ** p - ((s - 1) / N) ** p)

        lp = n_plus * float(log_expit(field(S - 1))) if n_plus else 0.0
        lm = n_minus * float(log_expit(-field(S + 1))) if n_minus else 0.0
        return lp + lm
    raise DomainError(f"unknown pseudolikelihood form {form!r}")


def _score(beta, S, N, p, form):
    """d/dbeta of the log pseudolikelihood."""
    n_plus, n_minus = (N + S) / 2, (N - S) / 2
    if form == "tanh":
        c = 2 * p * (S / N) ** (p - 1)
        return n_plus * c * expit(-beta * c) - n_minus * c * expit(beta * c)
    f_up = N * ((S / N) ** p - ((S - 2) / N) ** p)
    f_dn = N * (((S + 2) / N) ** p - (S / N) ** p)
    return n_plus * f_up * expit(-beta * f_up) - n_minus * f_dn * expit(beta * f_dn)


def pseudolikelihood_argmax(S: int, N: int, p: int, form: str = "tanh", beta_grid: Optional[Sequence[float]] = None) -> float:
    """Maximizer of the log pseudolikelihood in beta.

    With ``beta_grid`` the best grid point is returned; otherwise the score
    root is bracketed and solved with brentq.  Returns inf when the score
    stays positive (all spins aligned).
    """
    if beta_grid is not None:
        g = np.asarray(beta_grid, dtype=float)
        vals = [log_pseudolikelihood(b, S, N, p, form) for b in g]
        return float(g[int(np.argmax(vals))])
    if abs(S) == N:
        # one-signed score for every beta: the likelihood increases without bound
        return math.copysign(math.inf, S * (S / N) ** (p - 1))
    lo, hi = -1.0, 1.0
    while _score(lo, S, N, p, form) < 0:
        lo *= 2
        if lo < -1e6:
            return -math.inf
    while _score(hi, S, N, p, form) > 0:
        hi *= 2
        if hi > 1e6:
            return math.inf
    return brentq(_score, lo, hi, args=(S, N, p, form), xtol=1e-15, rtol=4 * np.finfo(float).eps)


def positive_maximizer(beta: float, p: int) -> float:
    """Largest stationary point of H_{beta,0,p}, the positive global maximizer when beta > beta*(p)."""
    lnd = classify_point(ModelParams(beta, 0.0, p))
    pos = [m for m in lnd.maximizer_locations if m > 0]
    if not pos:
        raise ConsistencyError(f"no positive global maximizer at beta={beta}, p={p}")
    return max(pos)


def _require_consistent(params: ModelParams) -> None:
    if params.h != 0:
        raise DomainError("MPL inference is set up at h = 0")
    if params.p < 3:
        raise DomainError("MPL inference here needs p >= 3")
    bs = beta_star(params.p)
    if not params.beta > bs:
        raise ConsistencyError(f"beta = {params.beta} <= beta*({params.p}) = {bs}")


def variance_forms(params: ModelParams, m: float):
    """(-H''(m) / (p^2 m^(2p-2)), -g'(m)^2 / H''(m))."""
    H2 = H_eval(params, m, 2)[2]
    p = params.p
    return -H2 / (p * p * m ** (2 * p - 2)), -g_prime(p, m) ** 2 / H2


def asymptotic_variance(params: ModelParams, m_star: Optional[float] = None, rtol: float = 1e-10) -> float:
    """Limiting variance -H''(m*) / (p^2 m*^(2p-2)) of sqrt(N)(beta_hat - beta); cross-checked against -g'(m*)^2/H''(m*)."""
    _require_consistent(params)
    m = positive_maximizer(params.beta, params.p) if m_star is None else m_star
    v1, v2 = variance_forms(params, m)
    if not v1 > 0:
        raise DomainError("H''(m*) must be negative")
    if abs(v1 - v2) > rtol * v1:
        raise DomainError(f"variance identity fails: {v1!r} vs {v2!r}")
    return v1


def quadratic_expansion_constants(p: int, m: float):
    """(a, b_scale) = (g'(m), g''(m)/2); the quadratic coefficient is b_scale / sqrt(N)."""
    if not 0 < m < 1:
        raise DomainError("m must lie in (0, 1)")
    return g_prime(p, m), 0.5 * g_second(p, m)


def positive_branch(params: ModelParams, m: float):
    """Conditioning interval (c, inf) around the positive maximizer: c is the largest stationary point below m
    that is not m itself (the local minimum separating it from 0)."""
    below = [s for s in find_stationary(params) if s < m - 1e-8]
    lo = max(below) if below else 0.0
    return max(lo, 0.0), math.inf


def pushforward_distance(params: ModelParams, N: int, m: float, var: float, condition=None, link=None) -> float:
    """Exact Kolmogorov distance of sqrt(N)(link(xbar) - beta) given xbar in A to N(0, var)."""
    law = build_law(params.with_N(N))
    cond = positive_branch(params, m) if condition is None else condition
    sel, lp = law.conditional_log_probs(cond)
    xb = law.support[sel]
    link = (lambda t: g_link(params.p, t)) if link is None else link
    vals = np.array([math.sqrt(N) * (link(t) - params.beta) for t in xb])
    ok = np.isfinite(vals)
    # xbar = 1 maps to +inf: it only enters the CDF at the far right
    return kolmogorov_points(vals[ok], np.exp(lp[ok]), GaussianLaw(0.0, var), extra_mass=float(np.exp(lp[~ok]).sum()))


def mpl_be_experiment(
    params: ModelParams, Ns: Sequence[int], n_rep: Optional[int] = None, seed: Optional[int] = None
) -> RateReport:
    """Exact pushforward distances over Ns, slope fitted against log(N / log N).

    With ``n_rep`` also reports Monte Carlo distances from n_rep exact-law
    draws per N (conditioned on A by rejection), seeded from ``seed``.
    """
    _require_consistent(params)
    m = positive_maximizer(params.beta, params.p)
    var = asymptotic_variance(params, m)
    cond = positive_branch(params, m)
    dists = [pushforward_distance(params, N, m, var, cond) for N in Ns]
    extra = dict(m_star=m, variance=var, condition_lo=cond[0])
    if n_rep:
        rngs = np.random.SeedSequence(seed).spawn(len(Ns))
        mc = []
        for N, ss in zip(Ns, rngs):
            law = build_law(params.with_N(N))
            x = sample_magnetization(law, make_rng(ss), n_rep)
            x = x[x > cond[0]]
            vals = np.sqrt(N) * (np.array([g_link(params.p, t) for t in x]) - params.beta)
            mc.append(kolmogorov_points(vals[np.isfinite(vals)], np.full(np.isfinite(vals).sum(), 1.0 / x.size), GaussianLaw(0.0, var), extra_mass=float((~np.isfinite(vals)).sum()) / x.size))
        extra["mc_distance"] = tuple(mc)
        extra["n_rep"] = n_rep
    return rate_report(list(Ns), dists, transform=lambda n: n / math.log(n), abscissa="N/log N", **extra)
