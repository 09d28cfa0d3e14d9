"""Limit laws of the magnetization and moderate-deviation diagnostics.

Gaussian fluctuations at regular and critical points, the quartic law
F(dx) ~ exp(-c x^4) dx at special points, and discrete mixtures over the
maximizers.  The upper incomplete gamma function needed for quartic tails
is implemented here (series / continued fraction) in a vectorized form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln, log_ndtr, ndtr

from .errors import DomainError, RegimeError
from .exact import MagnetizationLaw, TailQuery, log_tail_prob, standardized_values
from .landscape import CRITICAL, REGULAR, SPECIAL, Landscape

_EPS = 1e-16
_MAX_ITER = 500


def gaussian_cdf(x):
    return ndtr(x)


def gaussian_survival(x):
    return ndtr(-np.asarray(x, dtype=float))


def _log_lower_series(a: np.ndarray, z: np.ndarray) -> np.ndarray:
    """log of the lower incomplete gamma by its power series (z small)."""
    term = 1.0 / a
    total = term.copy()
    ap = a.copy()
    for _ in range(_MAX_ITER):
        ap = ap + 1.0
        term = term * z / ap
        total = total + term
        if np.all(np.abs(term) <= np.abs(total) * _EPS):
            break
    with np.errstate(divide="ignore"):
        return -z + a * np.log(z) + np.log(total)


def _log_upper_cf(a: np.ndarray, z: np.ndarray) -> np.ndarray:
    """log Gamma(a, z) from the Legendre continued fraction (modified Lentz), z >= a + 1."""
    tiny = 1e-300
    b = z + 1.0 - a
    c = np.full_like(z, 1.0 / tiny)
    d = 1.0 / b
    f = d.copy()
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = d * c
        f = f * delta
        if np.all(np.abs(delta - 1.0) <= _EPS):
            break
    return -z + a * np.log(z) + np.log(f)


def log_incomplete_gamma_upper(a, z):
    """log Gamma(a, z) for a > 0, z >= 0 (vectorized, no underflow for large z)."""
    a_arr, z_arr = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(z, dtype=float))
    a_arr = a_arr.astype(float).copy()
    z_arr = z_arr.astype(float).copy()
    if np.any(a_arr <= 0) or np.any(z_arr < 0) or np.any(np.isnan(z_arr)):
        raise DomainError("incomplete gamma needs a > 0 and z >= 0")
    out = np.empty_like(z_arr)
    zero = z_arr == 0
    series = (~zero) & (z_arr < a_arr + 1.0)
    cf = (~zero) & ~series
    out[zero] = gammaln(a_arr[zero])
    if series.any():
        aa, zz = a_arr[series], z_arr[series]
        lg = gammaln(aa)
        lower = _log_lower_series(aa, zz)
        out[series] = lg + np.log1p(-np.exp(lower - lg))
    if cf.any():
        out[cf] = _log_upper_cf(a_arr[cf], z_arr[cf])
    return float(out) if out.ndim == 0 else out


def incomplete_gamma_upper(a, z):
    """Gamma(a, z) = int_z^inf t^(a-1) e^(-t) dt."""
    return np.exp(log_incomplete_gamma_upper(a, z))


def log_power_tail(c: float, k: int, x):
    """log int_x^inf t^k exp(-c t^4) dt for x >= 0."""
    x = np.asarray(x, dtype=float)
    a = (k + 1) / 4.0
    return math.log(0.25) - a * math.log(c) + log_incomplete_gamma_upper(a, c * x**4)


def power_tail(c: float, k: int, x, absolute: bool = False):
    """int_x^inf t^k exp(-c t^4) dt (or |t|^k if ``absolute``), any real x."""
    x = np.asarray(x, dtype=float)
    a = (k + 1) / 4.0
    full = 0.25 * c**-a * math.exp(gammaln(a))
    tail = np.exp(log_power_tail(c, k, np.abs(x)))
    neg_sign = 1.0 if (absolute or k % 2 == 0) else -1.0
    out = np.where(x >= 0, tail, neg_sign * (full - tail) + full)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GaussianLaw:
    mean: float = 0.0
    variance: float = 1.0

    def __post_init__(self):
        if not self.variance > 0:
            raise DomainError("Gaussian variance must be positive")

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)

    def cdf(self, x):
        return ndtr((np.asarray(x, dtype=float) - self.mean) / self.sd)

    def survival(self, x):
        return ndtr((self.mean - np.asarray(x, dtype=float)) / self.sd)

    def log_survival(self, x):
        return log_ndtr((self.mean - np.asarray(x, dtype=float)) / self.sd)


@dataclass(frozen=True)
class QuarticLaw:
    """Density 2 c^(1/4) / Gamma(1/4) * exp(-c x^4), c = -H''''(m*)/24."""

    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError("quartic law needs c > 0")

    @classmethod
    def from_H4(cls, H4: float) -> "QuarticLaw":
        return cls(-H4 / 24.0)

    @property
    def norm_const(self) -> float:
        return 2.0 * self.c**0.25 / math.gamma(0.25)

    def pdf(self, x):
        return self.norm_const * np.exp(-self.c * np.asarray(x, dtype=float) ** 4)

    def log_survival(self, x):
        """log P(X > x); for x >= 0 this is log Gamma(1/4, c x^4) - log(2 Gamma(1/4))."""
        x = np.asarray(x, dtype=float)
        lg = log_incomplete_gamma_upper(0.25, self.c * x**4) - math.log(2.0) - gammaln(0.25)
        out = np.where(x >= 0, lg, np.log1p(-np.exp(lg)))
        return float(out) if out.ndim == 0 else out

    def survival(self, x):
        return np.exp(self.log_survival(x))

    def cdf(self, x):
        # cdf(x) = survival(-x) by symmetry, avoiding 1 - survival on the left
        return self.survival(-np.asarray(x, dtype=float))


def quartic_cdf(law: QuarticLaw, x):
    return law.cdf(x)


def quartic_survival(law: QuarticLaw, x):
    return law.survival(x)


@dataclass(frozen=True)
class MixtureLaw:
    """Discrete limit sum_k p_k delta_{m_k}."""

    atoms: Tuple[float, ...]
    weights: Tuple[float, ...]

    def __post_init__(self):
        if abs(math.fsum(self.weights) - 1.0) > 1e-12:
            raise DomainError("mixture weights must sum to 1")

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return sum(w * (x >= a) for a, w in zip(self.atoms, self.weights)) + 0.0 * x

    def cdf_left(self, x):
        x = np.asarray(x, dtype=float)
        return sum(w * (x > a) for a, w in zip(self.atoms, self.weights)) + 0.0 * x

    def survival(self, x):
        return 1.0 - self.cdf(x)


@dataclass(frozen=True, eq=False)
class DiscreteLaw:
    """Law of a standardized exact statistic, usable wherever a limit law is."""

    values: np.ndarray
    probs: np.ndarray

    @classmethod
    def from_law(cls, law: MagnetizationLaw, center: float, alpha: float, condition=None, sign: int = 0):
        sel, lp = law.conditional_log_probs(condition)
        w = standardized_values(law, center, alpha)[sel]
        if sign:
            w = -w
        order = np.argsort(w, kind="stable")
        return cls(w[order], np.exp(lp[order]))

    def cdf(self, x):
        F = np.concatenate(([0.0], np.cumsum(self.probs)))
        return F[np.searchsorted(self.values, np.asarray(x, dtype=float), side="right")]

    def cdf_left(self, x):
        F = np.concatenate(([0.0], np.cumsum(self.probs)))
        return F[np.searchsorted(self.values, np.asarray(x, dtype=float), side="left")]

    def log_survival(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lp = np.log(self.probs)
        out = np.array([_lse(lp[self.values > xi]) for xi in x])
        return out

    def survival(self, x):
        return np.exp(self.log_survival(x))


def _lse(a):
    if a.size == 0:
        return -math.inf
    mx = a.max()
    return mx + math.log(np.sum(np.exp(a - mx)))


def correction_G(law: QuarticLaw, m_star: float, H5: float, x):
    """G(x) = P2(x)/P1(x): ratio of the tail integrals of
    p2(t) = exp(-c t^4) (H5 t^5/120 + m*/(1-m*^2) t) and p1(t) = exp(-c t^4), x >= 0.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("correction_G is defined for x >= 0")
    c = law.c
    l1 = log_power_tail(c, 0, x)
    r5 = np.exp(log_power_tail(c, 5, x) - l1)
    r1 = np.exp(log_power_tail(c, 1, x) - l1)
    out = H5 / 120.0 * r5 + m_star / (1.0 - m_star * m_star) * r1
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class MDReport:
    N: int
    regime: str
    r: int
    q: int
    x: np.ndarray
    tail_exact: np.ndarray
    tail_limit: np.ndarray
    ratio: np.ndarray
    normalized_error: np.ndarray
    flagged: np.ndarray
    x_max: float = math.inf
    k: int = 0

    def max_normalized_error(self) -> float:
        ok = ~self.flagged
        return float(np.max(self.normalized_error[ok])) if ok.any() else math.nan

    def rows(self):
        for i in range(len(self.x)):
            yield (
                self.N,
                float(self.x[i]),
                self.r,
                float(self.tail_exact[i]),
                float(self.tail_limit[i]),
                float(self.ratio[i]),
                float(self.normalized_error[i]),
                bool(self.flagged[i]),
            )


def regime_setup(landscape: Landscape, k: int = 0):
    """(center, scale_exponent, spread, condition, limit law, q) for the landscape's regime."""
    cls = landscape.classification
    if cls == SPECIAL:
        mx = landscape.top
        return mx.m, 0.75, 1.0, None, QuarticLaw.from_H4(mx.fourth_deriv), 5
    if cls == REGULAR:
        mx = landscape.top
        return mx.m, 0.5, math.sqrt(-1.0 / mx.second_deriv), None, GaussianLaw(), 3
    if cls == CRITICAL:
        if not 0 <= k < landscape.K:
            raise DomainError(f"maximizer index {k} out of range for K={landscape.K}")
        mx = landscape.global_maximizers[k]
        return mx.m, 0.5, math.sqrt(-1.0 / mx.second_deriv), landscape.neighborhood(k), GaussianLaw(), 3
    raise RegimeError(f"unknown classification {cls!r}")  # pragma: no cover


def x_max(regime: str, N: int, c_const: float = 0.5) -> float:
    """Upper end of the moderate-deviation range: C N^(1/6), or C N^(1/20) at special points."""
    return c_const * N ** (1.0 / 20.0 if regime == SPECIAL else 1.0 / 6.0)


def md_report(
    law: MagnetizationLaw,
    landscape: Landscape,
    x_grid: Sequence[float],
    r: int = 0,
    k: int = 0,
    regime: Optional[str] = None,
    c_const: Optional[float] = 0.5,
    limit=None,
) -> MDReport:
    """Ratio of exact tail to limit tail on ``x_grid``, with normalized error.

    normalized_error = |ratio - 1| / (1 + x^q), q = 3 (regular, critical) or
    q = 5 (special).  Points where either tail underflows are flagged.
    ``limit`` overrides the limiting law (anything with ``log_survival``).
    """
    cls = landscape.classification
    if regime is not None and regime != cls:
        raise RegimeError(f"requested regime {regime!r} but (beta, h) classifies as {cls!r}")
    center, expo, spread, cond, default_limit, q = regime_setup(landscape, k)
    lim = default_limit if limit is None else limit
    x = np.asarray(x_grid, dtype=float)
    if np.any(x < 0):
        raise DomainError("x grid must be nonnegative")
    xm = math.inf if c_const is None else x_max(cls, law.N, c_const)
    if np.any(x > xm * (1 + 1e-12)):
        raise DomainError(f"x grid exceeds the moderate-deviation range [0, {xm:.6g}]")
    log_exact = np.array(
        [log_tail_prob(law, TailQuery(center, expo, r, float(xi), cond, spread)) for xi in x]
    )
    log_limit = np.asarray(lim.log_survival(x), dtype=float).reshape(x.shape)
    flagged = ~np.isfinite(log_exact) | ~np.isfinite(log_limit)
    with np.errstate(invalid="ignore", over="ignore"):
        ratio = np.where(flagged, np.nan, np.exp(log_exact - log_limit))
        nerr = np.abs(ratio - 1.0) / (1.0 + x**q)
    return MDReport(
        N=law.N,
        regime=cls,
        r=r,
        q=q,
        x=x,
        tail_exact=np.exp(log_exact),
        tail_limit=np.exp(log_limit),
        ratio=ratio,
        normalized_error=nerr,
        flagged=flagged,
        x_max=xm,
        k=k,
    )
