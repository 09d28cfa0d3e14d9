"""Laplace-method decomposition of the magnetization law at a special point.

At a special point the weights

    y_{m,N} = 2^-N sqrt(pi N (1 - m*^2) / 2) binom(N, N(1+m)/2) exp(N(beta m^p + h m) - N H(m*))

are O(1) near m*, and the tail P(W_N > x), W_N = (S_N - N m*) / N^(3/4), splits
into sums over a far region (A_N, A_hat_N) and a window of half-width
N^(-1/4 + eps) around m* (B_N, B_{N,x}).  The window sums are compared with
integrals of the kernels p1, p2 and the error envelope r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln

from .errors import DomainError
from .exact import build_law, logsumexp
from .landscape import SpecialPoint
from .limits import power_tail
from .model import H_eval, ModelParams

EPSILON = 0.24
ZETA = 3.9


@dataclass(frozen=True)
class LaplaceContext:
    params: ModelParams
    m_star: float
    H4: float
    H5: float
    epsilon: float = EPSILON
    zeta: float = ZETA

    def __post_init__(self):
        if not self.H4 < 0:
            raise DomainError("Laplace context needs H''''(m*) < 0")
        b = H_eval(self.params, self.m_star, 3)
        if max(abs(b[1]), abs(b[2]), abs(b[3])) > 1e-10:
            raise DomainError("m* is not a special point: H', H'', H''' must vanish to 1e-10")

    @classmethod
    def from_special(cls, sp: SpecialPoint, **kw) -> "LaplaceContext":
        prm = ModelParams(sp.beta, sp.h, sp.p)
        b = H_eval(prm, sp.m_star, 5)
        return cls(prm, sp.m_star, b[4], b[5], **kw)

    @property
    def c(self) -> float:
        """Quartic coefficient c = -H''''(m*)/24, so p1(t) = exp(-c t^4)."""
        return -self.H4 / 24.0

    @property
    def linear_coef(self) -> float:
        return self.m_star / (1.0 - self.m_star**2)

    def log_H_star(self) -> float:
        return H_eval(self.params, self.m_star, 0)[0]


def log_y_weights(ctx: LaplaceContext, N: int) -> Tuple[np.ndarray, np.ndarray]:
    """(atoms m, log y_{m,N}) over the whole lattice."""
    law = build_law(ctx.params.with_N(N))
    const = -N * math.log(2.0) + 0.5 * math.log(math.pi * N * (1 - ctx.m_star**2) / 2.0) - N * ctx.log_H_star()
    return law.support, law.log_weights + const


def y_weight(ctx: LaplaceContext, N: int, m: float) -> float:
    """log y_{m,N} at a single lattice atom m."""
    k = N * (1 + m) / 2
    if abs(k - round(k)) > 1e-9 * N or not -1 <= m <= 1:
        raise DomainError(f"{m} is not an atom of the N={N} lattice")
    k = int(round(k))
    m = (2 * k - N) / N
    log_binom = gammaln(N + 1.0) - gammaln(k + 1.0) - gammaln(N - k + 1.0)
    prm = ctx.params
    return (
        -N * math.log(2.0)
        + 0.5 * math.log(math.pi * N * (1 - ctx.m_star**2) / 2.0)
        + log_binom
        + N * (prm.beta * m**prm.p + prm.h * m)
        - N * ctx.log_H_star()
    )


@dataclass(frozen=True)
class PartialSums:
    """Log-space sums of y over the far set, the one-sided far set, the window and the window tail."""

    N: int
    x: float
    log_A: float
    log_A_hat: float
    log_B: float
    log_B_x: float
    log_total: float

    @property
    def A_N(self) -> float:
        return math.exp(self.log_A)

    @property
    def A_hat_N(self) -> float:
        return math.exp(self.log_A_hat)

    @property
    def B_N(self) -> float:
        return math.exp(self.log_B)

    @property
    def B_N_x(self) -> float:
        return math.exp(self.log_B_x)

    def tail_probability(self) -> float:
        """P(W_N > x) = (A_hat_N + B_{N,x}) / (A_N + B_N)."""
        num = np.logaddexp(self.log_A_hat, self.log_B_x)
        den = np.logaddexp(self.log_A, self.log_B)
        return float(np.exp(num - den))


def partial_sums(ctx: LaplaceContext, N: int, x: float = 0.0, r: int = 0) -> PartialSums:
    """Exact sums of y_{m,N} over the four index sets (r = 1 mirrors m - m*)."""
    if x < 0:
        raise DomainError("x must be nonnegative")
    m, ly = log_y_weights(ctx, N)
    d = m - ctx.m_star
    if r:
        d = -d
    thr = N ** (-0.25 + ctx.epsilon)
    far = np.abs(d) >= thr
    return PartialSums(
        N=N,
        x=float(x),
        log_A=logsumexp(ly[far]),
        log_A_hat=logsumexp(ly[d >= thr]),
        log_B=logsumexp(ly[~far]),
        log_B_x=logsumexp(ly[(d > N**-0.25 * x) & (d < thr)]),
        log_total=logsumexp(ly),
    )


def kernels(ctx: LaplaceContext, t, N: int, variant: str = "t5"):
    """(p1, p2, r) at t.

    p1 = exp(-c t^4), p2 = p1 (H5 t^5/120 + m*/(1-m*^2) t).  Two error
    envelopes are available: ``variant="t5"`` uses
    (N^-1/2 + t^2 + t^5 N^-3/4 + t^6 + t^10 + t^11 N^-1/4) p1 and
    ``variant="t4"`` uses (N^-1/2 (1 + t^4) + t^11 N^-1/4 + t^2 + t^6 + t^10) p1.
    Powers enter r through |t| since r bounds an error magnitude.
    """
    t = np.asarray(t, dtype=float)
    p1 = np.exp(-ctx.c * t**4)
    p2 = p1 * (ctx.H5 / 120.0 * t**5 + ctx.linear_coef * t)
    a = np.abs(t)
    if variant == "t5":
        env = N**-0.5 + a**2 + a**5 * N**-0.75 + a**6 + a**10 + a**11 * N**-0.25
    elif variant == "t4":
        env = N**-0.5 * (1 + a**4) + a**11 * N**-0.25 + a**2 + a**6 + a**10
    else:
        raise DomainError(f"unknown envelope variant {variant!r}")
    r = env * p1
    if t.ndim == 0:
        return float(p1), float(p2), float(r)
    return p1, p2, r


_ENVELOPE_TERMS = {
    # (power of |t|, power of N multiplying it)
    "t5": [(0, -0.5), (2, 0.0), (5, -0.75), (6, 0.0), (10, 0.0), (11, -0.25)],
    "t4": [(0, -0.5), (4, -0.5), (11, -0.25), (2, 0.0), (6, 0.0), (10, 0.0)],
}


def tail_integrals(ctx: LaplaceContext, x: float, N: int, method: str = "gamma", variant: str = "t5"):
    """(P1_hat, P2_hat, R_hat)(x) = tail integrals of p1, p2, r from x to infinity."""
    c = ctx.c
    if method == "gamma":
        P1 = power_tail(c, 0, x)
        P2 = ctx.H5 / 120.0 * power_tail(c, 5, x) + ctx.linear_coef * power_tail(c, 1, x)
        R = sum(N**e * power_tail(c, k, x, absolute=True) for k, e in _ENVELOPE_TERMS[variant])
        return float(P1), float(P2), float(R)
    if method == "quad":
        out = []
        for j in range(3):
            f = lambda t, j=j: kernels(ctx, t, N, variant)[j]
            val = 0.0
            # split at 0 and the bulk so quad resolves the t^10 e^{-ct^4} hump
            pts = sorted({x, max(x, 0.0), max(x, 3.0 / c**0.25)})
            for a, b in zip(pts[:-1], pts[1:]):
                val += quad(f, a, b, epsabs=0, epsrel=1e-13, limit=200)[0]
            val += quad(f, pts[-1], np.inf, epsabs=0, epsrel=1e-13, limit=200)[0]
            out.append(val)
        return tuple(out)
    raise DomainError(f"unknown method {method!r}")


def full_integral_p1(ctx: LaplaceContext) -> float:
    """int_R p1 = Gamma(1/4) / (2 c^(1/4))."""
    return math.gamma(0.25) / (2.0 * ctx.c**0.25)


def laplace_BN(ctx: LaplaceContext, N: int) -> float:
    """Leading Laplace approximation (N^(3/4)/2) int_R p1 of the window sum B_N."""
    return 0.5 * N**0.75 * full_integral_p1(ctx)


@dataclass(frozen=True)
class BNxApprox:
    estimate: float
    one_term: float
    bound: float
    far_term: float


def laplace_BNx(ctx: LaplaceContext, N: int, x: float, variant: str = "t5") -> BNxApprox:
    """Two-term approximation (N^(3/4)/2) P1(x) + (sqrt(N)/2) P2(x) of B_{N,x}.

    ``bound`` is the error envelope N^(1/4) R(x) + p1(x) + |p2(x)| N^(-1/4) + r(x) N^(-1/2)
    (unknown O(1) constant left out); ``far_term`` is exp(-N^(zeta eps)).
    """
    if x < 0:
        raise DomainError("x must be nonnegative")
    P1, P2, R = tail_integrals(ctx, x, N, variant=variant)
    p1, p2, r = kernels(ctx, x, N, variant)
    one = 0.5 * N**0.75 * P1
    est = one + 0.5 * math.sqrt(N) * P2
    bound = N**0.25 * R + p1 + abs(p2) * N**-0.25 + r * N**-0.5
    return BNxApprox(est, one, bound, math.exp(-(N ** (ctx.zeta * ctx.epsilon))))


def fit_bnx_constant(ctx: LaplaceContext, Ns: Iterable[int], xs: Iterable[float], variant: str = "t5") -> float:
    """Smallest K with |approx - exact| <= K * bound over the (N, x) grid."""
    K = 0.0
    for N in Ns:
        for x in xs:
            ps = partial_sums(ctx, N, x)
            ap = laplace_BNx(ctx, N, x, variant)
            K = max(K, abs(ap.estimate - ps.B_N_x) / ap.bound)
    return K


def bn_scaled_error(ctx: LaplaceContext, N: int) -> float:
    """|laplace_BN / B_N - 1| * sqrt(N)."""
    ps = partial_sums(ctx, N)
    return abs(laplace_BN(ctx, N) / ps.B_N - 1.0) * math.sqrt(N)


def changeover_D(ctx: LaplaceContext, N: int, xs: Iterable[float], K: float = 10.0, variant: str = "t5") -> Optional[float]:
    """Smallest scanned x from which the two-term bound holds with constant K at every larger scanned x."""
    xs = sorted(xs)
    ok = []
    for x in xs:
        ap = laplace_BNx(ctx, N, x, variant)
        ok.append(abs(ap.estimate - partial_sums(ctx, N, x).B_N_x) <= K * ap.bound)
    for i in range(len(xs)):
        if all(ok[i:]):
            return xs[i]
    return None
