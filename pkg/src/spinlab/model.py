"""Model parameters and the scalar calculus of the free-energy surrogate.

The p-spin Curie-Weiss model on {-1, 1}^N has Gibbs weight
``exp(beta * N * xbar**p + h * N * xbar)``.  Its large-N behaviour is
governed by

    H(x) = beta * x**p + h * x - I(x),
    I(x) = ((1 + x) log(1 + x) + (1 - x) log(1 - x)) / 2,

whose global maximizers are the concentration points of the average
magnetization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError

MAX_ORDER = 5


@dataclass(frozen=True)
class ModelParams:
    """(beta, h, p, N) of the p-spin Curie-Weiss model.

    ``N`` may be left as ``None`` when only the landscape of H is needed.
    """

    beta: float
    h: float
    p: int
    N: Optional[int] = None

    def __post_init__(self):
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise DomainError(f"beta must be positive and finite, got {self.beta!r}")
        if not math.isfinite(self.h):
            raise DomainError(f"h must be finite, got {self.h!r}")
        if isinstance(self.p, bool) or int(self.p) != self.p or self.p < 2:
            raise DomainError(f"p must be an integer >= 2, got {self.p!r}")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "h", float(self.h))
        if self.N is not None:
            if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 1:
                raise DomainError(f"N must be an integer >= 1, got {self.N!r}")
            object.__setattr__(self, "N", int(self.N))

    def with_N(self, N: int) -> "ModelParams":
        return ModelParams(self.beta, self.h, self.p, N)

    def require_N(self) -> int:
        if self.N is None:
            raise DomainError("this operation needs a system size N")
        return self.N


@dataclass(frozen=True)
class DerivativeBundle:
    """H and its derivatives at ``point``; ``values[s]`` is H^(s)(point)."""

    point: float
    values: tuple

    def __getitem__(self, s):
        return self.values[s]


def ipow(x, k: int):
    """x**k for a nonnegative integer k by repeated squaring (no exp/log)."""
    result = 1.0 if np.isscalar(x) else np.ones_like(x, dtype=float)
    base = x
    while k:
        if k & 1:
            result = result * base
        base = base * base
        k >>= 1
    return result


def falling_factorial(p: int, s: int) -> int:
    """p! / (p - s)! for 0 <= s <= p, zero for s > p."""
    if s > p:
        return 0
    out = 1
    for j in range(s):
        out *= p - j
    return out


def entropy(x):
    """Binary entropy I(x); I(+-1) = log 2 by continuity.  Vectorized.

    For |x| < 1/2 uses I = x artanh(x) + log1p(-x^2)/2, whose two terms
    cancel by at most a factor 2; elsewhere the log1p form of the definition.
    """
    a = np.abs(np.asarray(x, dtype=float))
    if np.any(a > 1) or np.any(np.isnan(a)):
        raise DomainError("entropy is defined on [-1, 1]")
    small = a < 0.5
    val = np.empty_like(a)
    s = a[small]
    val[small] = s * np.arctanh(s) + 0.5 * np.log1p(-s * s)
    big = a[~small]
    # 0 * log 0 := 0 at the endpoints
    lo = np.where(big < 1, (1 - big) * np.log1p(-np.where(big < 1, big, 0.0)), 0.0)
    val[~small] = 0.5 * ((1 + big) * np.log1p(big) + lo)
    return float(val) if val.ndim == 0 else val


def entropy_deriv(x: float, s: int) -> float:
    """s-th derivative of I at x, 1 <= s <= 5.

    Uses the partial-fraction form
    I^(s)(x) = (s-2)!/2 * [(1-x)^(1-s) + (-1)^s (1+x)^(1-s)]  (s >= 2),
    which stays accurate near the poles at +-1.
    """
    if not 1 <= s <= MAX_ORDER:
        raise DomainError(f"derivative order must be in 1..{MAX_ORDER}, got {s}")
    if not abs(x) < 1:
        raise DomainError(f"I^({s}) has a pole at |x| = 1 (x={x!r})")
    if s == 1:
        return math.atanh(x)
    k = s - 1
    lo = 1.0 / ipow(1.0 - x, k)
    hi = 1.0 / ipow(1.0 + x, k)
    sign = 1.0 if s % 2 == 0 else -1.0
    return 0.5 * math.factorial(s - 2) * (lo + sign * hi)


def free_energy(params: ModelParams, x):
    """Vectorized H(x) on [-1, 1]."""
    x = np.asarray(x, dtype=float)
    val = params.beta * ipow(x, params.p) + params.h * x - entropy(x)
    return float(val) if np.ndim(val) == 0 else val


def free_energy_prime(params: ModelParams, x):
    """Vectorized H'(x) on (-1, 1)."""
    x = np.asarray(x, dtype=float)
    val = params.beta * params.p * ipow(x, params.p - 1) + params.h - np.arctanh(x)
    return float(val) if np.ndim(val) == 0 else val


def H_eval(params: ModelParams, x: float, max_order: int = MAX_ORDER) -> DerivativeBundle:
    """H and its derivatives up to ``max_order`` at x in (-1, 1)."""
    if not 0 <= max_order <= MAX_ORDER:
        raise DomainError(f"max_order must be in 0..{MAX_ORDER}")
    if not abs(x) < 1:
        raise DomainError(f"H_eval needs |x| < 1, got {x!r}")
    b, h, p = params.beta, params.h, params.p
    values = [math.fsum([b * ipow(x, p), h * x, -entropy(x)])]
    for s in range(1, max_order + 1):
        poly = b * falling_factorial(p, s) * ipow(x, p - s) if s <= p else 0.0
        values.append(poly + (h if s == 1 else 0.0) - entropy_deriv(x, s))
    return DerivativeBundle(float(x), tuple(values))


def fixed_point_map(params: ModelParams, x: float) -> float:
    """x -> tanh(beta p x^(p-1) + h); stationary points of H are its fixed points."""
    if abs(x) > 1:
        raise DomainError(f"fixed_point_map needs |x| <= 1, got {x!r}")
    return math.tanh(params.beta * params.p * ipow(x, params.p - 1) + params.h)
