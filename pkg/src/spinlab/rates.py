"""Rate fitting for Kolmogorov distances and moderate-deviation errors across N."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError
from .exact import build_law, kolmogorov_distance
from .landscape import Landscape
from .limits import md_report, regime_setup, x_max

MIN_POINTS_FOR_SLOPE = 3


def fit_loglog(x: Sequence[float], y: Sequence[float]):
    """Least-squares slope of log y on log x and the RMS residual of that fit."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.size < 2:
        raise DomainError("need at least two points to fit a slope")
    if not (np.all(x > 0) and np.all(y > 0) and np.all(np.isfinite(y))):
        raise DomainError("values must be positive to fit a log-log slope")
    lx, ly = np.log(x), np.log(y)
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    return float(coef[0]), float(math.sqrt(np.mean(resid**2)))


@dataclass(frozen=True)
class RateReport:
    """Distances per N and, with three or more sizes, the fitted log-log slope.

    ``abscissa`` names the variable the slope is taken against ("N" or
    "N/log N").
    """

    N: tuple
    distance: tuple
    slope: Optional[float] = None
    residual: Optional[float] = None
    abscissa: str = "N"
    extra: dict = field(default_factory=dict)

    def rows(self):
        for n, d in zip(self.N, self.distance):
            yield n, d


def rate_report(Ns, distances, transform: Optional[Callable[[int], float]] = None, abscissa: str = "N", **extra) -> RateReport:
    order = np.argsort(Ns, kind="stable")
    Ns = tuple(int(Ns[i]) for i in order)
    ds = tuple(float(distances[i]) for i in order)
    slope = resid = None
    if len(Ns) >= MIN_POINTS_FOR_SLOPE:
        xs = [transform(n) if transform else n for n in Ns]
        slope, resid = fit_loglog(xs, ds)
    return RateReport(Ns, ds, slope, resid, abscissa, dict(extra))


def be_distance(landscape: Landscape, N: int, k: int = 0) -> float:
    """Exact Kolmogorov distance of the (conditioned) scaled magnetization to its limit law."""
    center, expo, spread, cond, limit, _ = regime_setup(landscape, k)
    law = build_law(landscape.params.with_N(N))
    return kolmogorov_distance(law, center, spread * N**expo, limit, cond)


def be_rates(landscape: Landscape, Ns: Sequence[int], k: int = 0) -> RateReport:
    """Berry-Esseen distances over Ns with the fitted slope in log N."""
    d = [be_distance(landscape, N, k) for N in Ns]
    return rate_report(list(Ns), d, regime=landscape.classification, k=k)


def md_error_ratio(landscape: Landscape, N: int, factor: int, n_x: int = 41, c_const: float = 0.5, r: int = 0, k: int = 0):
    """(max normalized error at N, at factor*N, their ratio) on one shared x grid.

    The grid is n_x points on [0, x_max(N)], fixed by the smaller size and
    reused at factor*N.
    """
    grid = np.linspace(0.0, x_max(landscape.classification, N, c_const), n_x)
    e = []
    for n in (N, factor * N):
        rep = md_report(build_law(landscape.params.with_N(n)), landscape, grid, r=r, k=k, c_const=c_const)
        e.append(rep.max_normalized_error())
    return e[0], e[1], e[0] / e[1]
