"""Exact finite-N magnetization laws and rate diagnostics for the p-spin Curie-Weiss model."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DegenerateCurvatureError,
    DomainError,
    RegimeError,
    SizeError,
    SolverError,
    SpinlabError,
)
from .exact import MagnetizationLaw, TailQuery, brute_force_pmf, build_law, kolmogorov_distance, tail_prob  # noqa: E402
from .landscape import Landscape, beta_star, classify_point, critical_curve, special_points  # noqa: E402
from .limits import GaussianLaw, QuarticLaw, md_report  # noqa: E402
from .model import ModelParams, H_eval, entropy, free_energy  # noqa: E402

__all__ = [
    "__version__",
    "DegenerateCurvatureError",
    "DomainError",
    "RegimeError",
    "SizeError",
    "SolverError",
    "SpinlabError",
    "MagnetizationLaw",
    "TailQuery",
    "brute_force_pmf",
    "build_law",
    "kolmogorov_distance",
    "tail_prob",
    "Landscape",
    "beta_star",
    "classify_point",
    "critical_curve",
    "special_points",
    "GaussianLaw",
    "QuarticLaw",
    "md_report",
    "ModelParams",
    "H_eval",
    "entropy",
    "free_energy",
]
