"""Command-line front end: ``spinlab <command> [flags]``.

Every run resolves one configuration (JSON file from ``--config`` overlaid by
command-line flags), writes a '#'-commented header and then CSV rows (or a
JSON document for ``classify``).  Exit codes: 0 success, 2 configuration
error, 3 numerical failure, 4 regime mismatch.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import io
import json
import math
import os
import shlex
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from datetime import datetime, timezone
from typing import List, Optional

import numpy as np

from . import __version__
from .errors import DomainError, RegimeError, SolverError, SpinlabError
from .exact import build_law, brute_force_pmf
from .landscape import beta_star, classify_point, critical_curve, special_points
from .laplace import LaplaceContext, laplace_BN, laplace_BNx, partial_sums
from .limits import md_report, x_max
from .model import ModelParams
from .mpl import mpl_be_experiment
from .rates import be_distance, rate_report
from .sampler import RNG_ALGORITHM, empirical_law, run_chains, total_variation
from .stein import drift_check, hypothesis_constants

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_REGIME = 0, 2, 3, 4
COMMANDS = (
    "classify", "phase-diagram", "md-ratio", "be", "stein", "laplace",
    "mpl", "sample", "special", "critical-curve", "beta-star",
)


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    beta: Optional[float] = None
    h: Optional[float] = None
    p: Optional[int] = None
    n_list: Optional[List[int]] = None
    x_grid: Optional[List[float]] = None
    beta_grid: Optional[List[float]] = None
    h_grid: Optional[List[float]] = None
    c_const: float = 0.5
    k_const: Optional[float] = None
    k_index: int = 0
    r: int = 0
    regime: Optional[str] = None
    variant: str = "t5"
    n_rep: Optional[int] = None
    n_samples: int = 1000
    n_chains: int = 1000
    burn_in: int = 1000
    seed: int = 0
    threads: int = 1
    tol_height: float = 1e-9
    tol_curv: float = 1e-7
    out: Optional[str] = None

    def params(self, N: Optional[int] = None) -> ModelParams:
        for name in ("beta", "h", "p"):
            if getattr(self, name) is None:
                raise ConfigError(f"--{name} is required for this command")
        return ModelParams(self.beta, self.h, self.p, N)

    def require(self, *names):
        for name in names:
            if getattr(self, name) is None:
                raise ConfigError(f"--{name.replace('_', '-')} is required for this command")

    def hash(self) -> str:
        d = dataclasses.asdict(self)
        d.pop("out")
        d.pop("threads")  # results do not depend on the pool width
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _floats(text: str) -> List[float]:
    """'a,b,c' or 'start:stop:count' (inclusive linspace)."""
    text = text.strip()
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return [float(v) for v in np.linspace(float(a), float(b), int(n))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"cannot parse list {text!r}") from exc


def _ints(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"cannot parse integer list {text!r}") from exc


_FLAG_TYPES = {
    "beta": float, "h": float, "p": int, "n_list": _ints, "x_grid": _floats,
    "beta_grid": _floats, "h_grid": _floats, "c_const": float, "k_const": float,
    "k_index": int, "r": int, "regime": str, "variant": str, "n_rep": int,
    "n_samples": int, "n_chains": int, "burn_in": int, "seed": int, "threads": int,
    "tol_height": float, "tol_curv": float, "out": str,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    for name, typ in _FLAG_TYPES.items():
        common.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None)
    common.add_argument("--config", default=None, help="JSON configuration file")
    parser = _Parser(prog="spinlab", description="p-spin Curie-Weiss magnetization toolkit")
    parser.add_argument("--version", action="version", version=f"spinlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for cmd in COMMANDS:
        sub.add_parser(cmd, parents=[common])
    return parser


def _coerce(name: str, value):
    """Type-check one config-file value against the flag of the same name."""
    if value is None:
        return None
    typ = _FLAG_TYPES[name]
    try:
        if typ in (_ints, _floats):
            if isinstance(value, str):
                return typ(value)
            if not isinstance(value, list):
                raise TypeError
            return [int(v) if typ is _ints else float(v) for v in value]
        if typ is int and (isinstance(value, bool) or int(value) != value):
            raise TypeError
        if typ is str and not isinstance(value, str):
            raise TypeError
        return typ(value)
    except (TypeError, ValueError, argparse.ArgumentTypeError) as exc:
        raise ConfigError(f"config key {name!r} has invalid value {value!r}") from exc


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    """Config file values overlaid by every flag given on the command line."""
    values = {}
    if ns.config:
        try:
            with open(ns.config) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(RunConfig)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        for k, v in doc.items():
            values[k] = _coerce(k, v)
    for name in _FLAG_TYPES:
        v = getattr(ns, name)
        if v is not None:
            values[name] = v
    if values.get("threads") is None:
        env = os.environ.get("SPINLAB_THREADS")
        if env:
            try:
                values["threads"] = int(env)
            except ValueError as exc:
                raise ConfigError(f"SPINLAB_THREADS must be an integer, got {env!r}") from exc
    cfg = RunConfig(**values)
    if cfg.threads < 1:
        raise ConfigError("--threads must be >= 1")
    if cfg.n_list is not None:
        if not cfg.n_list or any(n < 1 for n in cfg.n_list):
            raise ConfigError("--n-list needs positive sizes")
        cfg.n_list = sorted(cfg.n_list)
    if cfg.r not in (0, 1):
        raise ConfigError("--r must be 0 or 1")
    return cfg


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    if v is None:
        return ""
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.16e}"


def _json_safe(obj):
    """Non-finite floats become the strings "inf", "-inf", "nan" so the document is strict JSON."""
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return fmt(obj)
    return obj


class Output:
    """Collects header comments and rows; rendered once at the end."""

    def __init__(self, cfg: RunConfig, argv: List[str]):
        self.cfg = cfg
        self.meta = [
            f"spinlab {__version__}",
            "command: spinlab " + " ".join(shlex.quote(a) for a in argv),
            f"config_hash: {cfg.hash()}",
            f"seed: {cfg.seed}",
            f"rng: {RNG_ALGORITHM}",
            "timestamp: " + datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        ]
        self.notes: List[str] = []
        self.columns: List[str] = []
        self.rows: List[tuple] = []
        self.document: Optional[dict] = None

    def note(self, key: str, value) -> None:
        self.notes.append(f"{key}: {fmt(value) if not isinstance(value, str) else value}")

    def render(self) -> str:
        buf = io.StringIO()
        for line in self.meta + self.notes:
            buf.write("# " + line + "\n")
        if self.document is not None:
            buf.write(json.dumps(_json_safe(self.document), indent=2, sort_keys=True, allow_nan=False) + "\n")
            return buf.getvalue()
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(fmt(v) for v in row) + "\n")
        return buf.getvalue()


def _pmap(cfg: RunConfig, fn, items):
    """Ordered map over items; a thread pool when threads > 1."""
    items = list(items)
    if cfg.threads == 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        return list(pool.map(fn, items))


def _landscape(cfg: RunConfig):
    lnd = classify_point(cfg.params(), cfg.tol_height, cfg.tol_curv)
    if cfg.regime is not None and cfg.regime != lnd.classification:
        raise RegimeError(f"requested regime {cfg.regime!r} but (beta, h) classifies as {lnd.classification!r}")
    return lnd


def cmd_classify(cfg, out):
    out.document = _landscape(cfg).to_dict()


def cmd_phase_diagram(cfg, out):
    cfg.require("p", "beta_grid", "h_grid")
    out.columns = ["beta", "h", "class", "m_list", "height_gap", "curvature"]
    pts = [(b, h) for b in cfg.beta_grid for h in cfg.h_grid]

    def one(bh):
        lnd = classify_point(ModelParams(bh[0], bh[1], cfg.p), cfg.tol_height, cfg.tol_curv)
        m_list = ";".join(fmt(m) for m in lnd.maximizer_locations)
        return (bh[0], bh[1], lnd.classification, m_list, lnd.height_gap, lnd.curvature)

    out.rows = _pmap(cfg, one, pts)


def _default_grid(cls, N, c_const, n=21):
    return [float(v) for v in np.linspace(0.0, x_max(cls, N, c_const), n)]


def cmd_md_ratio(cfg, out):
    cfg.require("n_list")
    lnd = _landscape(cfg)
    grid = cfg.x_grid or _default_grid(lnd.classification, cfg.n_list[0], cfg.c_const)
    out.note("regime", lnd.classification)
    out.columns = ["N", "x", "r", "tail_exact", "tail_limit", "ratio", "normalized_error", "flagged"]

    def one(N):
        return md_report(build_law(lnd.params.with_N(N)), lnd, grid, r=cfg.r, k=cfg.k_index, c_const=cfg.c_const)

    reps = _pmap(cfg, one, cfg.n_list)
    for rep in reps:
        out.note(f"max_normalized_error[N={rep.N}]", rep.max_normalized_error())
        out.rows.extend(rep.rows())


def cmd_be(cfg, out):
    cfg.require("n_list")
    lnd = _landscape(cfg)
    d = _pmap(cfg, lambda N: be_distance(lnd, N, cfg.k_index), cfg.n_list)
    rep = rate_report(cfg.n_list, d)
    out.note("regime", lnd.classification)
    if rep.slope is not None:
        out.note("slope", rep.slope)
        out.note("fit_residual", rep.residual)
    out.columns = ["N", "kolmogorov_distance"]
    out.rows = list(rep.rows())


def cmd_stein(cfg, out):
    cfg.require("n_list")
    lnd = _landscape(cfg)
    if lnd.classification == "special":
        raise RegimeError("the exchangeable-pair constants need H''(m) < 0; (beta, h) is a special point")
    mx = lnd.global_maximizers[cfg.k_index]
    cond = lnd.neighborhood(cfg.k_index)
    out.note("m", mx.m)
    out.columns = ["N", "K", "sigma2", "lambda", "delta", "theta", "delta1", "delta2", "alpha", "drift_discrepancy", "B_hat"]

    def one(N):
        law = build_law(lnd.params.with_N(N))
        pc = hypothesis_constants(law, mx.m, cond, cfg.k_const)
        dr = drift_check(law, mx.m, cond, window=pc.K / math.sqrt(-mx.second_deriv))
        return (N, pc.K, pc.sigma2, pc.lam, pc.delta, pc.theta_hat, pc.delta1_hat, pc.delta2_hat, pc.alpha,
                dr.max_interior_discrepancy, dr.B_hat)

    out.rows = _pmap(cfg, one, cfg.n_list)


def _special_ctx(cfg):
    cfg.require("p")
    sps = special_points(cfg.p)
    if cfg.beta is not None and cfg.h is not None:
        sp = min(sps, key=lambda s: abs(s.beta - cfg.beta) + abs(s.h - cfg.h))
        if abs(sp.beta - cfg.beta) + abs(sp.h - cfg.h) > 1e-6:
            raise RegimeError(f"(beta, h) = ({cfg.beta}, {cfg.h}) is not a special point of p={cfg.p}")
    else:
        sp = max(sps, key=lambda s: s.h)
    return LaplaceContext.from_special(sp)


def cmd_laplace(cfg, out):
    cfg.require("n_list")
    ctx = _special_ctx(cfg)
    xs = cfg.x_grid or [0.0, 0.5, 1.0, 2.0]
    out.note("special_point", f"beta={fmt(ctx.params.beta)} h={fmt(ctx.params.h)} m_star={fmt(ctx.m_star)}")
    out.note("variant", cfg.variant)
    out.columns = ["N", "x", "A_N", "B_N", "laplace_BN", "B_Nx", "laplace_BNx", "one_term", "bound", "K_fit"]

    def one(N):
        rows = []
        for x in xs:
            ps = partial_sums(ctx, N, x)
            ap = laplace_BNx(ctx, N, x, cfg.variant)
            rows.append((N, x, ps.A_N, ps.B_N, laplace_BN(ctx, N), ps.B_N_x, ap.estimate, ap.one_term, ap.bound,
                         abs(ap.estimate - ps.B_N_x) / ap.bound))
        return rows

    for rows in _pmap(cfg, one, cfg.n_list):
        out.rows.extend(rows)


def cmd_mpl(cfg, out):
    cfg.require("n_list")
    if cfg.h is None:
        cfg.h = 0.0
    rep = mpl_be_experiment(cfg.params(), cfg.n_list, cfg.n_rep, cfg.seed)
    out.note("m_star", rep.extra["m_star"])
    out.note("asymptotic_variance", rep.extra["variance"])
    if rep.slope is not None:
        out.note("slope_vs_N_over_logN", rep.slope)
        out.note("fit_residual", rep.residual)
    cols = ["N", "kolmogorov_distance"]
    mc = rep.extra.get("mc_distance")
    if mc:
        cols.append("mc_distance")
    out.columns = cols
    out.rows = [(n, d) + ((mc[i],) if mc else ()) for i, (n, d) in enumerate(rep.rows())]


def cmd_sample(cfg, out):
    cfg.require("n_list")
    N = cfg.n_list[0]
    prm = cfg.params(N)
    S = run_chains(prm, cfg.seed, cfg.n_chains, cfg.n_samples, cfg.burn_in)
    emp = empirical_law(S, N)
    exact = (brute_force_pmf(prm) if N <= 12 else build_law(prm)).probs
    out.note("N", N)
    out.note("samples", S.size)
    out.note("total_variation", total_variation(emp, exact))
    out.columns = ["k", "S", "empirical", "exact"]
    out.rows = [(k, 2 * k - N, emp[k], exact[k]) for k in range(N + 1)]


def cmd_special(cfg, out):
    cfg.require("p")
    out.columns = ["p", "beta", "h", "m_star", "H4", "res_H1", "res_H2", "res_H3"]
    out.rows = [(s.p, s.beta, s.h, s.m_star, s.fourth_deriv) + tuple(s.residuals) for s in special_points(cfg.p)]


def cmd_critical_curve(cfg, out):
    cfg.require("p", "beta_grid")
    out.columns = ["beta", "h", "m_low", "m_high", "present"]
    out.rows = [(c.beta, c.h, c.m_low, c.m_high, c.present) for c in critical_curve(cfg.p, cfg.beta_grid)]


def cmd_beta_star(cfg, out):
    cfg.require("p")
    out.columns = ["p", "beta_star"]
    out.rows = [(cfg.p, beta_star(cfg.p))]


HANDLERS = {
    "classify": cmd_classify, "phase-diagram": cmd_phase_diagram, "md-ratio": cmd_md_ratio,
    "be": cmd_be, "stein": cmd_stein, "laplace": cmd_laplace, "mpl": cmd_mpl,
    "sample": cmd_sample, "special": cmd_special, "critical-curve": cmd_critical_curve,
    "beta-star": cmd_beta_star,
}


def run(argv: Optional[List[str]] = None, stdout=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = sys.stdout if stdout is None else stdout
    try:
        ns = build_parser().parse_args(argv)
        cfg = resolve_config(ns)
        out = Output(cfg, argv)
        HANDLERS[ns.command](cfg, out)
    except ConfigError as exc:
        print(f"spinlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RegimeError as exc:
        print(f"spinlab: regime mismatch: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except DomainError as exc:
        print(f"spinlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, SpinlabError, ArithmeticError, RuntimeError) as exc:
        print(f"spinlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = out.render()
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(argv))
