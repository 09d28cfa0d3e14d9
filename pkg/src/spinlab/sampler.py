"""Sampling: exact draws of xbar, random-scan Glauber dynamics and single-site resampling.

All randomness comes from numpy ``Generator`` objects on the PCG64 bit
generator (128-bit state).  Independent streams are derived from a master
seed by ``SeedSequence(seed).spawn(n)``: stream j is child j.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .errors import DomainError
from .exact import MagnetizationLaw
from .model import ModelParams
from .stein import _exact_up_prob

RNG_ALGORITHM = "PCG64"
CHECK_EVERY = 2**10


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator from an int seed or a SeedSequence."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return np.random.Generator(np.random.PCG64(ss))


def split_rngs(seed, n: int) -> list:
    """n independent generators: child j of SeedSequence(seed)."""
    return [make_rng(child) for child in np.random.SeedSequence(seed).spawn(n)]


def sample_magnetization(law: MagnetizationLaw, rng: np.random.Generator, n_samples: int) -> np.ndarray:
    """i.i.d. draws of xbar by inverse CDF (binary search over cumulative atom weights)."""
    if n_samples < 0:
        raise DomainError("n_samples must be nonnegative")
    cdf = np.cumsum(law.probs)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, rng.random(n_samples), side="right")
    # guard against u landing exactly on the last cumulative value
    np.minimum(idx, law.N, out=idx)
    return law.support[idx]


def _up_table(params: ModelParams, N: int) -> list:
    """P(X_i = +1 | S_-i = s) for s = -(N-1), ..., N-1, indexed by s + N - 1."""
    s = np.arange(-(N - 1), N, dtype=float)
    return [float(v) for v in _exact_up_prob(params, N, s)]


@dataclass
class ChainState:
    """Spin configuration with incrementally maintained S; single owner."""

    spins: np.ndarray
    rng: np.random.Generator
    S: int = field(default=None)
    sweeps_done: int = 0
    debug: bool = False
    _updates: int = 0

    def __post_init__(self):
        self.spins = np.asarray(self.spins, dtype=np.int8).copy()
        if self.spins.ndim != 1 or not np.all(np.abs(self.spins) == 1):
            raise DomainError("spins must be a 1-d vector of +-1")
        total = int(np.sum(self.spins, dtype=np.int64))
        if self.S is None:
            self.S = total
        elif self.S != total:
            raise DomainError("S does not match the spins")

    @property
    def N(self) -> int:
        return self.spins.size

    @classmethod
    def random_start(cls, N: int, rng: np.random.Generator, **kw) -> "ChainState":
        return cls(rng.choice(np.array([-1, 1], dtype=np.int8), size=N), rng, **kw)

    def check(self) -> None:
        if self.S != int(np.sum(self.spins, dtype=np.int64)):
            raise AssertionError("incremental S drifted from the spin sum")


def resample_site(state: ChainState, params: ModelParams, table: Optional[list] = None) -> Tuple[ChainState, int, int, int]:
    """Pick a uniform site and redraw it from its Gibbs conditional; returns (state, site, old, new)."""
    N = state.N
    table = _up_table(params, N) if table is None else table
    i = int(state.rng.integers(N))
    old = int(state.spins[i])
    s_rest = state.S - old
    new = 1 if state.rng.random() < table[s_rest + N - 1] else -1
    if new != old:
        state.spins[i] = new
        state.S = s_rest + new
    state._updates += 1
    if state.debug and state._updates % CHECK_EVERY == 0:
        state.check()
    return state, i, old, new


def glauber_sweep(state: ChainState, params: ModelParams, n_sweeps: int = 1, table: Optional[list] = None) -> ChainState:
    """N random-scan heat-bath updates per sweep; reversible for the Gibbs measure."""
    N = state.N
    table = _up_table(params, N) if table is None else table
    spins = state.spins
    S = state.S
    for _ in range(n_sweeps):
        sites = state.rng.integers(N, size=N).tolist()
        us = state.rng.random(N).tolist()
        for i, u in zip(sites, us):
            old = int(spins[i])
            s_rest = S - old
            new = 1 if u < table[s_rest + N - 1] else -1
            if new != old:
                spins[i] = new
                S = s_rest + new
            state._updates += 1
            if state.debug and state._updates % CHECK_EVERY == 0:
                state.S = S
                state.check()
        state.sweeps_done += 1
    state.S = S
    return state


def run_chain(params: ModelParams, seed, n_samples: int, burn_in: int = 1000, thin: int = 1) -> np.ndarray:
    """S after each of n_samples (thinned) sweeps of one chain started uniformly at random."""
    N = params.require_N()
    rng = make_rng(seed)
    state = ChainState.random_start(N, rng)
    table = _up_table(params, N)
    glauber_sweep(state, params, burn_in, table)
    out = np.empty(n_samples, dtype=np.int64)
    for j in range(n_samples):
        glauber_sweep(state, params, thin, table)
        out[j] = state.S
    return out


def run_chains(
    params: ModelParams, seed, n_chains: int, n_samples: int, burn_in: int = 1000, thin: int = 1
) -> np.ndarray:
    """Independent random-scan chains advanced in lockstep; returns S with shape (n_samples, n_chains).

    Each chain holds a full configuration; one generator (child 0 of the
    master seed) drives the whole batch, so results depend on n_chains.
    """
    N = params.require_N()
    rng = split_rngs(seed, 1)[0]
    up = np.asarray(_up_table(params, N))
    spins = rng.choice(np.array([-1, 1], dtype=np.int8), size=(n_chains, N))
    S = spins.sum(axis=1, dtype=np.int64)
    rows = np.arange(n_chains)

    def sweep():
        nonlocal S
        for _ in range(N):
            i = rng.integers(N, size=n_chains)
            old = spins[rows, i].astype(np.int64)
            s_rest = S - old
            new = np.where(rng.random(n_chains) < up[s_rest + N - 1], 1, -1)
            spins[rows, i] = new
            S = s_rest + new

    for _ in range(burn_in):
        sweep()
    out = np.empty((n_samples, n_chains), dtype=np.int64)
    for j in range(n_samples):
        for _ in range(thin):
            sweep()
        out[j] = S
    if not np.array_equal(S, spins.sum(axis=1, dtype=np.int64)):
        raise AssertionError("incremental S drifted from the spin sum")
    return out


def empirical_law(S_samples, N: int) -> np.ndarray:
    """Frequencies of k = (S + N)/2 over 0..N."""
    k = (np.asarray(S_samples).ravel() + N) // 2
    return np.bincount(k, minlength=N + 1) / k.size


def total_variation(p, q) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))


def pair_counts(params: ModelParams, seed, n_steps: int, burn_in: int = 1000) -> np.ndarray:
    """(N+1) x (N+1) counts of (k, k') over consecutive exchangeable-pair steps of one chain."""
    N = params.require_N()
    rng = make_rng(seed)
    state = ChainState.random_start(N, rng)
    table = _up_table(params, N)
    glauber_sweep(state, params, burn_in, table)
    counts = np.zeros((N + 1, N + 1), dtype=np.int64)
    sites = rng.integers(N, size=n_steps).tolist()
    us = rng.random(n_steps).tolist()
    spins, S = state.spins, state.S
    for i, u in zip(sites, us):
        old = int(spins[i])
        s_rest = S - old
        new = 1 if u < table[s_rest + N - 1] else -1
        S_new = s_rest + new
        counts[(S + N) // 2, (S_new + N) // 2] += 1
        spins[i] = new
        S = S_new
    state.S = S
    return counts
