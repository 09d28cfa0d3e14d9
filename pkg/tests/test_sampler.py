import math

import numpy as np
import pytest
from scipy import stats

from spinlab.errors import DomainError
from spinlab.exact import build_law
from spinlab.model import ModelParams
from spinlab.sampler import (
    ChainState,
    empirical_law,
    glauber_sweep,
    make_rng,
    pair_counts,
    resample_site,
    run_chain,
    run_chains,
    sample_magnetization,
    split_rngs,
    total_variation,
)
from spinlab.stein import sigma


def test_same_seed_same_stream():
    a = sample_magnetization(build_law(ModelParams(0.5, 0.3, 3, 50)), make_rng(7), 100)
    b = sample_magnetization(build_law(ModelParams(0.5, 0.3, 3, 50)), make_rng(7), 100)
    assert np.array_equal(a, b)
    r1, r2 = split_rngs(7, 2)
    assert r1.random() != r2.random()


def test_degenerate_law():
    # h large: essentially all mass at xbar = 1
    law = build_law(ModelParams(0.1, 40.0, 3, 20))
    x = sample_magnetization(law, make_rng(1), 1000)
    assert np.all(x == 1.0)
    with pytest.raises(DomainError):
        sample_magnetization(law, make_rng(1), -1)


def test_exact_sampler_mean_within_3se():
    law = build_law(ModelParams(0.5, 0.3, 3, 200))
    x = sample_magnetization(law, make_rng(11), 20000)
    mean = float(np.sum(law.probs * law.support))
    sd = math.sqrt(float(np.sum(law.probs * law.support**2)) - mean**2)
    assert abs(x.mean() - mean) < 3 * sd / math.sqrt(x.size)


def test_near_zero_beta_is_binomial():
    N = 30
    law = build_law(ModelParams(1e-12, 0.2, 3, N))
    k = ((sample_magnetization(law, make_rng(3), 40000) * N).round().astype(int) + N) // 2
    q = math.exp(0.2) / (2 * math.cosh(0.2))
    obs = np.bincount(k, minlength=N + 1)
    exp = stats.binom.pmf(np.arange(N + 1), N, q) * k.size
    keep = exp > 5
    chi2 = np.sum((obs[keep] - exp[keep]) ** 2 / exp[keep])
    assert stats.chi2.sf(chi2, keep.sum() - 1) > 1e-3


def test_chain_state_tracks_sum():
    st = ChainState.random_start(40, make_rng(2), debug=True)
    prm = ModelParams(0.5, 0.3, 3, 40)
    glauber_sweep(st, prm, 60)
    st.check()
    for _ in range(2000):
        st, i, old, new = resample_site(st, prm)
        assert st.spins[i] == new
    st.check()
    with pytest.raises(DomainError):
        ChainState(np.array([1, 0, 1]), make_rng(0))
    with pytest.raises(DomainError):
        ChainState(np.array([1, 1]), make_rng(0), S=0)


def test_check_detects_drift():
    st = ChainState(np.ones(5), make_rng(0))
    st.S = 3
    with pytest.raises(AssertionError):
        st.check()


def test_run_chain_reproducible():
    prm = ModelParams(0.5, 0.3, 3, 20)
    assert np.array_equal(run_chain(prm, 5, 50, burn_in=10), run_chain(prm, 5, 50, burn_in=10))
    assert np.array_equal(run_chains(prm, 5, 8, 20, burn_in=5), run_chains(prm, 5, 8, 20, burn_in=5))


def test_run_chains_matches_exact_law():
    prm = ModelParams(0.5, 0.3, 3, 10)
    S = run_chains(prm, 0, 200, 200, burn_in=200)
    assert S.shape == (200, 200)
    tv = total_variation(empirical_law(S, 10), build_law(prm).probs)
    assert tv < 0.02


def test_pair_is_exchangeable():
    prm = ModelParams(0.5, 0.3, 3, 12)
    c = pair_counts(prm, 4, 400000, burn_in=200)
    # every step moves S by at most 2, i.e. k by at most 1
    ks = np.nonzero(c)
    assert np.all(np.abs(ks[0] - ks[1]) <= 1)
    off = [(k, k + 1) for k in range(12) if c[k, k + 1] + c[k + 1, k] > 50]
    up = np.array([c[a, b] for a, b in off], dtype=float)
    dn = np.array([c[b, a] for a, b in off], dtype=float)
    chi2 = np.sum((up - dn) ** 2 / (up + dn))
    assert stats.chi2.sf(chi2, len(off)) > 1e-3


def test_pair_step_size_in_T_units():
    prm = ModelParams(0.5, 0.3, 3)
    N = 12
    c = pair_counts(prm.with_N(N), 4, 20000, burn_in=100)
    s = sigma(prm, 0.914534952759507, N)
    ks = np.nonzero(c)
    dT = np.abs(2 * (ks[0] - ks[1])) / s
    assert np.all(dT <= 2 / s + 1e-15)
