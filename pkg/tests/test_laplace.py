import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spinlab.errors import DomainError
from spinlab.exact import TailQuery, build_law, tail_prob
from spinlab.laplace import (
    LaplaceContext,
    bn_scaled_error,
    changeover_D,
    fit_bnx_constant,
    full_integral_p1,
    kernels,
    laplace_BN,
    laplace_BNx,
    log_y_weights,
    partial_sums,
    tail_integrals,
    y_weight,
)
from spinlab.model import ModelParams


@pytest.fixture(scope="module")
def ctx(special3):
    return LaplaceContext.from_special(special3)


def test_context_constants(ctx):
    assert ctx.c == pytest.approx(13.5 / 24, rel=1e-12)
    assert ctx.H5 == pytest.approx(-93.53074360871935, rel=1e-10)
    assert ctx.linear_coef == pytest.approx(ctx.m_star / (1 - ctx.m_star**2))


def test_context_rejects_regular_point():
    with pytest.raises(DomainError):
        LaplaceContext(ModelParams(0.5, 0.3, 3), 0.9, -1.0, 0.0)


def test_y_weight_matches_vector(ctx):
    m, ly = log_y_weights(ctx, 1000)
    for k in [0, 10, 500, 788, 1000]:
        assert y_weight(ctx, 1000, m[k]) == pytest.approx(ly[k], rel=1e-12, abs=1e-10)
    with pytest.raises(DomainError):
        y_weight(ctx, 1000, 0.0005)


def test_y_weight_order_one_at_center(ctx):
    # y at the atom nearest m* tends to 1 (Stirling); it is O(1) at moderate N
    m, ly = log_y_weights(ctx, 16000)
    k = int(np.argmin(np.abs(m - ctx.m_star)))
    assert abs(ly[k]) < 0.05


@pytest.mark.parametrize("N", [1000, 4000])
def test_partition_identity(ctx, N):
    ps = partial_sums(ctx, N, 0.5)
    total = np.logaddexp(ps.log_A, ps.log_B)
    assert abs(total - ps.log_total) <= 1e-12 * max(1.0, abs(ps.log_total))
    assert ps.A_hat_N <= ps.A_N
    assert ps.B_N_x <= ps.B_N


@pytest.mark.parametrize("x", [0.0, 0.5, 1.0, 2.0])
def test_reconstruction_matches_tail_prob(ctx, x):
    N = 4000
    law = build_law(ctx.params.with_N(N))
    direct = tail_prob(law, TailQuery(ctx.m_star, 0.75, 0, x))
    assert partial_sums(ctx, N, x).tail_probability() == pytest.approx(direct, rel=1e-12)


def test_mirror_sums(ctx):
    N = 4000
    law = build_law(ctx.params.with_N(N))
    direct = tail_prob(law, TailQuery(ctx.m_star, 0.75, 1, 0.5))
    assert partial_sums(ctx, N, 0.5, r=1).tail_probability() == pytest.approx(direct, rel=1e-12)


@pytest.mark.parametrize("x", [0.0, 0.5, 1.0, 2.0])
def test_tail_integrals_gamma_vs_quad(ctx, x):
    for variant in ("t5", "t4"):
        g = tail_integrals(ctx, x, 1000, "gamma", variant)
        q = tail_integrals(ctx, x, 1000, "quad", variant)
        assert g == pytest.approx(q, rel=1e-10, abs=1e-15)


def test_kernels(ctx):
    p1, p2, r = kernels(ctx, 0.0, 1000)
    assert p1 == 1.0 and p2 == 0.0 and r == pytest.approx(1000**-0.5)
    t = np.array([-1.0, 1.0])
    p1, p2, r = kernels(ctx, t, 1000)
    assert p1[0] == p1[1] and p2[0] == -p2[1] and r[0] == r[1]
    with pytest.raises(DomainError):
        kernels(ctx, 0.0, 10, "other")


@given(st.floats(0.0, 3.0))
def test_envelope_dominates_p1_small_powers(x):
    from spinlab.landscape import special_points

    c = LaplaceContext.from_special(special_points(3)[0])
    p1, _, r = kernels(c, x, 1000)
    assert r >= p1 * x**2 - 1e-300


def test_full_integral(ctx):
    assert full_integral_p1(ctx) == pytest.approx(2 * tail_integrals(ctx, 0.0, 1000)[0], rel=1e-14)


def test_laplace_BN_band(ctx):
    errs = [bn_scaled_error(ctx, N) for N in (1000, 4000, 16000)]
    assert max(errs) / min(errs) <= 3.0
    assert laplace_BN(ctx, 1000) == pytest.approx(partial_sums(ctx, 1000).B_N, rel=0.02)


def test_two_term_beats_one_term_near_center(ctx):
    for N in (1000, 4000):
        ps = partial_sums(ctx, N, 0.0)
        ap = laplace_BNx(ctx, N, 0.0)
        assert abs(ap.estimate - ps.B_N_x) < abs(ap.one_term - ps.B_N_x)


def test_fitted_constant_and_changeover(ctx):
    K = fit_bnx_constant(ctx, [1000, 4000], [0.0, 0.5, 1.0, 2.0])
    assert K <= 10
    assert changeover_D(ctx, 1000, [0.0, 0.5, 1.0, 2.0], K=10.0) == 0.0
    ap = laplace_BNx(ctx, 1000, 1.0)
    assert ap.far_term == pytest.approx(math.exp(-(1000 ** (3.9 * 0.24))))


def test_negative_x_rejected(ctx):
    with pytest.raises(DomainError):
        partial_sums(ctx, 100, -1.0)
    with pytest.raises(DomainError):
        laplace_BNx(ctx, 100, -1.0)
