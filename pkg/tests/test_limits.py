import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special
from scipy.integrate import quad

from spinlab.errors import DomainError, RegimeError
from spinlab.exact import build_law
from spinlab.landscape import classify_point
from spinlab.limits import (
    DiscreteLaw,
    GaussianLaw,
    MixtureLaw,
    QuarticLaw,
    correction_G,
    gaussian_cdf,
    gaussian_survival,
    incomplete_gamma_upper,
    log_incomplete_gamma_upper,
    md_report,
    power_tail,
    quartic_cdf,
    quartic_survival,
    x_max,
)
from spinlab.model import H_eval, ModelParams


@pytest.mark.parametrize("x", [-8.0, -1.0, 0.0, 0.5, 3.0, 5.5, 8.0])
def test_gaussian_against_mpmath(x):
    assert gaussian_cdf(x) == pytest.approx(float(mp.ncdf(x)), rel=1e-14, abs=1e-300)
    assert gaussian_survival(x) == pytest.approx(float(mp.ncdf(-x)), rel=1e-14, abs=1e-300)
    if abs(x) <= 8:
        assert gaussian_survival(x) + gaussian_cdf(x) == pytest.approx(1.0, abs=1e-15)


def test_gaussian_survival_three():
    ref = mp.erfc(3 / mp.sqrt(2)) / 2
    assert gaussian_survival(3.0) == pytest.approx(float(ref), rel=1e-14)


@given(st.floats(0.05, 2.0), st.floats(0.0, 60.0))
def test_incomplete_gamma_against_mpmath(a, z):
    ref = mp.gammainc(a, z, mp.inf)
    assert incomplete_gamma_upper(a, z) == pytest.approx(float(ref), rel=1e-13)


@given(st.floats(0.05, 2.0), st.floats(0.0, 600.0))
def test_incomplete_gamma_against_scipy(a, z):
    ref = special.gammaincc(a, z) * special.gamma(a)
    if ref > 1e-290:
        assert incomplete_gamma_upper(a, z) == pytest.approx(ref, rel=1e-12)


def test_log_incomplete_gamma_no_underflow():
    v = log_incomplete_gamma_upper(0.25, 2000.0)
    assert v == pytest.approx(float(mp.log(mp.gammainc(0.25, 2000, mp.inf))), rel=1e-13)


def test_incomplete_gamma_special_values():
    assert incomplete_gamma_upper(0.25, 0.0) == pytest.approx(math.gamma(0.25), rel=1e-15)
    assert incomplete_gamma_upper(1.0, 3.0) == pytest.approx(math.exp(-3.0), rel=1e-14)
    ref = quad(lambda t: t**-0.75 * math.exp(-t), 2.0, np.inf, epsabs=0, epsrel=1e-13)[0]
    assert incomplete_gamma_upper(0.25, 2.0) == pytest.approx(ref, rel=1e-11)


def test_incomplete_gamma_domain():
    with pytest.raises(DomainError):
        incomplete_gamma_upper(0.0, 1.0)
    with pytest.raises(DomainError):
        incomplete_gamma_upper(0.5, -1.0)


@pytest.mark.parametrize("k", [0, 1, 2, 5, 6, 10, 11])
@pytest.mark.parametrize("x", [-1.5, 0.0, 0.7, 2.0])
def test_power_tail_against_quadrature(k, x):
    c = 0.5625
    ref = quad(lambda t: abs(t) ** k * math.exp(-c * t**4), x, np.inf, epsabs=0, epsrel=1e-13)[0]
    assert power_tail(c, k, x, absolute=True) == pytest.approx(ref, rel=1e-11)
    if k % 2:
        ref = quad(lambda t: t**k * math.exp(-c * t**4), x, np.inf, epsabs=0, epsrel=1e-13)[0]
        assert power_tail(c, k, x) == pytest.approx(ref, rel=1e-10, abs=1e-14)


def test_quartic_law_normalization_and_cdf(special3):
    law = QuarticLaw.from_H4(special3.fourth_deriv)
    total = quad(law.pdf, -np.inf, np.inf, epsabs=0, epsrel=1e-13)[0]
    assert abs(total - 1) <= 1e-10
    for x in [0.0, 0.5, 1.0, 2.0]:
        ref = quad(law.pdf, -np.inf, x, epsabs=0, epsrel=1e-13)[0]
        assert abs(quartic_cdf(law, x) - ref) <= 1e-10
        assert quartic_survival(law, x) + quartic_cdf(law, x) == pytest.approx(1.0, abs=1e-15)
    assert quartic_cdf(law, 0.0) == pytest.approx(0.5, abs=1e-15)


def test_quartic_law_rejects_nonnegative_H4():
    with pytest.raises(DomainError):
        QuarticLaw.from_H4(0.0)


def test_correction_G_bounded_ratio(special3):
    b = H_eval(special3.params(), special3.m_star, 5)
    law = QuarticLaw.from_H4(b[4])
    xs = np.linspace(0, 10, 401)
    G = correction_G(law, special3.m_star, b[5], xs)
    assert np.all(np.isfinite(G))
    assert np.max(np.abs(G) / (1 + xs**5)) < 5.0
    # direct quadrature at a moderate point
    c = law.c
    p1 = quad(lambda t: math.exp(-c * t**4), 1.0, np.inf)[0]
    p2 = quad(lambda t: math.exp(-c * t**4) * (b[5] / 120 * t**5 + special3.m_star / (1 - special3.m_star**2) * t), 1.0, np.inf)[0]
    assert correction_G(law, special3.m_star, b[5], 1.0) == pytest.approx(p2 / p1, rel=1e-10)


def test_mixture_and_discrete_laws():
    mix = MixtureLaw((0.1, 0.9), (0.4, 0.6))
    assert mix.cdf(0.1) == pytest.approx(0.4) and mix.cdf_left(0.1) == 0.0
    with pytest.raises(DomainError):
        MixtureLaw((0.0,), (0.5,))
    law = build_law(ModelParams(0.5, 0.3, 3, 30))
    d = DiscreteLaw.from_law(law, 0.0, 30.0)
    assert d.cdf(1.0) == pytest.approx(1.0)
    assert d.survival(-2.0)[0] == pytest.approx(1.0)


def test_md_report_regular():
    lnd = classify_point(ModelParams(0.5, 0.3, 3))
    law = build_law(lnd.params.with_N(500))
    grid = np.linspace(0, x_max(lnd.classification, 500), 11)
    rep = md_report(law, lnd, grid)
    assert rep.q == 3 and not rep.flagged.any()
    assert np.all(np.abs(rep.ratio - 1) < 0.5)
    assert len(list(rep.rows())) == 11


def test_md_report_guards():
    lnd = classify_point(ModelParams(0.5, 0.3, 3))
    law = build_law(lnd.params.with_N(500))
    with pytest.raises(RegimeError):
        md_report(law, lnd, [0.0], regime="special")
    with pytest.raises(DomainError):
        md_report(law, lnd, [5.0])
    rep = md_report(law, lnd, [40.0], c_const=None)
    assert rep.flagged.all()


def test_gaussian_law_validation():
    with pytest.raises(DomainError):
        GaussianLaw(0.0, 0.0)
