import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spinlab.landscape import (
    CRITICAL,
    REGULAR,
    SPECIAL,
    beta_star,
    classify_point,
    critical_curve,
    find_stationary,
    special_points,
    sup_H_on_unit,
)
from spinlab.model import H_eval, ModelParams, fixed_point_map, free_energy


@given(st.floats(0.05, 1.5), st.floats(-0.8, 0.8), st.sampled_from([2, 3, 4, 5]))
def test_stationary_points_are_fixed_points(beta, h, p):
    prm = ModelParams(beta, h, p)
    for m in find_stationary(prm):
        assert abs(m - fixed_point_map(prm, m)) <= 1e-10


def test_sign_changes_bracket_every_root():
    # beta=1, h=0, p=2: roots at 0 and +-0.9575040240772687
    roots = find_stationary(ModelParams(1.0, 0.0, 2))
    assert len(roots) == 3
    assert roots[2] == pytest.approx(0.9575040240772687, abs=1e-13)


def test_regular_point():
    lnd = classify_point(ModelParams(0.5, 0.3, 3))
    assert lnd.classification == REGULAR
    assert lnd.K == 1
    assert lnd.top.second_deriv < 0
    assert lnd.neighborhood(0) == (-math.inf, math.inf)


def test_regular_dense_grid_certificate():
    prm = ModelParams(0.5, 0.3, 3)
    lnd = classify_point(prm)
    grid = np.linspace(-1, 1, 100_001)
    assert np.max(free_energy(prm, grid)) <= lnd.top.H_value + 1e-12


def test_critical_point_p3():
    lnd = classify_point(ModelParams(0.6, 0.06559579005633871, 3))
    assert lnd.classification == CRITICAL
    assert lnd.maximizer_locations == pytest.approx([0.07578944813006154, 0.9200277781740859], abs=1e-8)
    lo, hi = lnd.neighborhood(1)
    assert lo == pytest.approx(0.5 * (0.07578944813006154 + 0.9200277781740859), abs=1e-8)
    assert hi == math.inf


def test_special_point_classified(special3):
    lnd = classify_point(special3.params())
    assert lnd.classification == SPECIAL
    assert lnd.top.m == pytest.approx(1 / math.sqrt(3), abs=1e-9)
    assert lnd.top.fourth_deriv == pytest.approx(-13.5, rel=1e-6)


@pytest.mark.parametrize(
    "p, beta, h, m",
    [
        (3, 0.4330127018922193, 0.2254662465701891, 0.5773502691896257),
        (5, 0.26895717681995945, 0.5475956161718532, 0.7745966692414833),
    ],
)
def test_special_points_closed_form(p, beta, h, m):
    sps = special_points(p)
    sp = min(sps, key=lambda s: abs(s.m_star - m))
    assert sp.beta == pytest.approx(beta, abs=1e-12)
    assert sp.h == pytest.approx(h, abs=1e-12)
    assert sp.m_star == pytest.approx(m, abs=1e-10)
    assert sp.fourth_deriv < 0
    assert max(abs(r) for r in sp.residuals) <= 1e-10


def test_special_points_p4_symmetric_pair():
    sps = sorted(special_points(4), key=lambda s: s.h)
    assert len(sps) == 2
    assert sps[0].beta == pytest.approx(1 / 3, abs=1e-12)
    assert sps[0].h == pytest.approx(-sps[1].h, abs=1e-12)
    assert sps[1].h == pytest.approx(0.4099690662285114, abs=1e-12)
    assert sps[0].m_star == pytest.approx(-sps[1].m_star, abs=1e-10)


def test_critical_curve_p3_frozen():
    pts = critical_curve(3, [0.44, 0.5, 0.6])
    assert [c.present for c in pts] == [True, True, True]
    assert pts[0].h == pytest.approx(0.2184938502443355, abs=1e-9)
    assert pts[0].m_low == pytest.approx(0.4702703693269525, abs=1e-8)
    assert pts[0].m_high == pytest.approx(0.6758464780086016, abs=1e-8)
    assert pts[1].h == pytest.approx(0.1597537604260954, abs=1e-9)
    assert pts[2].h == pytest.approx(0.06559579005633871, abs=1e-9)


def test_critical_curve_points_have_equal_heights():
    for c in critical_curve(3, [0.45, 0.55, 0.65]):
        prm = ModelParams(c.beta, c.h, 3)
        assert abs(H_eval(prm, c.m_low, 0)[0] - H_eval(prm, c.m_high, 0)[0]) < 1e-10


@pytest.mark.parametrize(
    "p, value",
    [(3, 0.672084786044659), (4, 0.6888013739757366), (5, 0.6921327368029773), (6, 0.692899802133053)],
)
def test_beta_star_frozen(p, value):
    assert beta_star(p) == pytest.approx(value, abs=1e-9)


def test_beta_star_brackets_sign_change():
    b = beta_star(3)
    assert sup_H_on_unit(b - 1e-6, 3) <= 0
    assert sup_H_on_unit(b + 1e-6, 3) > 0
    assert b < math.log(2)


def test_landscape_to_dict_roundtrip_fields():
    d = classify_point(ModelParams(0.5, 0.3, 3)).to_dict()
    assert d["classification"] == REGULAR
    assert d["K"] == 1
    assert set(d["global_maximizers"][0]) == {"m", "H", "H2", "H4"}
