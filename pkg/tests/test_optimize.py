import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from mdsearch.channels import ChannelModel, MonotonicityWarning
from mdsearch.infotheory import mutual_information
from mdsearch.optimize import (
    OptimumReport,
    capacity,
    curve_to_csv,
    mi_curve,
    optimal_query_size,
    phase2_functional,
)

# fixed before the build by a brute-force 1e-6 grid over (0, 1/2]
FIG3_Q_STAR = 0.149998
FIG3_I_STAR = 0.14138353326


def _brute_q_star(a, b, step):
    qs = np.arange(1, int(0.5 / step) + 1) * step
    vals = [oracles.bsc_mi(q, a * q + b) for q in qs]
    i = int(np.argmax(vals))
    return qs[i], vals[i]


def test_measurement_independent_bsc(bsc01):
    rep = optimal_query_size(bsc01)
    assert rep.q_star == 0.5
    assert rep.value == pytest.approx(0.531004406410719, abs=1e-12)
    assert rep.boundary_hit


def test_fig3_interior_optimum(fig3):
    rep = optimal_query_size(fig3)
    assert not rep.boundary_hit
    assert rep.q_star == pytest.approx(FIG3_Q_STAR, abs=1e-5)
    assert rep.value == pytest.approx(FIG3_I_STAR, abs=1e-10)
    assert rep.value > mutual_information(0.01, 0.01, fig3)
    assert rep.value > mutual_information(0.5, 0.5, fig3)


def test_oracle_small_grid():
    q, v = _brute_q_star(0.4, 0.05, 1e-4)
    rep = optimal_query_size(ChannelModel.linear_bsc(0.4, 0.05))
    assert rep.value >= v - 1e-12
    assert rep.q_star == pytest.approx(q, abs=2e-4)


def test_gaussian_boundary_reported():
    with pytest.warns(MonotonicityWarning):
        m = ChannelModel.gaussian_pair(0.1, 0.0, 5.0, require_monotone=False)
    rep = optimal_query_size(m)
    assert rep.q_star <= 0.5
    if rep.q_star == 0.5:
        assert rep.boundary_hit


def test_grid_halving_stability(fig3):
    a = optimal_query_size(fig3, 1e-3).q_star
    b = optimal_query_size(fig3, 5e-4).q_star
    assert abs(a - b) < 1e-4


def test_report_json_roundtrip(fig3):
    rep = optimal_query_size(fig3)
    assert OptimumReport.from_json(rep.to_json()) == rep


def test_capacity_examples(fig3):
    assert capacity(fig3, 0.0) == pytest.approx(1 - oracles.h2(0.1), abs=1e-12)
    assert capacity(ChannelModel.linear_bsc(0, 0), 0.3) == 1.0
    with pytest.raises(ValueError):
        capacity(fig3, 1.5)


def test_gaussian_capacity_is_max_over_p():
    m = ChannelModel.gaussian_pair(1.0, 0.5, 1.0)
    cap, p = capacity(m, 0.2, return_p=True)
    for pp in np.linspace(0.05, 0.95, 19):
        assert cap >= mutual_information(pp, 0.2, m) - 1e-9
    assert 0 < p < 1


@given(q=st.floats(0, 0.5))
def test_bsc_capacity_dominates_functional(q):
    m = ChannelModel.linear_bsc(0.7, 0.1)
    assert capacity(m, q) >= mutual_information(q, q, m) - 1e-12


def test_mi_curve_endpoints(fig3, bsc01):
    c = mi_curve(fig3)
    assert c[0] == (0.0, 0.0)
    assert c[-1][0] == 0.5
    assert c[-1][1] == pytest.approx(0.0072255460, abs=1e-6)
    vals = [v for _, v in mi_curve(bsc01)]
    assert np.all(np.diff(vals) >= -1e-15)
    text = curve_to_csv(c[:3])
    assert text.splitlines()[0] == "q,mi_bits"


def test_phase2_functional(fig3):
    q, v = phase2_functional(fig3, 0.1)
    assert v == pytest.approx(0.43470, abs=1e-4)
    assert q == pytest.approx(0.44005, abs=1e-3)
    # the zoomed channel is better than the plain functional's optimum
    assert v > FIG3_I_STAR
