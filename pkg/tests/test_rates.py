import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hqrepeater.errors import DomainError
from hqrepeater.presets import FIGURES, apply_overrides, fig6a_inner, figure_configs
from hqrepeater.rates import (
    HARDWARE, RepeaterConfig, attempts_avg, attempts_avg_binomial, benchmark_for_length, endpoint_overhead,
    log_attempts_avg, repeater_rate, repeaterless_bound, super_link, t1, t2, t_link, t_swap, t_swap_round,
)
from hqrepeater.swap import iterate_swaps

# 50-digit mpmath evaluations of the alternating binomial sum
A_MPMATH = {
    (2, 0.5): 2.6666666666666666667,
    (5, 0.1): 22.171622659565646488,
    (10, 0.5): 4.7255593236345278430,
    (25, 0.01): 380.18464272008017966,
    (25, 0.9): 2.1778658790104063801,
    (60, 0.1146): 38.949174236328515229,
}

# frozen closed-form outputs
FIG6A_R = 19.855306127390666
FIG6A_A = 38.938429028691324
FIG6A_NBAR = 41.008226245709984
FIG6B_R = 0.0034970614301295406
FIG105_R = 0.0003760638111926333


def test_t1_t2_long_link():
    c = RepeaterConfig(1, 3.5, 0)
    hw = c.hardware
    assert t1(c) == pytest.approx(1 / hw.g + 3 / hw.kappa + 2 * 3500 / 2e8)
    assert t2(c) == pytest.approx(1 / hw.g + 1 / hw.kappa + 3500 / 2e8)
    assert 2 * 3500 / 2e8 == pytest.approx(35e-6)
    c2 = replace(c, L0_km=5.0)
    assert t1(c2) - t1(c) == pytest.approx(2 * 1500 / 2e8)
    assert t2(c2) - t2(c) == pytest.approx(1500 / 2e8)


def test_timing_floor():
    c = RepeaterConfig(1, 0.3, 1)
    assert t1(c) == t2(c) == 10e-6
    assert t_link(c) == pytest.approx(30e-6)
    assert t_link(replace(c, N_rounds=0)) == t1(c)
    c4 = RepeaterConfig(1, 3.5, 4)
    assert t_link(c4) == pytest.approx(16 * t1(c4) + 15 * t2(c4))


def test_t_swap_rounds():
    assert t_swap(RepeaterConfig(1, 0.3)) == 0.0
    assert t_swap(RepeaterConfig(60, 0.3)) == pytest.approx(6 * 10e-6)
    assert t_swap(RepeaterConfig(100, 3.5)) == pytest.approx(7 * t_swap_round(RepeaterConfig(100, 3.5)))


@pytest.mark.parametrize("n,P", sorted(A_MPMATH))
def test_attempts_avg_against_mpmath(n, P):
    assert attempts_avg(n, P) == pytest.approx(A_MPMATH[(n, P)], rel=1e-13)


@pytest.mark.parametrize("n", [1, 2, 5, 10, 17, 25])
@pytest.mark.parametrize("P", [0.9, 0.5, 0.1, 0.01])
def test_series_equals_binomial(n, P):
    a, b = attempts_avg(n, P), attempts_avg_binomial(n, P)
    assert abs(a - b) <= 1e-9 * a


def test_binomial_form_fails_at_moderate_n():
    # the alternating sum loses all precision by n = 60
    a = attempts_avg(60, 0.1146)
    assert abs(attempts_avg_binomial(60, 0.1146) - a) > 1.0


def test_attempts_single_link_and_unit_probability():
    assert attempts_avg(1, 0.2) == pytest.approx(5.0)
    assert attempts_avg(40, 1.0) == 1.0
    with pytest.raises(DomainError):
        attempts_avg(3, 0.0)
    with pytest.raises(DomainError):
        attempts_avg(0, 0.5)


def test_attempts_large_n():
    vals = [attempts_avg(3000, P) for P in (1e-1, 1e-2, 1e-3, 1e-5)]
    assert all(math.isfinite(v) for v in vals)
    assert np.all(np.diff(vals) > 0)
    assert attempts_avg(3000, 1e-2) < attempts_avg(3001, 1e-2)


def test_euler_maclaurin_matches_series():
    for n in (3, 30, 60):
        for P in (1e-3, 1e-4):
            a = attempts_avg(n, P, "series")
            assert attempts_avg(n, P, "euler_maclaurin") == pytest.approx(a, rel=1e-12)


def test_log_attempts_underflow():
    assert log_attempts_avg(10, math.log(0.3)) == pytest.approx(math.log(attempts_avg(10, 0.3)))
    v = log_attempts_avg(10, -800.0)
    assert v == pytest.approx(math.log(sum(1 / k for k in range(1, 11))) + 800.0)


@pytest.mark.property
@given(st.integers(1, 200), st.floats(1e-4, 0.999), st.floats(1e-4, 0.999))
def test_attempts_monotone(n, P1, P2):
    lo, hi = sorted((P1, P2))
    assert attempts_avg(n, hi) <= attempts_avg(n, lo) * (1 + 1e-12)
    assert attempts_avg(n, lo) <= attempts_avg(n + 1, lo) * (1 + 1e-12)


def test_endpoint_overhead_examples():
    assert endpoint_overhead(0.9995) == (0, 1.0, 1.0)
    j, nbar, _ = endpoint_overhead(iterate_swaps(0.999, 6))
    assert j == 2
    assert nbar == pytest.approx(FIG6A_NBAR, rel=1e-12)
    assert abs(nbar - 41) < 0.5
    assert endpoint_overhead(0.9399, 0.1)[0] in (0, 1)
    with pytest.raises(DomainError):
        endpoint_overhead(0.5)


def test_repeaterless_bound():
    chi = 1e-6
    assert repeaterless_bound(chi, 1.0) == pytest.approx(chi / math.log(2) * 2e8 / 2e3, rel=1e-6)
    assert repeaterless_bound(0.5, 0.3) == pytest.approx(2e8 / 600)
    with pytest.raises(DomainError):
        repeaterless_bound(1.0, 0.3)
    assert benchmark_for_length(18.0, 0.8) < benchmark_for_length(18.0, 1.0)


def test_fig6a_anchor():
    rep = repeater_rate(fig6a_inner(60))
    assert rep.L_km == pytest.approx(18.0)
    assert rep.k_swaps == 6 and rep.j_extra == 2
    assert rep.R == pytest.approx(FIG6A_R, rel=1e-10)
    assert rep.A_n == pytest.approx(FIG6A_A, rel=1e-10)
    assert 10 <= rep.R <= 46


def test_fig6a_track_policy_differs():
    rep = repeater_rate(replace(fig6a_inner(60), fidelity_policy="track"))
    assert rep.R < 19.0


def test_105km_anchor():
    rep = repeater_rate(figure_configs("105km")[0][1][0])
    assert rep.L_km == pytest.approx(105.0)
    assert rep.R == pytest.approx(FIG105_R, rel=1e-10)
    assert 5e-5 <= rep.R <= 5e-3


def test_fig6b_anchor_and_crossing():
    cfgs = figure_configs("6b")[0][1]
    reps = [repeater_rate(c) for c in cfgs]
    last = reps[-1]
    assert last.L_km == pytest.approx(900.0)
    assert last.R == pytest.approx(FIG6B_R, rel=1e-10)
    assert 3.6e-4 <= last.R <= 3.6e-2
    L = np.array([r.L_km for r in reps])
    gap = np.log([r.R for r in reps]) - np.log([r.benchmark_rate for r in reps])
    i = int(np.nonzero(np.diff(np.sign(gap)))[0][0])
    cross = L[i] - gap[i] * (L[i + 1] - L[i]) / (gap[i + 1] - gap[i])
    assert 300 <= cross <= 700


def test_super_link_parameters():
    outer = super_link(fig6a_inner(60), 2)
    assert outer.L0_km == pytest.approx(18.0)
    assert outer.x_link == pytest.approx(2 * iterate_swaps(0.999, 6) - 1)
    assert outer.p_gen == pytest.approx(1 / FIG6A_A)
    assert abs(outer.p_gen - 0.026) < 0.001


@pytest.mark.property
@given(st.integers(1, 80), st.sampled_from([0.3, 1.0, 3.5]))
def test_rate_definition_roundtrip(n, L0):
    rep = repeater_rate(RepeaterConfig(n, L0, 1, fidelity_policy="threshold"))
    assert rep.R * rep.N_bar * (rep.T_link * rep.A_n + rep.T_swap) == pytest.approx(1.0, rel=1e-12)


def test_rate_non_increasing_in_n_without_endpoint():
    base = RepeaterConfig(1, 3.5, 2, x_link=-0.5, y_link=0.0, endpoint=False)
    rates = [repeater_rate(replace(base, n_links=n)).R for n in range(1, 41)]
    assert np.all(np.diff(rates) <= 0)


def test_config_validation_and_dict():
    with pytest.raises(DomainError):
        RepeaterConfig(0)
    with pytest.raises(DomainError):
        RepeaterConfig(1, fidelity_policy="best")
    with pytest.raises(DomainError):
        RepeaterConfig(1, p_gen=0.0)
    d = RepeaterConfig(4, 0.3).to_dict()
    assert d["hardware"] == "casabone" and d["n_links"] == 4
    assert set(HARDWARE) == {"casabone", "ritter", "reimann", "neuzner"}


def test_presets():
    for name in FIGURES:
        series = figure_configs(name)
        assert series and all(cfgs for _, cfgs in series)
    assert [len(c) for _, c in figure_configs("3")] == [70] * 8
    assert len(figure_configs("6a")[0][1]) == 60
    with pytest.raises(DomainError):
        figure_configs("7")
    s = apply_overrides(figure_configs("4"), eta=0.8, nbar=None)
    assert all(c.eta == 0.8 and c.nbar == 100.0 for _, cfgs in s for c in cfgs)
