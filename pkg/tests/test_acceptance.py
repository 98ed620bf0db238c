"""Acceptance criteria 1-8.

Run standalone with ``python tests/test_acceptance.py``; a summary with one
PASS/FAIL line per criterion is printed at the end of any pytest run that
collects this file.
"""
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from mpmath import binomial, mp, mpf

from hqrepeater.channel import ChannelParams, gammaT_from_length
from hqrepeater.checks import check_channel, check_entgen, check_jcm, check_purify, check_swap, check_tcm
from hqrepeater.entgen import link_state
from hqrepeater.mcsim import simulate_chain
from hqrepeater.presets import fig6a_inner, figure_configs
from hqrepeater.purify import purify_n
from hqrepeater.rates import attempts_avg, attempts_avg_binomial, repeater_rate
from hqrepeater.swap import iterate_swaps

ROOT = Path(__file__).resolve().parents[1]


def _timed(fn, repeat=1):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


@pytest.mark.acceptance(1)
def test_link_anchor(request):
    p = ChannelParams(gammaT_from_length(0.3))
    ls, dt = _timed(lambda: link_state(p, 100.0, 4.0, warn=False), repeat=50)
    request.node.acceptance_detail = f"x={ls.x:.5f}, {dt * 1e6:.0f} us"
    assert abs(ls.x - 0.913) <= 0.002
    assert dt < 1e-3


@pytest.mark.acceptance(2)
def test_swap_anchor(request):
    F6 = iterate_swaps(0.999, 6)
    request.node.acceptance_detail = f"F6={F6:.5f}"
    assert abs(F6 - 0.9399) <= 0.001


@pytest.mark.acceptance(3)
def test_purification_oracle_anchor(request):
    res, dt = _timed(check_purify)
    request.node.acceptance_detail = f"max dev {res.measured:.1e} over {len(res.cases)} seeds, {dt:.2f} s"
    assert len(res.cases) == 20
    assert res.measured <= 1e-10
    assert dt < 1.0


@pytest.mark.acceptance(3)
def test_purification_fig2_decade(request):
    xs = np.linspace(0.05, 0.2, 16)
    probs, dt = _timed(lambda: [purify_n(float(x), 0.0, 4).overall_prob for x in xs])
    request.node.acceptance_detail = f"N=4 P_pur {min(probs):.2e}..{max(probs):.2e} for x in [0.05, 0.2]"
    assert all(1e-9 <= p <= 1e-8 for p in probs)
    assert dt < 1.0


@pytest.mark.acceptance(4)
def test_rate_fig6a(request):
    reps, dt = _timed(lambda: [repeater_rate(c) for c in figure_configs("6a")[0][1]])
    last = reps[-1]
    request.node.acceptance_detail = f"6a R={last.R:.2f} at {last.L_km:.0f} km ({dt:.2f} s)"
    assert last.L_km == pytest.approx(18.0) and last.k_swaps == 6
    assert 10 <= last.R <= 46
    assert dt < 10


@pytest.mark.acceptance(4)
def test_rate_105km(request):
    rep = repeater_rate(figure_configs("105km")[0][1][0])
    request.node.acceptance_detail = f"105 km R={rep.R:.2e}"
    assert rep.L_km == pytest.approx(105.0)
    assert 5e-5 <= rep.R <= 5e-3


@pytest.mark.acceptance(4)
def test_rate_fig6b(request):
    reps, dt = _timed(lambda: [repeater_rate(c) for c in figure_configs("6b")[0][1]])
    last = reps[-1]
    L = np.array([r.L_km for r in reps])
    gap = np.log([r.R for r in reps]) - np.log([r.benchmark_rate for r in reps])
    idx = np.nonzero(np.diff(np.sign(gap)))[0]
    assert idx.size == 1
    i = int(idx[0])
    cross = L[i] - gap[i] * (L[i + 1] - L[i]) / (gap[i + 1] - gap[i])
    request.node.acceptance_detail = f"6b R={last.R:.2e} at {last.L_km:.0f} km, crossing {cross:.0f} km ({dt:.2f} s)"
    assert last.L_km == pytest.approx(900.0)
    assert 3.6e-4 <= last.R <= 3.6e-2
    assert 300 <= cross <= 700
    assert dt < 10


@pytest.mark.acceptance(5)
def test_oracle_a_jcm(request):
    r = check_jcm(100.0, 4.0)
    request.node.acceptance_detail = f"5a fidelity {r.measured:.4f}"
    assert r.measured >= 0.99


@pytest.mark.acceptance(5)
def test_oracle_b_channel(request):
    r = check_channel(50.0)
    request.node.acceptance_detail = f"5b {r.measured:.1e}"
    assert r.measured <= 1e-6


@pytest.mark.acceptance(5)
def test_oracle_c_entgen(request):
    r = check_entgen(100.0, 4.0)
    request.node.acceptance_detail = f"5c {r.measured:.3f}"
    assert r.measured <= 0.02


@pytest.mark.acceptance(5)
def test_oracle_d_tcm(request):
    r = check_tcm(100.0)
    request.node.acceptance_detail = f"5d {r.measured:.1e}"
    assert r.measured <= 1e-12


@pytest.mark.acceptance(5)
def test_oracle_e_bell_measurement(request):
    r, dt = _timed(lambda: check_swap(100.0))
    tvs = {c["input"]: round(c["total_variation"], 4) for c in r.cases}
    request.node.acceptance_detail = f"5e TV {tvs}"
    assert max(tvs.values()) <= 0.05


@pytest.mark.acceptance(6)
@pytest.mark.parametrize("P", [0.9, 0.5, 0.1, 0.01])
def test_attempts_series_vs_binomial(request, P):
    mp.dps = 60
    worst = 0.0
    for n in range(1, 26):
        a = attempts_avg(n, P)
        b = attempts_avg_binomial(n, P)
        exact = float(sum(binomial(n, i) * (-1) ** (i + 1) / (1 - (1 - mpf(P)) ** i) for i in range(1, n + 1)))
        worst = max(worst, abs(a - b) / a)
        assert abs(a - exact) <= 1e-12 * exact
    request.node.acceptance_detail = f"P={P}: max rel {worst:.1e}"
    assert worst <= 1e-9


@pytest.mark.acceptance(6)
def test_attempts_large_n(request):
    Ps = [0.5, 0.1, 0.026, 1e-2, 1e-3, 1e-4]
    vals = [attempts_avg(3000, P) for P in Ps]
    request.node.acceptance_detail = f"A_3000(P=1e-4)={vals[-1]:.4g}"
    assert all(math.isfinite(v) for v in vals)
    assert np.all(np.diff(vals) > 0)
    assert attempts_avg(2999, 0.026) < vals[2] < attempts_avg(3001, 0.026)


@pytest.mark.acceptance(7)
def test_monte_carlo_fig6a(request):
    cfg = fig6a_inner(60)
    rep = repeater_rate(cfg)
    t0 = time.perf_counter()
    one = simulate_chain(cfg, 100_000, seed=12345, workers=1)
    eight = simulate_chain(cfg, 100_000, seed=12345, workers=8)
    dt = time.perf_counter() - t0
    zA = (one.A_hat - rep.A_n) / one.A_stderr
    zR = (one.R_hat - rep.R) / one.R_stderr
    request.node.acceptance_detail = f"A z={zA:+.2f}, R z={zR:+.2f}, {dt:.1f} s for both runs"
    assert abs(zA) <= 3 and abs(zR) <= 3
    assert one == eight
    assert dt < 60


@pytest.mark.acceptance(8)
def test_property_suites_standalone(request):
    cmd = [sys.executable, "-m", "pytest", "-m", "property", "-q", "-p", "no:cacheprovider", str(ROOT / "tests")]
    r = subprocess.run(cmd, capture_output=True, text=True, cwd=ROOT)
    tail = r.stdout.strip().splitlines()[-1] if r.stdout.strip() else r.stderr[-200:]
    request.node.acceptance_detail = tail
    assert r.returncode == 0, r.stdout[-2000:]
    assert " passed" in tail and "failed" not in tail


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-rN"]))
