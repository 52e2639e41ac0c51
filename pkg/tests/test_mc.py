import csv
import io
import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import expit

from ffcc import mc
from ffcc.mc import (CSV_COLUMNS, Model, ModelSpec, ScanConfig, count_failures, curves_csv, find_threshold,
                     logical_rate, phase_boundary, summary_json, wilson)
from ffcc.noise import NoiseParams


@pytest.fixture(scope="module")
def rhg2():
    return Model.build(ModelSpec("raussendorf"), 2)


@pytest.fixture(scope="module")
def branched4():
    return Model.build(ModelSpec("ffcc_branched_net"), 4)


def wilson_closed_form(k, n, z=1.959963984540054):
    p = k / n
    c = (p + z * z / (2 * n)) / (1 + z * z / n)
    h = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / (1 + z * z / n)
    return c - h, c + h


@given(st.integers(1, 5000), st.floats(0, 1))
def test_wilson_matches_closed_form(n, frac):
    k = int(frac * n)
    lo, hi = wilson(k, n)
    elo, ehi = wilson_closed_form(k, n)
    assert lo == pytest.approx(max(0.0, elo), abs=1e-9)
    assert hi == pytest.approx(min(1.0, ehi), abs=1e-9)


def test_model_spec():
    assert ModelSpec("raussendorf").T(4) == 4
    assert ModelSpec("ffcc").T(4) == 12
    assert ModelSpec("ffcc_branched_net", length=8).label() == "ffcc_branched_net_l8"
    assert ModelSpec("ffcc_branched_net").label() == "ffcc_branched_net_inf"
    assert ModelSpec("ffcc", orientation="space-like").label() == "ffcc_space"
    with pytest.raises(ValueError):
        ModelSpec("toric")


def test_zero_noise_rate_is_zero(rhg2, branched4):
    assert logical_rate(rhg2, NoiseParams(), 200, 0)[0] == 0.0
    assert logical_rate(branched4, NoiseParams("fusion_phenomenological"), 200, 0)[0] == 0.0


def test_full_erasure_rate_is_one(rhg2, branched4):
    assert logical_rate(rhg2, NoiseParams(p_erase=1.0), 100, 0)[0] == 1.0
    assert logical_rate(branched4, NoiseParams("fusion_phenomenological", p_erase=1.0, p_err=0.1), 50, 0)[0] == 1.0


def test_noise_variant_must_match_model(rhg2, branched4):
    with pytest.raises(ValueError):
        logical_rate(rhg2, NoiseParams("fusion_phenomenological", p_err=0.1), 10, 0)
    with pytest.raises(ValueError):
        logical_rate(branched4, NoiseParams(p_err=0.1), 10, 0)


@pytest.mark.parametrize("noise", [NoiseParams(p_err=0.03), NoiseParams(p_erase=0.2),
                                   NoiseParams(p_erase=0.1, p_err=0.02), NoiseParams("weighted_iid", p_err=0.01)])
def test_rate_deterministic_and_thread_invariant(rhg2, noise):
    a = logical_rate(rhg2, noise, 300, 7)
    b = logical_rate(rhg2, noise, 300, 7)
    c = logical_rate(rhg2, noise, 300, 7, threads=3)
    assert a == b == c


def test_fast_paths_agree_with_general_path(rhg2):
    dec = rhg2.decoder
    for noise in (NoiseParams(p_err=0.05), NoiseParams(p_erase=0.3)):
        fast = count_failures(rhg2, noise, range(200), 3)
        slow = sum(dec.fail_one(*rhg2.sample_edges(noise, 3, s)) for s in range(200))
        assert fast == slow


def test_rate_matches_reference_loop(rhg2):
    # independent re-evaluation of the estimator from the sampler and decoder
    noise = NoiseParams(p_erase=0.05, p_err=0.03)
    seed = mc._point_seed(11, rhg2.L)
    k = sum(rhg2.decoder.fail_one(*rhg2.sample_edges(noise, seed, s)) for s in range(150))
    assert logical_rate(rhg2, noise, 150, 11)[0] == k / 150


def test_scaling_below_and_above_threshold():
    small, large = Model.build(ModelSpec("raussendorf"), 2), Model.build(ModelSpec("raussendorf"), 6)
    below = NoiseParams(p_err=0.005)
    _, (lo_small, _) = logical_rate(small, below, 2000, 0)
    _, (_, hi_large) = logical_rate(large, below, 2000, 0)
    assert hi_large < lo_small
    above = NoiseParams(p_err=0.15)
    assert logical_rate(large, above, 2000, 0)[0] > logical_rate(small, above, 2000, 0)[0]


def test_scan_config_validation():
    with pytest.raises(ValueError):
        ScanConfig((0, 1), sizes=(4,))
    with pytest.raises(ValueError):
        ScanConfig((0, 1), sizes=(8, 4))
    with pytest.raises(ValueError):
        find_threshold(ScanConfig((0.0, 0.0), sizes=(2, 4)), ModelSpec("raussendorf"))
    q = ScanConfig((0.001, 0.0), variant="fusion_physical", p_fail=0.25).noise()
    assert (q.loss, q.p_fail, q.p_erase) == (0.001, 0.25, 0.0)


class FakeModel:
    def __init__(self, spec, L):
        self.spec, self.L = spec, L


def synthetic(x0):
    """Rate curves that cross exactly at x0 for every pair of sizes."""
    def rate(model, noise, n, seed, threads=1):
        x = noise.p_err
        r = float(expit(model.L * (x - x0) * 40))
        k = round(r * n)
        return k / n, wilson(k, n)
    return rate


@pytest.fixture
def fake(monkeypatch):
    monkeypatch.setattr(mc.Model, "build", classmethod(lambda cls, spec, L: FakeModel(spec, L)))

    def use(x0):
        monkeypatch.setattr(mc, "logical_rate", synthetic(x0))
    return use


@pytest.mark.parametrize("x0", [0.013, 0.05, 0.1])
def test_find_threshold_recovers_synthetic_crossing(fake, x0):
    fake(x0)
    cfg = ScanConfig((0.0, 1.0), sizes=(4, 8, 12), samples=10**6, x_grid=(0.005, 0.02, 0.06, 0.12),
                     tol=1e-4, max_bisect=30)
    res = find_threshold(cfg, ModelSpec("raussendorf"))
    assert res.found
    assert res.ci[0] <= res.x_threshold <= res.ci[1]
    assert res.ci[0] <= x0 <= res.ci[1]
    assert abs(res.x_threshold - x0) < 0.05 * x0
    assert res.p_threshold == (0.0, res.x_threshold)
    assert len(res.pair_crossings) == 2


def test_find_threshold_no_crossing(fake):
    fake(10.0)  # the crossing lies far outside the grid
    res = find_threshold(ScanConfig((0.0, 1.0), sizes=(2, 4), x_grid=(0.1, 0.2)), ModelSpec("raussendorf"))
    assert not res.found and res.p_threshold is None
    d = res.to_json()
    assert d["found"] is False and "reason" in d


def test_no_threshold_with_noise_off():
    # direction (1, 0) with every rate forced to zero: the curves never separate
    cfg = ScanConfig((1.0, 0.0), sizes=(2, 4), samples=50, x_grid=(0.0, 0.0))
    res = find_threshold(cfg, ModelSpec("raussendorf"))
    assert not res.found
    assert all(p.rate == 0 for p in res.curves)


def test_phase_boundary_duplicates_and_order(fake):
    fake(0.05)
    cfg = ScanConfig((0.0, 1.0), sizes=(4, 8), samples=10**5, x_grid=(0.01, 0.1), tol=1e-3, max_bisect=20)
    res = phase_boundary([(0.0, 1.0), (0.0, 1.0), (0.5, 1.0)], cfg, ModelSpec("raussendorf"))
    assert res[0].x_threshold == res[1].x_threshold
    assert [r.direction for r in res] == [(0.0, 1.0), (0.0, 1.0), (0.5, 1.0)]
    with pytest.raises(ValueError):
        phase_boundary([(0.0, 1.0)], cfg, ModelSpec("raussendorf"))


def test_real_threshold_is_deterministic():
    cfg = ScanConfig((0.0, 1.0), sizes=(2, 4), samples=200, x_grid=(0.01, 0.04, 0.08), max_bisect=2, seed=3)
    a = find_threshold(cfg, ModelSpec("raussendorf"))
    b = find_threshold(cfg, ModelSpec("raussendorf"))
    assert curves_csv([a]) == curves_csv([b])
    assert a.to_json() == b.to_json()


def test_csv_and_json_schema(fake):
    fake(0.05)
    cfg = ScanConfig((0.0, 1.0), sizes=(4, 8), samples=1000, x_grid=(0.01, 0.1))
    res = find_threshold(cfg, ModelSpec("raussendorf"))
    rows = list(csv.reader(io.StringIO(curves_csv([res]))))
    assert rows[0] == CSV_COLUMNS
    assert len(rows) - 1 == len(res.curves)
    d = json.loads(summary_json([res], {"seed": 0}))
    assert d["schema_version"] == mc.SCHEMA_VERSION and d["config"] == {"seed": 0}
    assert d["thresholds"][0]["found"]
