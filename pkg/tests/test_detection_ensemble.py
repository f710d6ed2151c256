import json
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wgmtransit import cli
from wgmtransit import detection_ensemble as de
from wgmtransit import forces_dynamics as fd


@pytest.fixture(scope="module")
def small_ctx(default_cfg, cylinder_surface):
    setup = cli.build_setup(default_cfg, cylinder_surface)
    return cli.build_context(default_cfg, setup, seed=5, n_target=3)


@pytest.fixture(scope="module")
def small_run(small_ctx):
    return de.run_trigger_pipeline(small_ctx)


def test_streams_reproducible_and_distinct():
    a = de.stream(1, de.STREAM_CLOUD, 0).standard_normal(5)
    b = de.stream(1, de.STREAM_CLOUD, 0).standard_normal(5)
    c = de.stream(1, de.STREAM_JITTER, 0).standard_normal(5)
    d = de.stream(1, de.STREAM_CLOUD, 1).standard_normal(5)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c) and not np.allclose(a, d)


def brute_first_trigger(counts, window, threshold):
    for k in range(len(counts)):
        if counts[max(0, k - window + 1): k + 1].sum() >= threshold:
            return k
    return -1


@given(counts=st.lists(st.integers(0, 3), min_size=1, max_size=60),
       window=st.integers(1, 12), threshold=st.integers(1, 6))
def test_first_trigger_matches_brute_force(counts, window, threshold):
    c = np.array(counts)
    assert de.first_trigger(c, window, threshold) == brute_first_trigger(c, window, threshold)


def test_zero_threshold_triggers_immediately():
    assert de.first_trigger(np.zeros(10, int), 5, 0) == 0
    assert de.window_trigger_probability(0.0, 0) == 1.0


def test_window_probability_matches_sampling():
    rng = np.random.default_rng(2)
    mean, thr = 3.2, 4
    samples = rng.poisson(mean, 200_000)
    assert de.window_trigger_probability(mean, thr) == pytest.approx(np.mean(samples >= thr), abs=0.005)


def test_generate_counts_mean():
    rng = np.random.default_rng(4)
    t = np.full(200_000, 0.4)
    counts = de.generate_counts(t, 15.0, 1e-3, rng)
    assert counts.mean() == pytest.approx(0.4 * 15.0 * 1e-3, rel=0.05)


def test_bin_transmission():
    x = np.arange(12.0)
    np.testing.assert_allclose(de.bin_transmission(x, 1e-3, 3e-3), [1, 4, 7, 10])
    np.testing.assert_array_equal(de.bin_transmission(x, 1e-3, 1e-3), x)
    with pytest.raises(ValueError):
        de.bin_transmission(x, 1e-3, 1.5e-3)


@given(z0=st.floats(10.0, 3000.0), vz=st.floats(-0.5, 0.5))
def test_crossing_time_reaches_plane(z0, vz):
    r, v = np.array([0.0, 0.0, z0]), np.array([0.0, 0.0, vz])
    t = de.crossing_time(r, v)
    assert t > 0
    assert fd.free_fall_state(np.r_[r, v], t)[2] == pytest.approx(0.0, abs=1e-6)


def test_prefilter_accepts_only_outer_band(geometry):
    cloud = de.CloudModel(temperature_uk=10.0)
    rng = np.random.default_rng(8)
    r, v = de.sample_initial_conditions(cloud, rng, 400_000)
    ok, t = de.prefilter(r, v, geometry, band_um=5.0)
    x = r[ok, 0] + v[ok, 0] * t[ok]
    y = r[ok, 1] + v[ok, 1] * t[ok]
    d = np.hypot(x, y) - geometry.principal_diameter_um / 2
    assert ok.sum() > 0
    assert np.all((d >= 0) & (d <= 5.0))


def test_annulus_acceptance_closed_form(geometry):
    cloud = de.CloudModel(temperature_uk=0.0)
    rng = np.random.default_rng(9)
    band = 40.0
    r, v = de.sample_initial_conditions(cloud, rng, 1_000_000)
    ok, _ = de.prefilter(r, v, geometry, band)
    p = de.annulus_acceptance(cloud, geometry, band)
    assert ok.mean() == pytest.approx(p, rel=5 * np.sqrt((1 - p) / (p * 1e6)))


def test_cloud_validation():
    with pytest.raises(ValueError):
        de.CloudModel(sigma_um=(0.0, 1.0, 1.0))
    with pytest.raises(ValueError):
        de.TriggerConfig(window_ns=2.5, bin_ns=1.0)


def test_record_json_round_trip(small_run, tmp_path):
    rec = small_run.records[0]
    assert de.TriggerRecord.from_json(rec.to_json()) == rec
    path = tmp_path / "records.jsonl"
    de.save_records(small_run.records, path)
    assert de.load_records(path) == small_run.records
    bad = json.loads(rec.to_json())
    bad["version"] = 99
    with pytest.raises(ValueError):
        de.TriggerRecord.from_json(json.dumps(bad))


def test_pipeline_reaches_target_in_index_order(small_run, small_ctx):
    recs = small_run.records
    assert len(recs) == small_ctx.trigger.n_target
    assert [r.index for r in recs] == sorted(r.index for r in recs)
    assert small_run.stats["triggered"] == len(recs)
    assert all(r.g_trigger >= 0 for r in recs)


def test_pipeline_deterministic_across_workers(small_run, small_ctx):
    again = de.run_trigger_pipeline(small_ctx, workers=2)
    assert again.records == small_run.records


def test_replay_reproduces_trigger_exactly(small_run, small_ctx):
    rec = small_run.records[0]
    out = de.replay(small_ctx, rec)
    assert out["record"] == rec
    twice = de.replay(small_ctx, rec)
    assert out["trajectory"].record.tobytes() == twice["trajectory"].record.tobytes()


def test_shorter_replay_is_a_prefix(small_run, small_ctx):
    rec = small_run.records[0]
    full = de.replay(small_ctx, rec)["trajectory"].record
    short = de.replay(small_ctx, rec, n_steps=2000)["trajectory"].record
    assert short.tobytes() == full[:2000].tobytes()


def test_target_unreachable_keeps_partial_records(small_ctx):
    tight = replace(small_ctx, trigger=replace(small_ctx.trigger, max_samples=1 << 18, n_target=50))
    with pytest.raises(de.TargetUnreachable) as info:
        de.run_trigger_pipeline(tight)
    assert len(info.value.records) < 50


def test_aggregate_shapes(small_run, small_ctx):
    plan = de.ProbePlan.scan_mhz(-20, 20, 3, input_flux=15.0, before_us=0.5, after_us=1.0)
    res = de.aggregate(small_ctx, small_run.records, plan)
    assert res.transmission.shape == (3, len(res.time_us))
    assert res.spectrum_t.shape == (3,)
    assert np.all((res.spectrum_t >= 0) & (res.spectrum_t <= 1))
    assert np.sum(res.theta_density * np.diff(res.theta_edges)) == pytest.approx(1.0)
    fr = de.outcome_fractions(small_run.records)
    assert sum(fr.values()) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        de.aggregate(small_ctx, [], plan)


def test_gate_rejects_noisy_cavity(small_ctx):
    noisy = replace(small_ctx, jitter=replace(small_ctx.jitter, noise_gate=0.0))
    out = de.run_candidate(noisy, 0, np.array([12.5, 0, 2000.0]), np.zeros(3), 10.0)
    assert out["gated"]
