import time

import numpy as np
import pytest

from risaoi.baselines import BaselineKind
from risaoi.sim import ScenarioConfig, check_oracle, compare, run, with_overrides

FAST = dict(n_s=8, horizon=30, repetitions=2)


class TestClosedForms:
    def test_no_traffic(self):
        T = 40
        m = run(ScenarioConfig(arrival_prob=0.0, horizon=T, n_s=4))
        assert m.time_avg_sum_aoi == pytest.approx(3 * (T + 3) / 2)
        assert m.delivery_rate == 0.0
        np.testing.assert_array_equal(m.aoi_traces[0, :, 0], np.arange(2, T + 2))

    @pytest.mark.parametrize("policy", ["proposed", "mrt", "random-phase"])
    def test_always_fresh(self, policy):
        cfg = ScenarioConfig(arrival_prob=1.0, gamma_th=0.0, energy_threshold=0.0, m=3, horizon=20, n_s=4, policy=policy)
        m = run(cfg)
        assert m.time_avg_sum_aoi == pytest.approx(3.0)
        assert np.all(m.aoi_traces == 1)


class TestContracts:
    def test_smoke_desk_scale(self):
        t0 = time.perf_counter()
        m = run(ScenarioConfig(n_s=8, horizon=200, repetitions=5, energy_threshold=10**-1.5 * 1e-3))
        assert time.perf_counter() - t0 < 600
        s = m.summary()
        for key in ("time_avg_sum_aoi", "mean_sum_aoi", "delivery_rate", "infeasible_slots", "mean_harvest_dbm"):
            assert np.isfinite(s[key])
        assert m.aoi_traces.shape == (5, 200, 3)
        assert m.slot_time.shape == (5, 200)
        assert all(check_oracle(r) for r in m.repetitions)

    @pytest.mark.parametrize("policy", list(BaselineKind))
    def test_event_conservation_and_oracle(self, policy):
        m = run(ScenarioConfig(policy=policy, **FAST))
        for rep in m.repetitions:
            assert np.all(rep.delivered.sum(axis=0) <= rep.arrivals.sum(axis=0))
            assert np.all(rep.delivered <= rep.scheduled)
            assert np.all(rep.scheduled.sum(axis=1) <= 2)
            assert check_oracle(rep)

    @pytest.mark.parametrize("policy", ["proposed", "mrt", "random-phase", "af-relay"])
    def test_harvest_recomputed(self, policy):
        m = run(ScenarioConfig(policy=policy, record_decisions=True, **FAST))
        for rep in m.repetitions:
            for t, rec in enumerate(rep.records):
                if rep.infeasible[t]:
                    assert not rec.harvested.any()
                    continue
                recomputed = np.abs(np.einsum("jt,jt->j", rec.g_rows, rec.V)) ** 2
                np.testing.assert_allclose(rec.harvested, recomputed, rtol=1e-10, atol=0)
                assert np.all(rec.harvested >= m.config.energy_threshold * (1 - 1e-6))
                assert np.sum(np.abs(rec.W) ** 2) + np.sum(np.abs(rec.V) ** 2) <= m.config.power_budget * (1 + 1e-6)

    def test_deterministic(self):
        a = run(ScenarioConfig(**FAST))
        b = run(ScenarioConfig(**FAST))
        np.testing.assert_array_equal(a.aoi_traces, b.aoi_traces)
        assert a.summary()["mean_sum_aoi"] == b.summary()["mean_sum_aoi"]

    def test_parallel_matches_serial(self):
        cfg = ScenarioConfig(policy="mrt", n_s=4, horizon=20, repetitions=3)
        a = run(cfg)
        b = run(with_overrides(cfg, workers=2))
        np.testing.assert_array_equal(a.aoi_traces, b.aoi_traces)

    def test_paired_arrivals_across_policies(self):
        a = run(ScenarioConfig(policy="mrt", **FAST))
        b = run(ScenarioConfig(policy="proposed", **FAST))
        for ra, rb in zip(a.repetitions, b.repetitions):
            np.testing.assert_array_equal(ra.arrivals, rb.arrivals)


class TestCompare:
    def test_shape(self):
        cfgs = [
            with_overrides(ScenarioConfig(policy=p, n_s=4, horizon=10), gamma_th=10 ** (g / 10))
            for p in ("mrt", "proposed")
            for g in (20, 30, 40)
        ]
        rows = compare(cfgs, "gamma_th", [20, 30, 40] * 2)
        assert len(rows) == 6
        assert [r.policy for r in rows] == ["mrt"] * 3 + ["proposed"] * 3

    def test_identical_configs(self):
        cfg = ScenarioConfig(policy="mrt", n_s=4, horizon=15)
        r1, r2 = compare([cfg, cfg])
        assert r1.metrics.summary()["mean_sum_aoi"] == r2.metrics.summary()["mean_sum_aoi"]

    def test_value_count_mismatch(self):
        with pytest.raises(ValueError):
            compare([ScenarioConfig(horizon=5)], values=[1, 2])


class TestValidation:
    @pytest.mark.parametrize(
        "kw, name",
        [({"m": 5}, "m"), ({"n_t": 0}, "n_t"), ({"arrival_prob": 1.5}, "arrival_prob"), ({"horizon": 0}, "horizon")],
    )
    def test_errors_name_field(self, kw, name):
        with pytest.raises(ValueError, match=name):
            ScenarioConfig(**kw)

    def test_pathloss_override(self):
        cfg = with_overrides(ScenarioConfig(), d_br=2.6, horizon=7)
        assert cfg.pathloss.d_br == 2.6 and cfg.horizon == 7
