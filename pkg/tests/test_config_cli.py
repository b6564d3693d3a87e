import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risaoi import cli
from risaoi.baselines import BaselineKind
from risaoi.cli import CSV_HEADER, SweepRow, fmt, main, parse_csv, rows_to_csv, run_sweep
from risaoi.config import ConfigError, dumps, load_config, loads, sweep_loads
from risaoi.sim import ScenarioConfig


class TestLoadConfig:
    def test_empty_file_defaults(self, tmp_path):
        p = tmp_path / "empty.cfg"
        p.write_text("")
        cfg = load_config(p)
        assert cfg == ScenarioConfig()
        assert (cfg.n_t, cfg.u_i, cfg.u_e, cfg.m) == (4, 3, 3, 2)
        assert cfg.arrival_prob == 0.6
        assert cfg.noise == pytest.approx(1e-10)
        assert cfg.pathloss.reference_loss == pytest.approx(1e-3)
        assert (cfg.pathloss.n_bi, cfg.pathloss.n_br) == (2.2, 3.5)
        assert (cfg.pathloss.d_bi, cfg.pathloss.d_bj, cfg.pathloss.d_br) == (31.0, 3.0, 3.0)
        assert cfg.power_budget == 3.0

    def test_m_exceeds_users(self):
        with pytest.raises(ConfigError) as e:
            loads("M = 5")
        assert e.value.key == "M"

    def test_round_trip(self):
        cfg = loads("gamma_th = 30 dB\nQ = -15 dBm\nN_s = 16\nlambda = 0.5, 0.6, 0.7\npolicy = mrt\nd_br = 2.6 m\n")
        assert loads(dumps(cfg)) == cfg

    @settings(max_examples=30, deadline=None)
    @given(
        st.floats(-10, 50),
        st.floats(-40, 0),
        st.floats(0.1, 10),
        st.integers(1, 64),
        st.floats(0.5, 10),
    )
    def test_round_trip_property(self, g_db, q_dbm, p0, n_s, d_br):
        cfg = loads(f"gamma_th = {g_db} dB\nQ = {q_dbm} dBm\nP0 = {p0} W\nN_s = {n_s}\nd_br = {d_br} m\n")
        assert loads(dumps(cfg)) == cfg

    def test_units(self):
        cfg = loads("noise = -70 dBm\nQ = 0.1 mW\nP0 = 2\ngamma_th = 100\nA0 = -30 dB\nd0 = 1 m")
        assert cfg.noise == pytest.approx(1e-10)
        assert cfg.energy_threshold == pytest.approx(1e-4)
        assert cfg.power_budget == 2.0 and cfg.gamma_th == 100.0

    @pytest.mark.parametrize(
        "text, key",
        [
            ("foo = 1", "foo"),
            ("Q = 3 m", "Q"),
            ("N_t = 0", "N_t"),
            ("T = 2.5", "T"),
            ("lambda = 1.5", "lambda"),
            ("mu = 0.5", "mu"),
            ("d_br = -1 m", "d_br"),
            ("policy = zf", "policy"),
            ("N_s = 4\nn_s = 5", "n_s"),
        ],
    )
    def test_errors_name_key(self, text, key):
        with pytest.raises(ConfigError) as e:
            loads(text)
        assert e.value.key == key

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "nope.cfg")

    def test_comments_and_case(self):
        cfg = loads("# header\nn_S = 12  # trailing\n\nPOLICY = MRT\n")
        assert cfg.n_s == 12 and cfg.policy is BaselineKind.MRT


SPEC = """
sweep = gamma_th
values = 20 dB, 40 dB, 30 dB
policies = mrt, af-relay
N_s = 4
T = 6
"""


class TestSweep:
    def test_spec(self):
        spec = sweep_loads(SPEC)
        assert spec.numeric_values() == [20.0, 40.0, 30.0]
        pts = spec.configs()
        assert len(pts) == 6
        assert pts[0][0] is BaselineKind.MRT and pts[3][0] is BaselineKind.AF_RELAY
        assert pts[1][2].gamma_th == pytest.approx(1e4)

    @pytest.mark.parametrize(
        "text, key",
        [("values = 1", "sweep"), ("sweep = M\nvalues = 1", "sweep"), ("sweep = p0\nvalues =", "values"), ("sweep = p0\nvalues = 1 dB", "p0")],
    )
    def test_spec_errors(self, text, key):
        with pytest.raises(ConfigError) as e:
            sweep_loads(text)
        assert e.value.key == key

    def test_csv_shape_and_determinism(self, tmp_path):
        spec = sweep_loads(SPEC)
        rows = run_sweep(spec, out=tmp_path / "a.csv")
        run_sweep(spec, out=tmp_path / "b.csv")
        text = (tmp_path / "a.csv").read_text()
        lines = text.splitlines()
        assert len(lines) == 7 and lines[0] == ",".join(CSV_HEADER)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        assert parse_csv(text) == [r.rounded() for r in rows]
        log = json.loads((tmp_path / "a.csv.log.json").read_text())
        assert len(log["points"]) == 6

    def test_parallel_sweep_same_bytes(self, tmp_path):
        spec = sweep_loads(SPEC)
        run_sweep(spec, out=tmp_path / "a.csv", workers=1)
        run_sweep(spec, out=tmp_path / "b.csv", workers=2)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_unwritable(self, tmp_path):
        with pytest.raises(RuntimeError):
            run_sweep(sweep_loads(SPEC), out=tmp_path / "missing" / "x.csv")


class TestCsvFormat:
    def test_significant_digits(self):
        assert fmt(123.456789) == "123.457"
        assert fmt(0.000123456789) == "0.000123457"
        assert fmt(20.0) == "20"
        assert fmt(float("nan")) == "nan"
        assert fmt(-float("inf")) == "-inf"

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-1e6, 1e6, allow_nan=False), st.integers(0, 10**6))
    def test_parse_back(self, x, n):
        row = SweepRow("proposed", "q", x, x, x, x, x, n, 3)
        back = parse_csv(rows_to_csv([row]))[0]
        assert back.infeasible_slots == n and back.seed == 3
        assert back.mean_sum_aoi == pytest.approx(x, rel=5e-6, abs=1e-300)

    def test_nan_harvest(self):
        row = SweepRow("no-eu", "q", 1.0, 1.0, 1.0, 1.0, float("nan"), 0, 0)
        assert np.isnan(parse_csv(rows_to_csv([row]))[0].mean_harvest_dbm)

    def test_header_check(self):
        with pytest.raises(ValueError):
            parse_csv("a,b\n1,2\n")


class TestMain:
    def test_run(self, tmp_path, capsys):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("N_s = 4\nT = 5\nR = 2\n")
        log = tmp_path / "run.json"
        assert main(["run", "--config", str(cfg), "--seed", "7", "--log", str(log)]) == 0
        doc = json.loads(log.read_text())
        assert doc["seed"] == 7
        assert doc["version"].startswith(cli.__version__)
        assert loads(doc["config"]).seed == 7
        assert set(doc["iteration_caps"]) >= {"S_A", "S1", "S2"}
        assert len(doc["repetitions"]) == 2
        assert len(doc["repetitions"][0]["slot_wall_clock_s"]) == 5
        for slot in doc["repetitions"][0]["slots"]:
            assert {"ao_rounds", "alg1_inner", "alg2_inner", "solver_iterations"} <= set(slot)

    def test_run_to_stdout(self, tmp_path, capsys):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("N_s = 4\nT = 3\npolicy = mrt\n")
        assert main(["run", "--config", str(cfg)]) == 0
        assert json.loads(capsys.readouterr().out)["seed"] == 0

    def test_exit_codes(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("M = 5\n")
        assert main(["run", "--config", str(bad)]) == 1
        assert main(["run", "--config", str(tmp_path / "nope.cfg")]) == 1
        assert main(["frobnicate"]) == 1
        spec = tmp_path / "s.spec"
        spec.write_text(SPEC)
        assert main(["sweep", "--spec", str(spec), "--out", str(tmp_path / "no" / "x.csv")]) == 2
        assert main(["sweep", "--spec", str(spec), "--out", str(tmp_path / "ok.csv")]) == 0

    def test_selftest(self, capsys):
        assert main(["selftest"]) == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 5 and "FAIL" not in out

    def test_log_level_env(self, monkeypatch, tmp_path):
        monkeypatch.setenv("RISAOI_LOG_LEVEL", "debug")
        cfg = tmp_path / "c.cfg"
        cfg.write_text("N_s = 4\nT = 2\npolicy = mrt\n")
        assert main(["run", "--config", str(cfg), "--log", str(tmp_path / "l.json")]) == 0
