"""Command-line entry point: ``run``, ``sweep`` and ``selftest``.

Exit codes: 0 success, 1 invalid input (bad config, missing file),
2 runtime failure (solver or I/O error, failed self-test). Log verbosity is
read from ``RISAOI_LOG_LEVEL`` (default ``WARNING``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import subprocess
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, SweepSpec, dumps, load_config, load_sweep
from .sim import RunMetrics, ScenarioConfig, run

log = logging.getLogger("risaoi")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2

CSV_HEADER = [
    "policy",
    "swept_param",
    "value",
    "mean_sum_aoi",
    "time_avg_sum_aoi",
    "delivery_rate",
    "mean_harvest_dbm",
    "infeasible_slots",
    "seed",
]


def version_string() -> str:
    """``git describe`` of the source tree when available, else the package version."""
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=here,
            capture_output=True,
            text=True,
            timeout=5,
            check=True,
        )
        desc = out.stdout.strip()
        if desc:
            return f"{__version__}+g{desc}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def fmt(x) -> str:
    """Fixed decimal with 6 significant digits; ``nan`` for missing values."""
    x = float(x)
    if not np.isfinite(x):
        return "nan" if np.isnan(x) else ("inf" if x > 0 else "-inf")
    return np.format_float_positional(x, precision=6, unique=False, fractional=False, trim="-")


# ----------------------------------------------------------------- records


@dataclass(frozen=True)
class SweepRow:
    policy: str
    swept_param: str
    value: float
    mean_sum_aoi: float
    time_avg_sum_aoi: float
    delivery_rate: float
    mean_harvest_dbm: float
    infeasible_slots: int
    seed: int

    @classmethod
    def from_metrics(cls, param: str, value: float, m: RunMetrics) -> "SweepRow":
        return cls(
            policy=m.config.policy.value,
            swept_param=param,
            value=float(value),
            mean_sum_aoi=m.mean_sum_aoi,
            time_avg_sum_aoi=m.time_avg_sum_aoi,
            delivery_rate=m.delivery_rate,
            mean_harvest_dbm=m.mean_harvest_dbm,
            infeasible_slots=m.infeasible_slots,
            seed=m.config.seed,
        )

    def cells(self) -> list[str]:
        return [
            self.policy,
            self.swept_param,
            fmt(self.value),
            fmt(self.mean_sum_aoi),
            fmt(self.time_avg_sum_aoi),
            fmt(self.delivery_rate),
            fmt(self.mean_harvest_dbm),
            str(int(self.infeasible_slots)),
            str(int(self.seed)),
        ]

    def rounded(self) -> "SweepRow":
        """The row as it reads back from CSV (6 significant digits)."""
        return parse_csv(rows_to_csv([self]))[0]


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()


def parse_csv(text: str) -> list[SweepRow]:
    """Inverse of :func:`rows_to_csv`."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header}")
    out = []
    for cells in reader:
        if not cells:
            continue
        out.append(
            SweepRow(
                policy=cells[0],
                swept_param=cells[1],
                value=float(cells[2]),
                mean_sum_aoi=float(cells[3]),
                time_avg_sum_aoi=float(cells[4]),
                delivery_rate=float(cells[5]),
                mean_harvest_dbm=float(cells[6]),
                infeasible_slots=int(cells[7]),
                seed=int(cells[8]),
            )
        )
    return out


def run_log(config: ScenarioConfig, metrics: RunMetrics) -> dict:
    """Everything needed to audit a run: version, resolved config, seed, per-slot timing and solver effort."""
    sca = config.sca
    reps = []
    for r, rep in enumerate(metrics.repetitions):
        reps.append(
            {
                "repetition": r,
                "slot_wall_clock_s": [float(t) for t in rep.slot_time],
                "infeasible_slots": [int(t) for t in np.flatnonzero(rep.infeasible)],
                "slots": rep.traces,
            }
        )
    return {
        "version": version_string(),
        "config": dumps(config),
        "seed": config.seed,
        "iteration_caps": {"S_A": sca.s_a, "S1": sca.s1, "S2": sca.s2, "penalty_rounds": sca.penalty_rounds},
        "summary": metrics.summary(),
        "solver_iterations_total": int(sum(metrics.solver_iterations)),
        "repetitions": reps,
    }


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def write_text(path, text: str) -> None:
    """Write ``text``; I/O failures surface as :class:`RuntimeError`."""
    try:
        Path(path).write_text(text)
    except OSError as e:
        raise RuntimeError(f"cannot write {str(path)!r}: {e.strerror or e}") from None


# ----------------------------------------------------------------- sweeps


def _run_point(cfg: ScenarioConfig) -> RunMetrics:
    return run(cfg)


def run_sweep(spec: SweepSpec, out=None, workers: int | None = None) -> list[SweepRow]:
    """Run every (policy, value) point, write the CSV and return the rows in file order.

    Points run in parallel when ``workers > 1``; rows are assembled in
    policy-major order regardless of completion order.
    """
    out = out if out is not None else spec.out
    if out is None:
        raise ConfigError("out", "no output path given")
    out = Path(out)
    if not out.parent.exists():
        raise RuntimeError(f"cannot write {str(out)!r}: directory does not exist")
    points = spec.configs()
    workers = spec.base.workers if workers is None else workers
    cfgs = [replace(cfg, workers=1) if workers > 1 else cfg for _, _, cfg in points]
    if workers > 1 and len(cfgs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            metrics = list(pool.map(_run_point, cfgs))
    else:
        metrics = [_run_point(c) for c in cfgs]
    rows = [SweepRow.from_metrics(spec.param, v, m) for (_, v, _), m in zip(points, metrics)]
    write_text(out, rows_to_csv(rows))
    log_path = out.with_name(out.name + ".log.json")
    logs = {
        "version": version_string(),
        "sweep": spec.param,
        "values": spec.values,
        "points": [_to_jsonable(run_log(m.config, m)) for m in metrics],
    }
    write_text(log_path, json.dumps(logs, indent=1))
    return rows


# ----------------------------------------------------------------- selftest


def selftest(stream=None) -> bool:
    """Quick oracle checks that need nothing beyond the package itself."""
    from .baselines import BaselineKind
    from .conic import ConicProblem, SocBlock, ball_oracle, lp_vertex_oracle, solve
    from .numerics import RngStream
    from .sca import initial_beamformers, verify_surrogate
    from .sca.problems import SlotProblem
    from .channel import NetworkSizes, PathLossParams, draw_channels
    from .config import loads
    from .sim import check_oracle

    stream = stream or sys.stdout
    gen = np.random.default_rng(7)
    results = []

    def check(name, fn):
        try:
            ok, detail = fn()
        except Exception as e:  # a crash is a failure, reported not raised
            ok, detail = False, f"{type(e).__name__}: {e}"
        results.append(ok)
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}", file=stream)

    def aoi_oracle():
        cfg = ScenarioConfig(n_s=4, horizon=40, repetitions=3, policy=BaselineKind.MRT)
        m = run(cfg)
        ok = all(check_oracle(r) for r in m.repetitions)
        return ok, f"{len(m.repetitions)} runs match the event-log replay"

    def lp():
        worst = 0.0
        for _ in range(20):
            n = int(gen.integers(2, 4))
            A = np.vstack([gen.normal(size=(3, n)), np.eye(n), -np.eye(n)])
            b = np.concatenate([gen.uniform(0.5, 2.0, 3), np.full(2 * n, 2.0)])
            c = gen.normal(size=n)
            ref, _ = lp_vertex_oracle(c, A, b)
            sol = solve(ConicProblem(objective=c, rows=A, row_hi=b))
            worst = max(worst, abs(sol.objective - ref) / max(1.0, abs(ref)))
        return worst <= 1e-5, f"max relative error {worst:.2e}"

    def ball():
        worst = 0.0
        for _ in range(20):
            n = int(gen.integers(1, 6))
            c, x0, r = gen.normal(size=n), gen.normal(size=n), float(gen.uniform(0.1, 3.0))
            ref, _ = ball_oracle(c, x0, r)
            p = ConicProblem(objective=c, soc=[SocBlock(A=np.eye(n), b=-x0, c=np.zeros(n), d=r)])
            sol = solve(p)
            worst = max(worst, abs(sol.objective - ref) / max(1.0, abs(ref)))
        return worst <= 1e-5, f"max relative error {worst:.2e}"

    def surrogates():
        sizes = NetworkSizes(n_t=4, n_s=8, u_i=3, u_e=3)
        ch = draw_channels(PathLossParams(), sizes, RngStream(3))
        prob = SlotProblem(
            channels=ch,
            weights=np.array([2.0, 3.0, 1.0]),
            buffer=np.ones(3, np.int64),
            gamma_th=1e4,
            noise=1e-10,
            energy_threshold=1e-4,
            power_budget=3.0,
            channels_available=2,
        )
        rho = np.exp(1j * gen.uniform(0, 2 * np.pi, 8))
        W, V = initial_beamformers(prob, rho)
        reps = [
            verify_surrogate(kind, prob, rho, W, V, block=block, rng=RngStream(5))
            for kind, block in (("snr", "phase"), ("eh", "phase"), ("snr", "beam"), ("eh", "beam"), ("penalty", "phase"))
        ]
        return all(r.passed for r in reps), "value, gradient and bound checks on 5 constraints"

    def config_roundtrip():
        cfg = loads("gamma_th = 30 dB\nQ = -15 dBm\nN_s = 16\n")
        return loads(dumps(cfg)) == cfg, "load, dump, load is exact"

    check("aoi oracle", aoi_oracle)
    check("lp vertex oracle", lp)
    check("ball oracle", ball)
    check("surrogate bounds", surrogates)
    check("config round trip", config_roundtrip)
    return all(results)


# ----------------------------------------------------------------- main


def _setup_logging() -> None:
    level = os.environ.get("RISAOI_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="risaoi", description="Age-of-information scheduling with RIS-aided SWIPT.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="simulate one configuration")
    r.add_argument("--config", required=True, help="key = value config file")
    r.add_argument("--seed", type=int, default=None, help="override the config seed")
    r.add_argument("--log", default=None, help="write the JSON run log here (default: stdout)")
    s = sub.add_parser("sweep", help="sweep one parameter across policies and write a CSV")
    s.add_argument("--spec", required=True, help="sweep spec file")
    s.add_argument("--out", default=None, help="CSV path (overrides the 'out' key of the sweep file)")
    s.add_argument("--workers", type=int, default=None, help="parallel sweep points")
    sub.add_parser("selftest", help="run the built-in oracle checks")
    return p


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    t0 = time.perf_counter()
    metrics = run(cfg)
    doc = _to_jsonable(run_log(cfg, metrics))
    doc["wall_clock_s"] = time.perf_counter() - t0
    text = json.dumps(doc, indent=1)
    if args.log:
        write_text(args.log, text)
        print(json.dumps(_to_jsonable(metrics.summary())))
    else:
        print(text)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    spec = load_sweep(args.spec)
    rows = run_sweep(spec, out=args.out, workers=args.workers)
    sys.stdout.write(rows_to_csv(rows))
    return EXIT_OK


def main(argv=None) -> int:
    _setup_logging()
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:  # argparse usage errors are input errors
        return EXIT_OK if e.code == 0 else EXIT_INVALID
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return EXIT_OK if selftest() else EXIT_RUNTIME
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as e:
        log.debug("runtime failure", exc_info=True)
        print(f"runtime failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
