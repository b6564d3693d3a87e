"""Time-slotted Monte-Carlo engine.

Each slot: arrivals, channel draw, policy decision, delivery and harvesting,
AoI update. Every random draw comes from a stream keyed by
``(seed, repetition, slot, purpose)`` so that policies run on identical
arrivals and channels (paired comparison).
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .aoi import AoiState, SlotOutcome, definitional_aoi, sample_arrivals, step_aoi
from .baselines import BaselineKind, af_relay_slot, draw_relay_channels, mrt_slot, random_phases
from .channel import NetworkSizes, PathLossParams, draw_channels
from .numerics import RngStream, watts_to_dbm
from .sca import ScaConfig, alternating_optimize, beamforming_only
from .sca.problems import SlotProblem, eh_values, snr_values

log = logging.getLogger(__name__)

# per-slot purposes
_CHANNELS, _ARRIVALS, _POLICY, _RELAY = 0, 1, 2, 3
# relative slack on the SNR and EH thresholds when judging a slot
DELIVERY_SLACK = 1e-6


@dataclass
class ScenarioConfig:
    """One simulated scenario; all physical quantities are linear (W, ratios, m)."""

    n_t: int = 4
    n_s: int = 40
    u_i: int = 3
    u_e: int = 3
    m: int = 2
    pathloss: PathLossParams = field(default_factory=PathLossParams)
    noise: float = 1e-10  # sigma^2 [W], same for every IU
    gamma_th: float = 1e4  # linear
    energy_threshold: float = 1e-4  # Q [W]
    power_budget: float = 3.0  # P0 [W]
    arrival_prob: float | tuple = 0.6
    horizon: int = 200
    repetitions: int = 1
    policy: BaselineKind = BaselineKind.PROPOSED
    sca: ScaConfig = field(default_factory=ScaConfig)
    seed: int = 0
    relay_antennas: int = 4
    relay_share: float = 0.5
    record_decisions: bool = False
    workers: int = 1

    def __post_init__(self):
        self.policy = BaselineKind.parse(self.policy)
        self.validate()

    def validate(self):
        sizes = (("n_t", self.n_t), ("n_s", self.n_s), ("u_i", self.u_i), ("m", self.m))
        for name, v in sizes:
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v}")
        if self.u_e < 0:
            raise ValueError(f"u_e must be nonnegative, got {self.u_e}")
        if self.m > self.u_i:
            raise ValueError(f"m={self.m} exceeds the number of IUs u_i={self.u_i}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be at least 1, got {self.horizon}")
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be at least 1, got {self.repetitions}")
        for name in ("noise", "power_budget"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("gamma_th", "energy_threshold"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative, got {getattr(self, name)}")
        lam = np.atleast_1d(np.asarray(self.arrival_prob, dtype=float))
        if lam.size not in (1, self.u_i) or np.any(lam < 0) or np.any(lam > 1):
            raise ValueError(f"arrival_prob must be one value or one per IU in [0, 1], got {self.arrival_prob}")
        if self.relay_antennas < 1:
            raise ValueError(f"relay_antennas must be positive, got {self.relay_antennas}")
        if not 0.0 < self.relay_share < 1.0:
            raise ValueError(f"relay_share must lie in (0, 1), got {self.relay_share}")

    @property
    def sizes(self) -> NetworkSizes:
        return NetworkSizes(n_t=self.n_t, n_s=self.n_s, u_i=self.u_i, u_e=self.u_e)

    @property
    def arrival_vector(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.arrival_prob, dtype=float), (self.u_i,)).copy()


@dataclass
class SlotRecord:
    """Decision log of one slot (kept when ``record_decisions`` is set)."""

    rho: np.ndarray
    W: np.ndarray
    V: np.ndarray
    g_rows: np.ndarray  # composite EU rows used for harvesting
    harvested: np.ndarray
    snr: np.ndarray
    trace: dict | None


@dataclass
class RepetitionResult:
    ages: np.ndarray  # (T, U_I), post-update ages A(1..T)
    arrivals: np.ndarray  # (T, U_I)
    scheduled: np.ndarray  # (T, U_I), alpha * k
    delivered: np.ndarray  # (T, U_I)
    harvested: np.ndarray  # (T, U_E) [W]
    snr: np.ndarray  # (T, U_I)
    infeasible: np.ndarray  # (T,) bool
    slot_time: np.ndarray  # (T,) wall clock [s]
    solver_iterations: list  # per-solve iteration counts
    traces: list  # per-slot trace summaries (policies with an optimizer)
    records: list = field(default_factory=list)

    @property
    def sum_aoi(self) -> float:
        return float(self.ages.sum())

    @property
    def time_avg_sum_aoi(self) -> float:
        return float(self.ages.sum(axis=1).mean())


@dataclass
class RunMetrics:
    config: ScenarioConfig
    time_avg_sum_aoi: float  # mean over repetitions of (1/T) sum_t sum_i A_i(t)
    mean_sum_aoi: float  # mean over repetitions of sum_t sum_i A_i(t)
    per_rep_time_avg: np.ndarray  # (R,)
    aoi_traces: np.ndarray  # (R, T, U_I)
    delivery_rate: float  # delivered / scheduled transmissions
    infeasible_slots: int
    mean_harvest: np.ndarray  # (U_E,) [W], averaged over all slots
    solver_iterations: list
    mean_solve_count: float  # per slot
    slot_time: np.ndarray  # (R, T) [s]
    repetitions: list

    @property
    def mean_harvest_dbm(self) -> float:
        if self.mean_harvest.size == 0:
            return float("nan")
        return float(watts_to_dbm(max(float(self.mean_harvest.mean()), 1e-300)))

    def summary(self) -> dict:
        return {
            "policy": self.config.policy.value,
            "time_avg_sum_aoi": self.time_avg_sum_aoi,
            "mean_sum_aoi": self.mean_sum_aoi,
            "delivery_rate": self.delivery_rate,
            "infeasible_slots": self.infeasible_slots,
            "mean_harvest_dbm": self.mean_harvest_dbm,
            "mean_slot_time_s": float(self.slot_time.mean()),
            "mean_solves_per_slot": self.mean_solve_count,
        }


# ------------------------------------------------------------------ engine


def slot_problem(config: ScenarioConfig, channels, state: AoiState) -> SlotProblem:
    return SlotProblem(
        channels=channels,
        weights=state.weights,
        buffer=state.buffer,
        gamma_th=config.gamma_th,
        noise=config.noise,
        energy_threshold=config.energy_threshold,
        power_budget=config.power_budget,
        channels_available=config.m,
    )


def decide(config: ScenarioConfig, prob: SlotProblem, slot_rng: RngStream):
    """Run the configured policy; returns ``(alpha, rho, W, V, feasible, snr, harvested, trace)``."""
    pol = config.policy
    phase_rng = slot_rng.child(_POLICY)
    if pol in (BaselineKind.PROPOSED, BaselineKind.NO_EU):
        d = alternating_optimize(prob, config.sca, rng=phase_rng)
    elif pol is BaselineKind.RANDOM_PHASE:
        d = beamforming_only(prob, random_phases(prob.n_s, phase_rng), config.sca)
    elif pol is BaselineKind.MRT:
        b = mrt_slot(prob, random_phases(prob.n_s, phase_rng))
        return b.alpha, b.rho, b.W, b.V, b.feasible, b.snr, b.harvested, None
    elif pol is BaselineKind.AF_RELAY:
        relay = draw_relay_channels(config.pathloss, config.sizes, config.relay_antennas, slot_rng.child(_RELAY))
        b = af_relay_slot(prob, relay, config.relay_share)
        return b.alpha, b.rho, b.W, b.V, b.feasible, b.snr, b.harvested, None
    else:  # pragma: no cover - BaselineKind is closed
        raise ValueError(pol)
    snr = snr_values(prob, d.rho, d.W)
    harvested = eh_values(prob, d.rho, d.V)
    return d.alpha, d.rho, d.W, d.V, d.feasible, snr, harvested, d.trace


def run_repetition(config: ScenarioConfig, rep: int) -> RepetitionResult:
    T, U = config.horizon, config.u_i
    u_e = 0 if config.policy is BaselineKind.NO_EU else config.u_e
    rng = RngStream(config.seed, stream=rep)
    state = AoiState.initial(config.arrival_vector)
    ages = np.zeros((T, U), np.int64)
    arrivals = np.zeros((T, U), np.int64)
    scheduled = np.zeros((T, U), np.int64)
    delivered = np.zeros((T, U), np.int64)
    harvested = np.zeros((T, u_e))
    snr_log = np.zeros((T, U))
    infeasible = np.zeros(T, bool)
    slot_time = np.zeros(T)
    iters, traces, records = [], [], []
    for t in range(T):
        t0 = time.perf_counter()
        slot_rng = rng.child(t)
        state, a = sample_arrivals(state, slot_rng.child(_ARRIVALS))
        channels = draw_channels(config.pathloss, config.sizes, slot_rng.child(_CHANNELS))
        if config.policy is BaselineKind.NO_EU:
            channels = channels.without_eus()
        prob = slot_problem(config, channels, state)
        alpha, rho, W, V, feasible, snr, eh, trace = decide(config, prob, slot_rng)
        alpha = np.asarray(alpha, np.int64)
        if not feasible:
            # no transmission at all
            alpha = np.zeros(U, np.int64)
            snr = np.zeros(U)
            eh = np.zeros(u_e)
        sent = alpha * state.buffer
        ok = sent * (snr >= config.gamma_th * (1.0 - DELIVERY_SLACK))
        state = step_aoi(state, SlotOutcome(scheduled=alpha, delivered=ok, snr=snr, harvested=eh))
        ages[t] = state.age
        arrivals[t] = a
        scheduled[t] = sent
        delivered[t] = ok
        harvested[t] = eh
        snr_log[t] = snr
        infeasible[t] = not feasible
        if trace is not None:
            summary = {"slot": t, **trace.summary()}
            iters.extend(summary["solver_iterations"])
            traces.append(summary)
        if config.record_decisions:
            records.append(SlotRecord(rho, W, V, channels.composite_eu(rho), eh, snr, traces[-1] if trace else None))
        slot_time[t] = time.perf_counter() - t0
    return RepetitionResult(ages, arrivals, scheduled, delivered, harvested, snr_log, infeasible, slot_time, iters, traces, records)


def _run_rep(args):
    config, rep = args
    return run_repetition(config, rep)


def run(config: ScenarioConfig) -> RunMetrics:
    """Simulate ``config.repetitions`` independent runs and aggregate them in repetition order."""
    config.validate()
    jobs = [(config, r) for r in range(config.repetitions)]
    if config.workers > 1 and config.repetitions > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            reps = list(pool.map(_run_rep, jobs))
    else:
        reps = [_run_rep(j) for j in jobs]
    per_rep = np.array([r.time_avg_sum_aoi for r in reps])
    sent = sum(int(r.scheduled.sum()) for r in reps)
    got = sum(int(r.delivered.sum()) for r in reps)
    u_e = reps[0].harvested.shape[1]
    harvest = np.mean(np.concatenate([r.harvested for r in reps], axis=0), axis=0) if u_e else np.zeros(0)
    iters = [k for r in reps for k in r.solver_iterations]
    n_slots = config.repetitions * config.horizon
    metrics = RunMetrics(
        config=config,
        time_avg_sum_aoi=float(per_rep.mean()),
        mean_sum_aoi=float(np.mean([r.sum_aoi for r in reps])),
        per_rep_time_avg=per_rep,
        aoi_traces=np.stack([r.ages for r in reps]),
        delivery_rate=got / sent if sent else 0.0,
        infeasible_slots=int(sum(r.infeasible.sum() for r in reps)),
        mean_harvest=harvest,
        solver_iterations=iters,
        mean_solve_count=len(iters) / n_slots,
        slot_time=np.stack([r.slot_time for r in reps]),
        repetitions=reps,
    )
    log.info("run %s", metrics.summary())
    return metrics


def check_oracle(rep: RepetitionResult) -> bool:
    """True when the recorded ages equal the replay of the event log."""
    return bool(np.array_equal(rep.ages, definitional_aoi(rep.arrivals, rep.delivered)))


@dataclass
class CompareRow:
    policy: str
    swept_param: str
    value: float
    metrics: RunMetrics


def compare(configs, swept_param: str = "", values=None) -> list[CompareRow]:
    """Run each config (same seed policy gives paired runs) and return one row per config.

    ``values`` labels the rows; by default the row index is used.
    """
    rows = []
    configs = list(configs)
    values = list(range(len(configs))) if values is None else list(values)
    if len(values) != len(configs):
        raise ValueError("one sweep value per config is required")
    for cfg, v in zip(configs, values):
        rows.append(CompareRow(cfg.policy.value, swept_param, v, run(cfg)))
    return rows


def with_overrides(config: ScenarioConfig, **kw) -> ScenarioConfig:
    """Copy of ``config`` with fields (and ``pathloss`` fields) replaced."""
    pl_fields = set(PathLossParams.__dataclass_fields__)
    pl = {k: kw.pop(k) for k in list(kw) if k in pl_fields}
    if pl:
        kw["pathloss"] = replace(config.pathloss, **pl)
    return replace(config, **kw)
