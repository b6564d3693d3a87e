"""Penalty SCA for the phase block, SCA for the beamforming block, and the AO driver."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .. import conic
from ..numerics import RngStream
from .problems import (
    SlotProblem,
    build_margin_beam,
    build_margin_phase,
    build_p5,
    build_p6,
    margins,
    pack_beam,
    pack_phase,
    penalized_objective,
    unpack_beam,
    unpack_phase,
)

log = logging.getLogger(__name__)

# relaxed alpha below this is treated as "not scheduled" when rounding
_ALPHA_FLOOR = 1e-3
# normalized EH surplus targeted when restoring a feasible starting point
_START_MARGIN = 1e-2


@dataclass
class ScaConfig:
    penalty_init: float | None = None  # C0; None -> 1e-3 * (weight sum + 1)
    penalty_growth: float = 10.0  # mu
    penalty_rounds: int = 6  # T_pen
    eps1: float = 1e-4
    eps2: float = 1e-4
    eps_ao: float = 1e-4
    s1: int = 30
    s2: int = 30
    s_a: int = 10
    modulus_tol: float = 1e-3
    solver_tol: float = 1e-7
    restore_rounds: int = 3
    early_exit: bool = True
    method: str = "ipm"

    def __post_init__(self):
        if self.penalty_growth <= 1:
            raise ValueError(f"penalty_growth must exceed 1, got {self.penalty_growth}")
        for name in ("eps1", "eps2", "eps_ao", "modulus_tol", "solver_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("penalty_rounds", "s1", "s2", "s_a"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")


@dataclass
class SolveRecord:
    stage: str  # alg1 | alg2 | restore-beam | restore-phase | final
    ao_round: int
    iteration: int
    status: str
    objective: float
    true_objective: float
    solver_iterations: int
    penalty: float = 0.0
    solve_time: float = 0.0


@dataclass
class SlotTrace:
    records: list[SolveRecord] = field(default_factory=list)
    ao_objectives: list[float] = field(default_factory=list)
    ao_rounds: int = 0
    alg1_inner: list[int] = field(default_factory=list)  # SCA iterations per penalty round
    alg1_penalty_rounds: list[int] = field(default_factory=list)
    alg2_inner: list[int] = field(default_factory=list)
    early_exit: bool = False
    notes: list[str] = field(default_factory=list)

    def add(self, rec: SolveRecord):
        self.records.append(rec)

    @property
    def solves(self) -> int:
        return len(self.records)

    def summary(self) -> dict:
        return {
            "ao_rounds": self.ao_rounds,
            "alg1_inner": list(self.alg1_inner),
            "alg1_penalty_rounds": list(self.alg1_penalty_rounds),
            "alg2_inner": list(self.alg2_inner),
            "solves": self.solves,
            "solver_iterations": [r.solver_iterations for r in self.records],
            "early_exit": self.early_exit,
            "notes": list(self.notes),
        }


@dataclass
class SlotDecision:
    alpha_relaxed: np.ndarray
    alpha: np.ndarray
    rho: np.ndarray
    W: np.ndarray
    V: np.ndarray
    feasible: bool
    objective_trace: list[float]
    trace: SlotTrace


def _rel_change(new: float, old: float) -> float:
    return abs(new - old) / max(abs(old), 1.0)


def _solve(problem, config: ScaConfig, warm=None):
    return conic.solve(problem, tol_feas=config.solver_tol, tol_gap=config.solver_tol, method=config.method, warm_start=warm)


def unit_modulus(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    mag = np.abs(rho)
    return np.where(mag > 0, rho / np.where(mag > 0, mag, 1.0), 1.0 + 0j)


def _into_disc(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex).copy()
    mag = np.abs(rho)
    return np.where(mag > 1, rho / np.where(mag > 1, mag, 1), rho)


def mrt_directions(rows) -> np.ndarray:
    """Unit MRT beamformers for channel rows (each row r gives conj(r)/||r||)."""
    rows = np.asarray(rows, dtype=complex)
    nrm = np.linalg.norm(rows, axis=1, keepdims=True)
    return np.where(nrm > 0, rows.conj() / np.where(nrm > 0, nrm, 1.0), 0.0)


def initial_beamformers(prob: SlotProblem, rho, fraction: float = 0.99):
    """MRT toward every composite channel with an equal power split of ``fraction * P0``."""
    users = prob.u_i + prob.u_e
    p = fraction * prob.power_budget / max(users, 1)
    W = np.sqrt(p) * mrt_directions(prob.channels.composite_iu(rho))
    V = np.sqrt(p) * mrt_directions(prob.channels.composite_eu(rho)) if prob.u_e else np.zeros((0, prob.n_t), complex)
    return W, V


# ---------------------------------------------------------------- rounding


def round_schedule(alpha_relaxed, weights, M: int, buffer=None) -> np.ndarray:
    """Pick up to ``M`` buffered streams by descending relaxed alpha.

    Ties (to 1e-6) break by descending weight, then by index. Streams whose
    relaxed alpha is numerically zero are never picked.
    """
    a = np.asarray(alpha_relaxed, dtype=float)
    w = np.asarray(weights, dtype=float)
    k = np.ones(a.size, dtype=np.int64) if buffer is None else np.asarray(buffer, dtype=np.int64)
    order = sorted(range(a.size), key=lambda i: (-np.round(a[i], 6), -w[i], i))
    out = np.zeros(a.size, dtype=np.int64)
    picked = 0
    for i in order:
        if picked >= M:
            break
        if k[i] == 1 and a[i] > _ALPHA_FLOOR:
            out[i] = 1
            picked += 1
    return out


# ----------------------------------------------------------- Algorithm 1


def algorithm1_phase_schedule(prob: SlotProblem, rho0, W, V, config: ScaConfig, alpha0=None, trace=None, ao_round=0):
    """Penalty SCA over (alpha, rho) with fixed beamformers.

    Returns ``(rho, alpha, trace, ok)``; ``ok`` is False when a subproblem
    could not be solved, in which case the last good iterate is returned.
    """
    trace = trace if trace is not None else SlotTrace()
    rho = _into_disc(rho0)
    alpha = np.zeros(prob.u_i) if alpha0 is None else np.asarray(alpha0, float).copy()
    C = config.penalty_init if config.penalty_init is not None else 1e-3 * (float(np.sum(prob.weights)) + 1.0)
    ok = True
    for pen_round in range(config.penalty_rounds):
        prev = penalized_objective(prob, alpha, rho, C)
        inner = 0
        for it in range(config.s1):
            p5 = build_p5(prob, W, V, rho, C)
            sol = _solve(p5, config, warm=pack_phase(alpha, rho))
            inner = it + 1
            if not sol.optimal:
                trace.add(SolveRecord("alg1", ao_round, it, sol.status, np.nan, np.nan, sol.iterations, C, sol.solve_time))
                trace.notes.append(f"alg1 subproblem {sol.status}; kept previous iterate")
                ok = False
                break
            a_new, r_new = unpack_phase(prob, sol.x)
            a_new = np.clip(a_new, 0.0, 1.0)
            # the solver meets |rho_n| <= 1 only to its feasibility tolerance
            r_new = _into_disc(r_new)
            true_obj = penalized_objective(prob, a_new, r_new, C)
            trace.add(
                SolveRecord("alg1", ao_round, it, sol.status, sol.objective, true_obj, sol.iterations, C, sol.solve_time)
            )
            alpha, rho = a_new, r_new
            done = _rel_change(sol.objective, prev) < config.eps1
            prev = sol.objective
            if done:
                break
        trace.alg1_inner.append(inner)
        if not ok:
            break
        if np.max(np.abs(1.0 - np.abs(rho))) <= config.modulus_tol:
            break
        C *= config.penalty_growth
    trace.alg1_penalty_rounds.append(pen_round + 1)
    if pen_round + 1 > config.penalty_rounds or any(n > config.s1 for n in trace.alg1_inner):
        raise AssertionError("Algorithm 1 exceeded its iteration caps")
    return rho, alpha, trace, ok


# ----------------------------------------------------------- Algorithm 2


def algorithm2_beamforming(prob: SlotProblem, rho, W0, V0, config: ScaConfig, alpha0=None, trace=None, ao_round=0):
    """SCA over (alpha, W, V) with fixed phases. Returns ``(W, V, alpha, trace, ok)``."""
    trace = trace if trace is not None else SlotTrace()
    W = np.asarray(W0, dtype=complex).copy()
    V = np.asarray(V0, dtype=complex).copy()
    alpha = np.zeros(prob.u_i) if alpha0 is None else np.asarray(alpha0, float).copy()
    prev = prob.objective(alpha)
    ok = True
    inner = 0
    for it in range(config.s2):
        p6 = build_p6(prob, rho, W, V)
        sol = _solve(p6, config, warm=pack_beam(prob, alpha, W, V))
        inner = it + 1
        if not sol.optimal:
            trace.add(SolveRecord("alg2", ao_round, it, sol.status, np.nan, np.nan, sol.iterations, 0.0, sol.solve_time))
            trace.notes.append(f"alg2 subproblem {sol.status}; kept previous iterate")
            ok = False
            break
        a_new, W, V = unpack_beam(prob, sol.x)
        alpha = np.clip(a_new, 0.0, 1.0)
        trace.add(SolveRecord("alg2", ao_round, it, sol.status, sol.objective, prob.objective(alpha), sol.iterations, 0.0, sol.solve_time))
        done = _rel_change(sol.objective, prev) < config.eps2
        prev = sol.objective
        if done:
            break
    trace.alg2_inner.append(inner)
    if inner > config.s2:
        raise AssertionError("Algorithm 2 exceeded its iteration cap")
    return W, V, alpha, trace, ok


# ------------------------------------------------------ feasibility tools


def _min_margin(prob, rho, W, V, scheduled) -> float:
    m = margins(prob, rho, W, V, scheduled)
    return float(np.min(m)) if m.size else np.inf


def restore_beamformers(
    prob: SlotProblem, rho, W0, V0, scheduled, config: ScaConfig, trace=None, target=1e-3, margin_cap=1.0
):
    """SCA on the max-min normalized margin over (W, V) for a binary schedule.

    Returns ``(W, V, margin)`` with the true minimum margin of the result.
    """
    scheduled = np.asarray(scheduled, dtype=float)
    W = np.asarray(W0, dtype=complex).copy()
    V = np.asarray(V0, dtype=complex).copy()
    # a zero beamformer has a zero tangent; restart such streams from MRT
    share = 0.99 * prob.power_budget / max(int(scheduled.sum()) + prob.u_e, 1)
    dirs_w = mrt_directions(prob.channels.composite_iu(rho))
    for i in range(prob.u_i):
        if scheduled[i] < 0.5:
            W[i] = 0.0
        elif np.linalg.norm(W[i]) < 1e-9 * np.sqrt(prob.power_budget):
            W[i] = np.sqrt(share) * dirs_w[i]
    if prob.u_e:
        dirs_v = mrt_directions(prob.channels.composite_eu(rho))
        for j in range(prob.u_e):
            if np.linalg.norm(V[j]) < 1e-9 * np.sqrt(prob.power_budget):
                V[j] = np.sqrt(share) * dirs_v[j]
    total = np.sum(np.abs(W) ** 2) + np.sum(np.abs(V) ** 2)
    if total > prob.power_budget:
        f = np.sqrt(0.99 * prob.power_budget / total)
        W, V = W * f, V * f
    margin = _min_margin(prob, rho, W, V, scheduled)
    if not np.isfinite(margin):
        return W, V, margin
    prev = margin
    for it in range(config.s2):
        if margin >= target:
            break
        p = build_margin_beam(prob, rho, W, V, scheduled, margin_cap=margin_cap)
        sol = _solve(p, config)
        if not sol.optimal:
            if trace is not None:
                trace.add(SolveRecord("restore-beam", -1, it, sol.status, np.nan, margin, sol.iterations, 0.0, sol.solve_time))
            break
        _, W_new, V_new = unpack_beam(prob, sol.x[:-1])
        m_new = _min_margin(prob, rho, W_new, V_new, scheduled)
        if trace is not None:
            trace.add(SolveRecord("restore-beam", -1, it, sol.status, sol.objective, m_new, sol.iterations, 0.0, sol.solve_time))
        if m_new >= margin:
            W, V, margin = W_new, V_new, m_new
        if abs(m_new - prev) < config.eps2 * max(abs(prev), 1e-2):
            break
        prev = m_new
    return W, V, margin


def restore_phases(prob: SlotProblem, rho0, W, V, scheduled, config: ScaConfig, trace=None, target=1e-3):
    """SCA on the max-min normalized margin over rho; returns a unit-modulus rho."""
    rho = unit_modulus(rho0)
    margin = _min_margin(prob, rho, W, V, scheduled)
    for it in range(config.s1):
        if margin >= target:
            break
        p = build_margin_phase(prob, W, V, rho, scheduled)
        sol = _solve(p, config)
        if not sol.optimal:
            if trace is not None:
                trace.add(SolveRecord("restore-phase", -1, it, sol.status, np.nan, margin, sol.iterations, 0.0, sol.solve_time))
            break
        _, r_new = unpack_phase(prob, sol.x[:-1])
        r_new = unit_modulus(r_new)
        m_new = _min_margin(prob, r_new, W, V, scheduled)
        if trace is not None:
            trace.add(SolveRecord("restore-phase", -1, it, sol.status, sol.objective, m_new, sol.iterations, 0.0, sol.solve_time))
        if m_new <= margin + config.eps1 * max(abs(margin), 1e-2):
            if m_new > margin:
                rho, margin = r_new, m_new
            break
        rho, margin = r_new, m_new
    return rho, margin


def feasible_start(prob: SlotProblem, rho, config: ScaConfig, trace=None, allow_phase: bool = True):
    """Starting point with every EH row satisfied and no stream scheduled.

    Tries the equal-split MRT point first, then the margin restoration over
    the beamformers and, if needed, over the phases. Returns
    ``(rho, W, V, ok)``.
    """
    none = np.zeros(prob.u_i)
    W, V = initial_beamformers(prob, rho)
    if _min_margin(prob, rho, W, V, none) >= 0:
        return rho, W, V, True
    for _ in range(config.restore_rounds):
        # a small cap leaves power for the IU beams
        W, V, m = restore_beamformers(prob, rho, W, V, none, config, trace, margin_cap=_START_MARGIN)
        if m >= 0:
            return rho, _refill_iu(prob, rho, V), V, True
        if not allow_phase:
            break
        rho_new, m_phase = restore_phases(prob, rho, W, V, none, config, trace)
        if m_phase <= m:
            break
        rho = rho_new
        if m_phase >= 0:
            return rho, _refill_iu(prob, rho, V), V, True
    return rho, W, V, False


def _refill_iu(prob: SlotProblem, rho, V) -> np.ndarray:
    """MRT beams for every IU sharing the power the EU beams leave unused.

    A zero IU beamformer has a zero SNR tangent, which would pin its alpha
    to 0 for the rest of the slot.
    """
    spare = 0.99 * prob.power_budget - float(np.sum(np.abs(V) ** 2))
    if spare <= 0:
        return np.zeros((prob.u_i, prob.n_t), complex)
    return np.sqrt(spare / prob.u_i) * mrt_directions(prob.channels.composite_iu(rho))


def finalize_schedule(prob: SlotProblem, rho, W, V, alpha_relaxed, config: ScaConfig, trace=None):
    """Round, then re-solve the beamformers for the binary schedule.

    Streams are dropped lowest-priority first until the schedule is feasible.
    Returns ``(alpha, W, V, feasible)``.
    """
    binary = round_schedule(alpha_relaxed, prob.weights, prob.channels_available, prob.buffer)
    order = sorted(np.flatnonzero(binary), key=lambda i: (np.round(alpha_relaxed[i], 6), prob.weights[i], -i))
    while True:
        W_f, V_f, m = restore_beamformers(prob, rho, W, V, binary, config, trace)
        if m >= 0:
            if trace is not None:
                trace.add(SolveRecord("final", -1, 0, "optimal", prob.objective(binary), m, 0))
            return binary, W_f, V_f, True
        if not order:
            return binary, W_f, V_f, False
        binary = binary.copy()
        binary[order.pop(0)] = 0


# ------------------------------------------------------------------- AO


def _infeasible(prob: SlotProblem, rho, trace: SlotTrace) -> SlotDecision:
    trace.notes.append("no feasible point satisfies the energy constraints")
    return SlotDecision(
        alpha_relaxed=np.zeros(prob.u_i),
        alpha=np.zeros(prob.u_i, dtype=np.int64),
        rho=unit_modulus(rho),
        W=np.zeros((prob.u_i, prob.n_t), complex),
        V=np.zeros((prob.u_e, prob.n_t), complex),
        feasible=False,
        objective_trace=[],
        trace=trace,
    )


def _top_schedule(prob: SlotProblem) -> np.ndarray:
    return round_schedule(prob.buffer.astype(float), prob.weights, prob.channels_available, prob.buffer)


def alternating_optimize(prob: SlotProblem, config: ScaConfig, rng: RngStream | None = None, rho_init=None) -> SlotDecision:
    """Alternate the phase and beamforming blocks, then round the schedule.

    ``rho_init`` (unit modulus) overrides the random initial phases drawn
    from ``rng``.
    """
    trace = SlotTrace()
    if rho_init is None:
        gen = (rng or RngStream(0)).generator()
        rho = np.exp(1j * gen.uniform(0.0, 2.0 * np.pi, prob.n_s))
    else:
        rho = unit_modulus(rho_init)

    rho, W, V, ok = feasible_start(prob, rho, config, trace)
    if not ok:
        return _infeasible(prob, rho, trace)

    if config.early_exit:
        top = _top_schedule(prob)
        W_t, V_t, m = restore_beamformers(prob, rho, W, V, top, config, trace)
        if m >= 0:
            trace.early_exit = True
            trace.notes.append("upper bound attained at the starting phases")
            obj = prob.objective(top)
            return SlotDecision(top.astype(float), top, rho, W_t, V_t, True, [obj], trace)

    alpha = np.zeros(prob.u_i)
    ao_prev = prob.objective(alpha)
    bound = prob.upper_bound()
    for r in range(config.s_a):
        trace.ao_rounds = r + 1
        rho_new, alpha1, _, ok1 = algorithm1_phase_schedule(prob, rho, W, V, config, alpha0=alpha, trace=trace, ao_round=r)
        rho_new = unit_modulus(rho_new)
        if ok1 and _min_margin(prob, rho_new, W, V, np.zeros(prob.u_i)) >= 0:
            rho, alpha = rho_new, alpha1
        else:
            trace.notes.append(f"round {r}: phase update rejected after projection")
        W, V, alpha2, _, ok2 = algorithm2_beamforming(prob, rho, W, V, config, alpha0=alpha, trace=trace, ao_round=r)
        if ok2:
            alpha = alpha2
        obj = prob.objective(alpha)
        trace.ao_objectives.append(obj)
        if _rel_change(obj, ao_prev) < config.eps_ao and r > 0 or obj >= bound - 1e-9:
            break
        ao_prev = obj
    if trace.ao_rounds > config.s_a:
        raise AssertionError("AO exceeded its round cap")

    binary, W_f, V_f, feasible = finalize_schedule(prob, rho, W, V, alpha, config, trace)
    if not feasible:
        return _infeasible(prob, rho, trace)
    return SlotDecision(alpha, binary, rho, W_f, V_f, True, list(trace.ao_objectives), trace)


def beamforming_only(prob: SlotProblem, rho, config: ScaConfig) -> SlotDecision:
    """Optimize beamformers and schedule with the phases held at ``rho``."""
    trace = SlotTrace()
    rho = unit_modulus(rho)
    rho, W, V, ok = feasible_start(prob, rho, config, trace, allow_phase=False)
    if not ok:
        return _infeasible(prob, rho, trace)
    if config.early_exit:
        top = _top_schedule(prob)
        W_t, V_t, m = restore_beamformers(prob, rho, W, V, top, config, trace)
        if m >= 0:
            trace.early_exit = True
            return SlotDecision(top.astype(float), top, rho, W_t, V_t, True, [prob.objective(top)], trace)
    W, V, alpha, _, _ = algorithm2_beamforming(prob, rho, W, V, config, trace=trace)
    trace.ao_objectives.append(prob.objective(alpha))
    binary, W_f, V_f, feasible = finalize_schedule(prob, rho, W, V, alpha, config, trace)
    if not feasible:
        return _infeasible(prob, rho, trace)
    return SlotDecision(alpha, binary, rho, W_f, V_f, True, list(trace.ao_objectives), trace)
