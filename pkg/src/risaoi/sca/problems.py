"""Slot-level problem data and the convex subproblem builders.

Variable layouts (all real):

* phase block:  ``[alpha (U_I), Re rho (N_s), Im rho (N_s)]``
* beam block:   ``[alpha (U_I), Re W, Im W, Re V, Im V]`` with ``W`` (U_I, N_t)
  and ``V`` (U_E, N_t) flattened row-major.

SNR rows are divided by ``gamma_th * sigma_i^2`` and EH rows by ``Q`` so that
every surrogate row is O(1) regardless of the link budget.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..channel import ChannelRealization
from ..conic import ConicProblem, SocBlock
from .surrogates import AffineMagnitude, conj_linear_map, linear_map


@dataclass
class SlotProblem:
    channels: ChannelRealization
    weights: np.ndarray  # (A_i - z_i) k_i
    buffer: np.ndarray  # k_i
    gamma_th: float
    noise: np.ndarray  # sigma_i^2 per IU [W]
    energy_threshold: float  # Q [W]
    power_budget: float  # P0 [W]
    channels_available: int  # M

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.buffer = np.asarray(self.buffer, dtype=np.int64)
        u_i = self.channels.h_b.shape[0]
        self.noise = np.broadcast_to(np.asarray(self.noise, dtype=float), (u_i,)).copy()
        if self.weights.shape != (u_i,) or self.buffer.shape != (u_i,):
            raise ValueError("weights and buffer must have one entry per IU")
        if np.any(self.weights < 0):
            raise ValueError("negative AoI weights; the upstream AoI state is inconsistent")
        if np.any(self.noise <= 0) or self.power_budget <= 0:
            raise ValueError("noise powers and the power budget must be positive")
        if self.gamma_th < 0 or self.energy_threshold < 0:
            raise ValueError("thresholds must be nonnegative")

    @property
    def u_i(self) -> int:
        return self.channels.h_b.shape[0]

    @property
    def u_e(self) -> int:
        return self.channels.g_b.shape[0]

    @property
    def n_t(self) -> int:
        return self.channels.G.shape[1]

    @property
    def n_s(self) -> int:
        return self.channels.G.shape[0]

    def snr_scale(self, i: int) -> float:
        """Right-hand side of the SNR row for a fully scheduled stream."""
        return float(self.gamma_th * self.noise[i])

    def snr_active(self, i: int) -> bool:
        return bool(self.buffer[i] == 1 and self.snr_scale(i) > 0)

    @property
    def eh_active(self) -> bool:
        return self.u_e > 0 and self.energy_threshold > 0

    def upper_bound(self) -> float:
        """Largest achievable objective: the M largest buffered weights."""
        w = np.sort(self.weights[self.buffer == 1])[::-1]
        return float(np.sum(w[: self.channels_available]))

    def objective(self, alpha) -> float:
        return float(self.weights @ (np.asarray(alpha) * self.buffer))


# ---------------------------------------------------------------- layouts


def phase_vars(prob: SlotProblem) -> int:
    return prob.u_i + 2 * prob.n_s


def pack_phase(alpha, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return np.concatenate([np.asarray(alpha, float), rho.real, rho.imag])


def unpack_phase(prob: SlotProblem, x):
    u, n = prob.u_i, prob.n_s
    return x[:u].copy(), x[u : u + n] + 1j * x[u + n : u + 2 * n]


def beam_vars(prob: SlotProblem) -> int:
    return prob.u_i + 2 * (prob.u_i + prob.u_e) * prob.n_t


def _beam_offsets(prob: SlotProblem):
    u, e, t = prob.u_i, prob.u_e, prob.n_t
    re_w = u
    im_w = re_w + u * t
    re_v = im_w + u * t
    im_v = re_v + e * t
    return re_w, im_w, re_v, im_v


def pack_beam(prob: SlotProblem, alpha, W, V) -> np.ndarray:
    W = np.asarray(W, dtype=complex).reshape(prob.u_i, prob.n_t)
    V = np.asarray(V, dtype=complex).reshape(prob.u_e, prob.n_t)
    return np.concatenate([np.asarray(alpha, float), W.real.ravel(), W.imag.ravel(), V.real.ravel(), V.imag.ravel()])


def unpack_beam(prob: SlotProblem, x):
    re_w, im_w, re_v, im_v = _beam_offsets(prob)
    u, e, t = prob.u_i, prob.u_e, prob.n_t
    W = (x[re_w:im_w] + 1j * x[im_w:re_v]).reshape(u, t)
    V = (x[re_v:im_v] + 1j * x[im_v : im_v + e * t]).reshape(e, t)
    return x[:u].copy(), W, V


# ------------------------------------------------------- constraint maps


def snr_map_phase(prob: SlotProblem, i: int, w_i, n_vars: int, offset: int) -> AffineMagnitude:
    """s(rho) = (rho^H U_i + h_{b,i}^H) w_i."""
    U = prob.channels.h_r[i].conj()[:, None] * prob.channels.G
    return conj_linear_map(U @ w_i, np.vdot(prob.channels.h_b[i], w_i), n_vars, offset)


def eh_map_phase(prob: SlotProblem, j: int, v_j, n_vars: int, offset: int) -> AffineMagnitude:
    V = prob.channels.g_r[j].conj()[:, None] * prob.channels.G
    return conj_linear_map(V @ v_j, np.vdot(prob.channels.g_b[j], v_j), n_vars, offset)


def snr_map_beam(prob: SlotProblem, i: int, rho, n_vars: int) -> AffineMagnitude:
    """s(w_i) = h_i^H w_i for the composite channel at fixed ``rho``."""
    re_w, im_w, _, _ = _beam_offsets(prob)
    h_row = prob.channels.composite_iu(rho)[i]
    t = prob.n_t
    return linear_map(h_row.conj(), n_vars, re_w + i * t, im_w + i * t)


def eh_map_beam(prob: SlotProblem, j: int, rho, n_vars: int) -> AffineMagnitude:
    _, _, re_v, im_v = _beam_offsets(prob)
    g_row = prob.channels.composite_eu(rho)[j]
    t = prob.n_t
    return linear_map(g_row.conj(), n_vars, re_v + j * t, im_v + j * t)


# ----------------------------------------------------------- builders


def _schedule_rows(prob: SlotProblem, n_vars: int):
    rows = np.zeros((1, n_vars))
    rows[0, : prob.u_i] = 1.0
    return rows, np.array([-np.inf]), np.array([float(prob.channels_available)]), ["channels"]


def _alpha_bounds(prob: SlotProblem, n_vars: int, fixed_alpha=None):
    lb = np.full(n_vars, -np.inf)
    ub = np.full(n_vars, np.inf)
    if fixed_alpha is None:
        lb[: prob.u_i] = 0.0
        ub[: prob.u_i] = prob.buffer.astype(float)
    else:
        lb[: prob.u_i] = ub[: prob.u_i] = fixed_alpha
    return lb, ub


def _surrogate_rows(prob, maps_snr, maps_eh, x0, n_vars, margin_col=None):
    """Rows ``minorant/scale - alpha_i (or 1) [- t] >= 0``."""
    rows, lo, names = [], [], []
    for i, mp in maps_snr:
        coef, const = mp.minorant(x0)
        sc = prob.snr_scale(i)
        r = coef / sc
        r[i] -= 1.0
        if margin_col is not None:
            r[margin_col] -= 1.0
        rows.append(r)
        lo.append(-const / sc)
        names.append(f"snr{i}")
    for j, mp in maps_eh:
        coef, const = mp.minorant(x0)
        sc = prob.energy_threshold
        r = coef / sc
        if margin_col is not None:
            r[margin_col] -= 1.0
        rows.append(r)
        lo.append(1.0 - const / sc)
        names.append(f"eh{j}")
    return rows, lo, names


def build_p5(prob: SlotProblem, W, V, rho0, penalty: float, fixed_alpha=None) -> ConicProblem:
    """Phase/scheduling subproblem linearized at ``rho0``.

    The objective offset makes the surrogate value at ``rho0`` equal the
    penalized objective ``sum w a + C sum(|rho_n|^2 - 1)`` there.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.size != prob.n_s:
        raise ValueError(f"rho0 has {rho0.size} entries, RIS has {prob.n_s}")
    if np.any(np.abs(rho0) > 1 + 1e-9):
        raise ValueError("expansion point violates |rho_n| <= 1")
    W = np.asarray(W, dtype=complex).reshape(prob.u_i, prob.n_t)
    V = np.asarray(V, dtype=complex).reshape(prob.u_e, prob.n_t)
    n = phase_vars(prob)
    u, N = prob.u_i, prob.n_s
    x0 = pack_phase(np.zeros(u), rho0)

    c = np.zeros(n)
    c[:u] = prob.weights * prob.buffer
    c[u : u + N] = 2.0 * penalty * rho0.real
    c[u + N :] = 2.0 * penalty * rho0.imag
    offset = -penalty * float(np.sum(np.abs(rho0) ** 2)) - penalty * N

    snr = [(i, snr_map_phase(prob, i, W[i], n, u)) for i in range(u) if prob.snr_active(i)]
    eh = [(j, eh_map_phase(prob, j, V[j], n, u)) for j in range(prob.u_e)] if prob.eh_active else []
    rows, lo, names = _surrogate_rows(prob, snr, eh, x0, n)
    srows, slo, shi, snames = _schedule_rows(prob, n)
    lb, ub = _alpha_bounds(prob, n, fixed_alpha)
    soc = [_unit_disc(n, u + k, u + N + k, f"modulus{k}") for k in range(N)]
    names_x = [f"alpha{i}" for i in range(u)] + [f"re_rho{k}" for k in range(N)] + [f"im_rho{k}" for k in range(N)]
    return ConicProblem(
        objective=c,
        rows=np.vstack([srows] + rows) if rows else srows,
        row_lo=np.concatenate([slo, lo]),
        row_hi=np.concatenate([shi, np.full(len(rows), np.inf)]),
        lb=lb,
        ub=ub,
        soc=soc,
        names=names_x,
        row_names=snames + names,
        offset=offset,
    )


def _unit_disc(n, re_idx, im_idx, name):
    A = np.zeros((2, n))
    A[0, re_idx] = 1.0
    A[1, im_idx] = 1.0
    return SocBlock(A=A, b=np.zeros(2), c=np.zeros(n), d=1.0, name=name)


def _power_soc(prob: SlotProblem, n: int, start: int, stop: int) -> SocBlock:
    A = np.zeros((stop - start, n))
    A[:, start:stop] = np.eye(stop - start)
    return SocBlock(A=A, b=np.zeros(stop - start), c=np.zeros(n), d=float(np.sqrt(prob.power_budget)), name="power")


def build_p6(prob: SlotProblem, rho, W0, V0, fixed_alpha=None) -> ConicProblem:
    """Beamforming/scheduling subproblem linearized at ``(W0, V0)``."""
    W0 = np.asarray(W0, dtype=complex).reshape(prob.u_i, prob.n_t)
    V0 = np.asarray(V0, dtype=complex).reshape(prob.u_e, prob.n_t)
    p0 = float(np.sum(np.abs(W0) ** 2) + np.sum(np.abs(V0) ** 2))
    if p0 > prob.power_budget * (1 + 1e-6):
        raise ValueError(f"expansion point uses {p0:.4g} W, budget is {prob.power_budget:.4g} W")
    n = beam_vars(prob)
    u = prob.u_i
    x0 = pack_beam(prob, np.zeros(u), W0, V0)
    c = np.zeros(n)
    c[:u] = prob.weights * prob.buffer
    snr = [(i, snr_map_beam(prob, i, rho, n)) for i in range(u) if prob.snr_active(i)]
    eh = [(j, eh_map_beam(prob, j, rho, n)) for j in range(prob.u_e)] if prob.eh_active else []
    rows, lo, names = _surrogate_rows(prob, snr, eh, x0, n)
    srows, slo, shi, snames = _schedule_rows(prob, n)
    lb, ub = _alpha_bounds(prob, n, fixed_alpha)
    return ConicProblem(
        objective=c,
        rows=np.vstack([srows] + rows) if rows else srows,
        row_lo=np.concatenate([slo, lo]),
        row_hi=np.concatenate([shi, np.full(len(rows), np.inf)]),
        lb=lb,
        ub=ub,
        soc=[_power_soc(prob, n, u, n)],
        row_names=snames + names,
    )


def build_margin_beam(prob: SlotProblem, rho, W0, V0, scheduled, margin_cap: float = 1.0) -> ConicProblem:
    """Max-min normalized margin over (W, V) for a fixed binary schedule.

    Variables ``[beam layout..., t]``; only scheduled streams' SNR rows and
    the EH rows enter. ``t`` is capped so that the problem stays bounded when
    every row is loose.
    """
    scheduled = np.asarray(scheduled, dtype=float)
    nb = beam_vars(prob)
    n = nb + 1
    u = prob.u_i
    x0 = np.concatenate([pack_beam(prob, scheduled, W0, V0), [0.0]])
    c = np.zeros(n)
    c[-1] = 1.0
    snr = [(i, snr_map_beam(prob, i, rho, n)) for i in range(u) if prob.snr_active(i) and scheduled[i] > 0.5]
    eh = [(j, eh_map_beam(prob, j, rho, n)) for j in range(prob.u_e)] if prob.eh_active else []
    rows, lo, names = _surrogate_rows(prob, snr, eh, x0, n, margin_col=n - 1)
    lb = np.full(n, -np.inf)
    ub = np.full(n, np.inf)
    lb[:u] = ub[:u] = scheduled
    ub[-1] = margin_cap
    # unscheduled streams carry no power
    re_w, im_w, _, _ = _beam_offsets(prob)
    for i in range(u):
        if scheduled[i] < 0.5:
            for off in (re_w, im_w):
                lb[off + i * prob.n_t : off + (i + 1) * prob.n_t] = 0.0
                ub[off + i * prob.n_t : off + (i + 1) * prob.n_t] = 0.0
    return ConicProblem(
        objective=c,
        rows=np.vstack(rows) if rows else np.zeros((0, n)),
        row_lo=np.asarray(lo, dtype=float),
        row_hi=np.full(len(rows), np.inf),
        lb=lb,
        ub=ub,
        soc=[_power_soc(prob, n, u, nb)],
        row_names=names,
    )


def build_margin_phase(prob: SlotProblem, W, V, rho0, scheduled, margin_cap: float = 1.0) -> ConicProblem:
    """Max-min normalized margin over rho (|rho_n| <= 1) for a fixed schedule."""
    scheduled = np.asarray(scheduled, dtype=float)
    W = np.asarray(W, dtype=complex).reshape(prob.u_i, prob.n_t)
    V = np.asarray(V, dtype=complex).reshape(prob.u_e, prob.n_t)
    u, N = prob.u_i, prob.n_s
    n = phase_vars(prob) + 1
    x0 = np.concatenate([pack_phase(scheduled, rho0), [0.0]])
    c = np.zeros(n)
    c[-1] = 1.0
    snr = [(i, snr_map_phase(prob, i, W[i], n, u)) for i in range(u) if prob.snr_active(i) and scheduled[i] > 0.5]
    eh = [(j, eh_map_phase(prob, j, V[j], n, u)) for j in range(prob.u_e)] if prob.eh_active else []
    rows, lo, names = _surrogate_rows(prob, snr, eh, x0, n, margin_col=n - 1)
    lb = np.full(n, -np.inf)
    ub = np.full(n, np.inf)
    lb[:u] = ub[:u] = scheduled
    ub[-1] = margin_cap
    return ConicProblem(
        objective=c,
        rows=np.vstack(rows) if rows else np.zeros((0, n)),
        row_lo=np.asarray(lo, dtype=float),
        row_hi=np.full(len(rows), np.inf),
        lb=lb,
        ub=ub,
        soc=[_unit_disc(n, u + k, u + N + k, f"modulus{k}") for k in range(N)],
        row_names=names,
    )


# ------------------------------------------------------------ true values


def snr_values(prob: SlotProblem, rho, W) -> np.ndarray:
    """Realized |h_i^H w_i|^2 / sigma_i^2 for every IU."""
    H = prob.channels.composite_iu(rho)
    W = np.asarray(W, dtype=complex).reshape(prob.u_i, prob.n_t)
    return np.abs(np.einsum("it,it->i", H, W)) ** 2 / prob.noise


def eh_values(prob: SlotProblem, rho, V) -> np.ndarray:
    if prob.u_e == 0:
        return np.zeros(0)
    G = prob.channels.composite_eu(rho)
    V = np.asarray(V, dtype=complex).reshape(prob.u_e, prob.n_t)
    return np.abs(np.einsum("jt,jt->j", G, V)) ** 2


def margins(prob: SlotProblem, rho, W, V, alpha) -> np.ndarray:
    """Normalized true margins of the SNR rows (for alpha_i k_i > 0) and EH rows."""
    out = []
    snr = snr_values(prob, rho, W)
    alpha = np.asarray(alpha, dtype=float)
    for i in range(prob.u_i):
        if prob.snr_active(i) and alpha[i] > 0:
            out.append(snr[i] * prob.noise[i] / prob.snr_scale(i) - alpha[i])
    if prob.eh_active:
        out.extend(eh_values(prob, rho, V) / prob.energy_threshold - 1.0)
    return np.asarray(out, dtype=float)


def penalized_objective(prob: SlotProblem, alpha, rho, penalty: float) -> float:
    return prob.objective(alpha) + penalty * float(np.sum(np.abs(rho) ** 2 - 1.0))
