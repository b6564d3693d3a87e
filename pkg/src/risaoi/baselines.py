"""Comparator policies: MRT, random phases, the no-EU variant and an AF relay.

The AF relay is a stand-in for an active-hardware comparison. It sits at the
RIS position with ``n_r`` antennas and amplifies the AP's information signal
toward each scheduled IU; the AP and relay powers add up to ``P0``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, NetworkSizes, PathLossParams, amplitude_gain
from .numerics import RngStream, sample_cn
from .sca import mrt_directions, round_schedule
from .sca.problems import SlotProblem, eh_values, snr_values

# relay channel sub-streams, disjoint from the ones used by draw_channels
_AR, _RI, _RJ = 6, 7, 8


class BaselineKind(str, enum.Enum):
    PROPOSED = "proposed"
    MRT = "mrt"
    RANDOM_PHASE = "random-phase"
    NO_EU = "no-eu"
    AF_RELAY = "af-relay"

    @classmethod
    def parse(cls, tag) -> "BaselineKind":
        if isinstance(tag, cls):
            return tag
        try:
            return cls(str(tag).strip().lower())
        except ValueError:
            raise ValueError(f"unknown policy {tag!r}; expected one of {[k.value for k in cls]}") from None


def random_phases(n_s: int, rng) -> np.ndarray:
    """I.i.d. uniform phases on the unit circle."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    return np.exp(1j * gen.uniform(0.0, 2.0 * np.pi, n_s))


def mrt_beamformers(channels: ChannelRealization, rho, p_iu, p_eu):
    """MRT beams on the composite channels with per-user powers ``p_iu``, ``p_eu``.

    A zero-norm channel yields a zero beamformer.
    """
    p_iu = np.asarray(p_iu, dtype=float)
    p_eu = np.asarray(p_eu, dtype=float)
    if np.any(p_iu < 0) or np.any(p_eu < 0):
        raise ValueError("powers must be nonnegative")
    W = np.sqrt(p_iu)[:, None] * mrt_directions(channels.composite_iu(rho))
    V = np.sqrt(p_eu)[:, None] * mrt_directions(channels.composite_eu(rho)) if p_eu.size else np.zeros((0, W.shape[1]), complex)
    return W, V


def eh_power_split(gains, n_info: int, budget: float, threshold: float, iters: int = 100):
    """Equal split among ``n_info`` IUs and the EUs, EU shares raised until every EU harvests ``threshold``.

    ``gains`` are the EUs' ``||g_j||^2``. Bisection runs on the common EU
    power ``q`` between the equal share and ``budget / U_E``. Returns
    ``(p_info, q)`` or ``None`` when even the whole budget falls short.
    """
    gains = np.asarray(gains, dtype=float)
    u_e = gains.size
    if u_e == 0 or threshold <= 0:
        share = budget / max(n_info + u_e, 1)
        return (share if n_info else 0.0), share

    def ok(q):
        return bool(np.all(q * gains >= threshold))

    q_lo = budget / (n_info + u_e)
    if ok(q_lo):
        return (q_lo if n_info else 0.0), q_lo
    q_hi = budget / u_e
    if not ok(q_hi):
        return None
    for _ in range(iters):
        mid = 0.5 * (q_lo + q_hi)
        if ok(mid):
            q_hi = mid
        else:
            q_lo = mid
    p_info = (budget - u_e * q_hi) / n_info if n_info else 0.0
    return max(p_info, 0.0), q_hi


@dataclass
class BaselineDecision:
    alpha: np.ndarray  # binary schedule
    rho: np.ndarray
    W: np.ndarray
    V: np.ndarray
    feasible: bool
    snr: np.ndarray  # realized per IU, linear
    harvested: np.ndarray  # per EU, watts


def mrt_slot(prob: SlotProblem, rho) -> BaselineDecision:
    """Top-M streams by weight, MRT beams, equal power split with EH bisection."""
    alpha = round_schedule(prob.buffer.astype(float), prob.weights, prob.channels_available, prob.buffer)
    g = np.linalg.norm(prob.channels.composite_eu(rho), axis=1) ** 2
    n_info = int(alpha.sum())
    split = eh_power_split(g, n_info, prob.power_budget, prob.energy_threshold if prob.eh_active else 0.0)
    if split is None:
        zeros_w = np.zeros((prob.u_i, prob.n_t), complex)
        zeros_v = np.zeros((prob.u_e, prob.n_t), complex)
        return BaselineDecision(np.zeros(prob.u_i, np.int64), rho, zeros_w, zeros_v, False, np.zeros(prob.u_i), np.zeros(prob.u_e))
    p_info, q = split
    W, V = mrt_beamformers(prob.channels, rho, alpha * p_info, np.full(prob.u_e, q))
    return BaselineDecision(alpha, rho, W, V, True, snr_values(prob, rho, W), eh_values(prob, rho, V))


# ------------------------------------------------------------------ AF relay


@dataclass
class RelayChannels:
    """AP-to-relay ``H`` (N_r, N_t) and relay-to-user columns ``f`` (U_I, N_r), ``e`` (U_E, N_r)."""

    H: np.ndarray
    f: np.ndarray
    e: np.ndarray


def draw_relay_channels(params: PathLossParams, sizes: NetworkSizes, n_r: int, rng: RngStream) -> RelayChannels:
    """Rayleigh links for a relay at the RIS position, same path-loss laws as the RIS links."""
    if n_r < 1:
        raise ValueError(f"relay needs at least one antenna, got {n_r}")
    a_ar = amplitude_gain(params, params.d_br, params.n_br)
    a_ri = amplitude_gain(params, params.ris_iu_distance, params.n_ri)
    a_rj = amplitude_gain(params, params.ris_eu_distance, params.n_rj)
    e = a_rj * sample_cn((sizes.u_e, n_r), rng.child(_RJ)) if sizes.u_e else np.zeros((0, n_r), complex)
    return RelayChannels(
        H=a_ar * sample_cn((n_r, sizes.n_t), rng.child(_AR)),
        f=a_ri * sample_cn((sizes.u_i, n_r), rng.child(_RI)),
        e=e,
    )


def af_cascade_snr(g1, g2):
    """End-to-end SNR of a variable-gain AF hop pair, g1 g2 / (g1 + g2 + 1)."""
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    return g1 * g2 / (g1 + g2 + 1.0)


def af_received_snr(H, u, f, p: float, q: float, noise: float) -> float:
    """SNR of the relayed copy evaluated from the signal chain itself.

    AP sends ``sqrt(p) u x``; the relay combines with ``c = H u / ||H u||``,
    scales by ``g`` so that its output power is ``q`` and transmits along
    ``f / ||f||``. The IU sees ``a x + n_eff``.
    """
    Hu = H @ u
    c = Hu / np.linalg.norm(Hu)
    rx_power = p * abs(np.vdot(c, Hu)) ** 2 + noise * np.vdot(c, c).real
    g = np.sqrt(q / rx_power)
    b = f / np.linalg.norm(f)
    hop2 = np.vdot(f, b)  # channel row f^H applied to the relay beam
    a = g * hop2 * np.sqrt(p) * np.vdot(c, Hu)
    n_eff = abs(g * hop2) ** 2 * noise * np.vdot(c, c).real + noise
    return float(abs(a) ** 2 / n_eff)


def af_relay_slot(prob: SlotProblem, relay: RelayChannels, relay_share: float) -> BaselineDecision:
    """Serve the top-M streams through the relay with MRC-in / MRT-out amplification.

    The AP keeps ``(1 - relay_share) P0`` for its beams (toward the relay's
    strongest direction for information, MRT toward the EUs for energy) and
    the relay spends ``relay_share P0`` split equally over scheduled IUs. An
    IU combines the direct and relayed copies, so its SNR is the direct SNR
    plus the AF cascade SNR. EUs harvest the AP's direct energy beams only.
    """
    if not 0.0 < relay_share < 1.0:
        raise ValueError(f"relay power share must lie in (0, 1), got {relay_share}")
    ch = prob.channels
    no_ris = np.zeros(prob.n_s, complex)  # relay replaces the surface entirely
    alpha = round_schedule(prob.buffer.astype(float), prob.weights, prob.channels_available, prob.buffer)
    n_info = int(alpha.sum())
    ap_budget = (1.0 - relay_share) * prob.power_budget
    g = np.linalg.norm(ch.g_b, axis=1) ** 2
    split = eh_power_split(g, n_info, ap_budget, prob.energy_threshold if prob.eh_active else 0.0)
    if split is None:
        zw = np.zeros((prob.u_i, prob.n_t), complex)
        zv = np.zeros((prob.u_e, prob.n_t), complex)
        return BaselineDecision(np.zeros(prob.u_i, np.int64), no_ris, zw, zv, False, np.zeros(prob.u_i), np.zeros(prob.u_e))
    p_info, q_eu = split
    _, svals, vh = np.linalg.svd(relay.H)
    u = vh[0].conj()  # unit input direction with the strongest relay gain
    A = svals[0] ** 2
    q_relay = relay_share * prob.power_budget / max(n_info, 1)
    W = np.zeros((prob.u_i, prob.n_t), complex)
    snr = np.zeros(prob.u_i)
    for i in range(prob.u_i):
        if not alpha[i]:
            continue
        W[i] = np.sqrt(p_info) * u
        g1 = p_info * A / prob.noise[i]
        g2 = q_relay * np.linalg.norm(relay.f[i]) ** 2 / prob.noise[i]
        direct = abs(np.vdot(ch.h_b[i], W[i])) ** 2 / prob.noise[i]
        snr[i] = direct + float(af_cascade_snr(g1, g2))
    V = np.sqrt(q_eu) * mrt_directions(ch.g_b.conj()) if prob.u_e else np.zeros((0, prob.n_t), complex)
    harvested = np.abs(np.einsum("jt,jt->j", ch.g_b.conj(), V)) ** 2 if prob.u_e else np.zeros(0)
    return BaselineDecision(alpha, no_ris, W, V, True, snr, harvested)
