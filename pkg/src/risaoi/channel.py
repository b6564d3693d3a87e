"""Per-slot channel realizations: path loss times Rayleigh small-scale fading.

Geometry: AP at the origin, RIS at ``(d_br, 0)``, every user on the x-axis at
its AP distance. The RIS-to-user distance is ``|d_b - d_br|`` floored at the
reference distance, unless given explicitly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .numerics import RngStream, sample_cn

# per-slot sub-stream ids; one per channel block so that enlarging the RIS
# never perturbs the direct links drawn under the same seed
_H_B, _H_R, _G_B, _G_R, _G_AR = 1, 2, 3, 4, 5


@dataclass(frozen=True)
class PathLossParams:
    reference_loss: float = 1e-3  # A0, linear power gain at d0
    reference_distance: float = 1.0  # d0 [m]
    n_bi: float = 2.2
    n_ri: float = 2.2
    n_bj: float = 2.2
    n_rj: float = 2.2
    n_br: float = 3.5
    d_bi: float = 31.0
    d_bj: float = 3.0
    d_br: float = 3.0
    d_ri: float | None = None
    d_rj: float | None = None

    def __post_init__(self):
        if not 0.0 < self.reference_loss <= 1.0:
            raise ValueError(f"reference_loss must lie in (0, 1], got {self.reference_loss}")
        for name in ("reference_distance", "d_bi", "d_bj", "d_br", "d_ri", "d_rj"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive, got {v}")
        for name in ("n_bi", "n_ri", "n_bj", "n_rj", "n_br"):
            if getattr(self, name) < 2.0:
                warnings.warn(f"path-loss exponent {name}={getattr(self, name)} below free-space value", stacklevel=2)

    @property
    def ris_iu_distance(self) -> float:
        if self.d_ri is not None:
            return self.d_ri
        return max(abs(self.d_bi - self.d_br), self.reference_distance)

    @property
    def ris_eu_distance(self) -> float:
        if self.d_rj is not None:
            return self.d_rj
        return max(abs(self.d_bj - self.d_br), self.reference_distance)


@dataclass(frozen=True)
class NetworkSizes:
    n_t: int = 4
    n_s: int = 40
    u_i: int = 3
    u_e: int = 3

    def __post_init__(self):
        if self.n_t < 1 or self.n_s < 1 or self.u_i < 1 or self.u_e < 0:
            raise ValueError(f"invalid network sizes {self}")


@dataclass
class ChannelRealization:
    """Channel vectors of one slot (each row is a user's channel; the received signal uses its adjoint).

    h_b: (U_I, N_t), h_r: (U_I, N_s), g_b: (U_E, N_t), g_r: (U_E, N_s),
    G: (N_s, N_t).
    """

    h_b: np.ndarray
    h_r: np.ndarray
    g_b: np.ndarray
    g_r: np.ndarray
    G: np.ndarray

    @property
    def sizes(self) -> NetworkSizes:
        return NetworkSizes(n_t=self.G.shape[1], n_s=self.G.shape[0], u_i=self.h_b.shape[0], u_e=self.g_b.shape[0])

    def iu_factors(self) -> np.ndarray:
        """Stacked U_i, shape (U_I, N_s, N_t)."""
        return self.h_r.conj()[:, :, None] * self.G[None, :, :]

    def eu_factors(self) -> np.ndarray:
        return self.g_r.conj()[:, :, None] * self.G[None, :, :]

    def composite_iu(self, rho) -> np.ndarray:
        """Rows h_i^H = rho^H U_i + h_{b,i}^H, shape (U_I, N_t)."""
        return np.einsum("n,knt->kt", np.conj(rho), self.iu_factors()) + self.h_b.conj()

    def composite_eu(self, rho) -> np.ndarray:
        if self.g_b.shape[0] == 0:
            return np.zeros((0, self.G.shape[1]), dtype=complex)
        return np.einsum("n,knt->kt", np.conj(rho), self.eu_factors()) + self.g_b.conj()

    def without_eus(self) -> "ChannelRealization":
        n_t, n_s = self.G.shape[1], self.G.shape[0]
        return ChannelRealization(
            self.h_b, self.h_r, np.zeros((0, n_t), complex), np.zeros((0, n_s), complex), self.G
        )


def amplitude_gain(params: PathLossParams, d: float, n: float) -> float:
    """Large-scale amplitude factor ``sqrt(A0 * (d/d0)^-n)``."""
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    return float(np.sqrt(params.reference_loss * (d / params.reference_distance) ** (-n)))


def draw_channels(params: PathLossParams, sizes: NetworkSizes, rng: RngStream) -> ChannelRealization:
    p = params
    a_bi = amplitude_gain(p, p.d_bi, p.n_bi)
    a_ri = amplitude_gain(p, p.ris_iu_distance, p.n_ri)
    a_bj = amplitude_gain(p, p.d_bj, p.n_bj)
    a_rj = amplitude_gain(p, p.ris_eu_distance, p.n_rj)
    a_g = amplitude_gain(p, p.d_br, p.n_br)

    def block(key, rows, cols):
        if rows == 0:
            return np.zeros((0, cols), complex)
        # element index leads so a larger RIS extends a smaller one
        return sample_cn((cols, rows), rng.child(key)).T

    return ChannelRealization(
        h_b=a_bi * block(_H_B, sizes.u_i, sizes.n_t),
        h_r=a_ri * block(_H_R, sizes.u_i, sizes.n_s),
        g_b=a_bj * block(_G_B, sizes.u_e, sizes.n_t),
        g_r=a_rj * block(_G_R, sizes.u_e, sizes.n_s),
        G=a_g * sample_cn((sizes.n_s, sizes.n_t), rng.child(_G_AR)),
    )


def composite_factor_iu(real: ChannelRealization, i: int):
    """Return ``(U_i, h_{b,i})`` with ``U_i = diag(h_{r,i}^H) G``."""
    if not 0 <= i < real.h_b.shape[0]:
        raise IndexError(f"IU index {i} out of range")
    return real.h_r[i].conj()[:, None] * real.G, real.h_b[i]


def composite_factor_eu(real: ChannelRealization, j: int):
    if not 0 <= j < real.g_b.shape[0]:
        raise IndexError(f"EU index {j} out of range")
    return real.g_r[j].conj()[:, None] * real.G, real.g_b[j]
