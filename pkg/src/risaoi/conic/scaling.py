"""Diagonal (Ruiz) equilibration of a standard-form conic program."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cones import ConeDims
from .problem import StandardForm


@dataclass
class Scaling:
    col: np.ndarray  # x = col * x_scaled
    row_eq: np.ndarray  # A_scaled = row_eq[:,None] * A * col
    row_cone: np.ndarray
    cost: float


def equilibrate(sf: StandardForm, dims: ConeDims, passes: int = 12):
    """Return a scaled copy of ``sf`` and the :class:`Scaling` used.

    Rows inside one SOC block share a single factor so the cone is preserved.
    """
    A, G = sf.A.copy(), sf.G.copy()
    n = sf.q.size
    col = np.ones(n)
    r_eq = np.ones(A.shape[0])
    r_cone = np.ones(G.shape[0])
    soc_starts = np.concatenate([[0], np.cumsum(dims.q)[:-1]]).astype(np.intp) if dims.q else np.zeros(0, np.intp)
    for _ in range(passes):
        stacked = np.vstack([A, G]) if A.size else G
        cmax = np.max(np.abs(stacked), axis=0) if stacked.size else np.ones(n)
        cmax = np.where(cmax > 0, cmax, 1.0)
        dc = 1.0 / np.sqrt(cmax)
        A *= dc
        G *= dc
        col *= dc
        if A.size:
            ra = np.max(np.abs(A), axis=1)
            ra = np.where(ra > 0, ra, 1.0)
            de = 1.0 / np.sqrt(ra)
            A *= de[:, None]
            r_eq *= de
        if G.size:
            rg = np.max(np.abs(G), axis=1)
            if soc_starts.size:
                rg[dims.l :] = np.repeat(np.maximum.reduceat(rg[dims.l :], soc_starts), dims.q)
            rg = np.where(rg > 0, rg, 1.0)
            dg = 1.0 / np.sqrt(rg)
            G *= dg[:, None]
            r_cone *= dg
    q = sf.q * col
    qn = np.max(np.abs(q)) if q.size else 0.0
    cost = 1.0 / qn if qn > 0 else 1.0
    scaled = StandardForm(
        q=q * cost,
        A=A,
        b=sf.b * r_eq,
        G=G,
        h=sf.h * r_cone,
        l=sf.l,
        qdims=list(sf.qdims),
    )
    return scaled, Scaling(col=col, row_eq=r_eq, row_cone=r_cone, cost=cost)
