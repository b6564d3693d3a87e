"""Cone arithmetic for the product of a nonnegative orthant and second-order cones.

Vectors are laid out as ``[orthant (l entries), soc_1, soc_2, ...]``; each SOC
block is ``(t, u)`` with ``||u|| <= t``. Blocks of equal size are processed
together as one 2-D gather so the per-iteration cost stays vectorized.
"""

from __future__ import annotations

import numpy as np


class ConeDims:
    def __init__(self, l: int, qdims):
        self.l = int(l)
        self.q = [int(k) for k in qdims]
        self.m = self.l + sum(self.q)
        self.blocks = []
        off = self.l
        starts: dict[int, list[int]] = {}
        for k in self.q:
            self.blocks.append(slice(off, off + k))
            starts.setdefault(k, []).append(off)
            off += k
        # one (nblocks, k) index array per distinct block size
        self.groups = [np.asarray(st)[:, None] + np.arange(k)[None, :] for k, st in sorted(starts.items())]

    @property
    def degree(self) -> int:
        return self.l + len(self.q)

    def identity(self) -> np.ndarray:
        e = np.zeros(self.m)
        e[: self.l] = 1.0
        for idx in self.groups:
            e[idx[:, 0]] = 1.0
        return e


def _split(u):
    u1 = u[:, 1:]
    return u[:, 0], u1, np.sqrt(np.einsum("ij,ij->i", u1, u1))


def jnorm(u: np.ndarray) -> float:
    """sqrt(u0^2 - ||u1||^2), computed without cancellation."""
    nu = np.linalg.norm(u[1:])
    return float(np.sqrt(max((u[0] - nu) * (u[0] + nu), 0.0)))


def prod(dims: ConeDims, u, v) -> np.ndarray:
    """Jordan product u o v."""
    out = np.empty(dims.m)
    out[: dims.l] = u[: dims.l] * v[: dims.l]
    for idx in dims.groups:
        a, b = u[idx], v[idx]
        out[idx[:, 0]] = np.einsum("ij,ij->i", a, b)
        out[idx[:, 1:]] = a[:, :1] * b[:, 1:] + b[:, :1] * a[:, 1:]
    return out


def inv_prod(dims: ConeDims, u, v) -> np.ndarray:
    """Solve u o x = v for x (u in the cone interior)."""
    out = np.empty(dims.m)
    out[: dims.l] = v[: dims.l] / u[: dims.l]
    for idx in dims.groups:
        a, b = u[idx], v[idx]
        a0, a1, na = _split(a)
        det = (a0 - na) * (a0 + na)
        x0 = (a0 * b[:, 0] - np.einsum("ij,ij->i", a1, b[:, 1:])) / det
        out[idx[:, 0]] = x0
        out[idx[:, 1:]] = (b[:, 1:] - x0[:, None] * a1) / a0[:, None]
    return out


def max_step(dims: ConeDims, x, dx) -> float:
    """Largest alpha with x + alpha*dx in the cone (``inf`` if unbounded)."""
    alpha = np.inf
    if dims.l:
        xl, dl = x[: dims.l], dx[: dims.l]
        neg = dl < 0
        if np.any(neg):
            alpha = float(np.min(-xl[neg] / dl[neg]))
    for idx in dims.groups:
        u, d = x[idx], dx[idx]
        u0, u1, nu = _split(u)
        d0, d1, nd = _split(d)
        leaving = d0 < nd
        if not np.any(leaving):
            continue
        a = d0**2 - nd**2
        b = u0 * d0 - np.einsum("ij,ij->i", u1, d1)
        c = np.maximum((u0 - nu) * (u0 + nu), 0.0)
        den = -b + np.sqrt(np.maximum(b * b - a * c, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = np.where(den > 0, c / np.where(den > 0, den, 1.0), np.inf)
            cand = np.where(d0 < 0, np.minimum(cand, -u0 / np.where(d0 < 0, d0, -1.0)), cand)
        alpha = min(alpha, float(np.min(cand[leaving])))
    return alpha


def interior_shift(dims: ConeDims, x) -> float:
    """Smallest alpha such that x + alpha*e is in the (closed) cone."""
    vals = []
    if dims.l:
        vals.append(float(-np.min(x[: dims.l])))
    for idx in dims.groups:
        u0, _u1, nu = _split(x[idx])
        vals.append(float(np.max(nu - u0)))
    return max(vals) if vals else -1.0


def project(dims: ConeDims, x, zero: int = 0) -> np.ndarray:
    """Project onto {0}^zero x cone (``x`` includes the leading ``zero`` entries)."""
    out = np.array(x, dtype=float)
    out[:zero] = 0.0
    body = out[zero:]
    body[: dims.l] = np.maximum(body[: dims.l], 0.0)
    for idx in dims.groups:
        u = body[idx]
        t, u1, nu = _split(u)
        inside = nu <= t
        polar = nu <= -t
        a = 0.5 * (t + nu)
        scale = np.where(nu > 0, a / np.where(nu > 0, nu, 1.0), 0.0)
        proj = np.concatenate([a[:, None], scale[:, None] * u1], axis=1)
        proj[polar] = 0.0
        proj[inside] = u[inside]
        body[idx] = proj
    return out


def nt_scaling(dims: ConeDims, s, z):
    """Nesterov-Todd scaling ``W`` (symmetric) with ``W z = W^{-1} s = lambda``.

    Returns dense ``(W, Winv, lam)``.
    """
    m = dims.m
    W = np.zeros((m, m))
    Winv = np.zeros((m, m))
    l = dims.l
    if l:
        r = np.sqrt(s[:l] / z[:l])
        W[np.arange(l), np.arange(l)] = r
        Winv[np.arange(l), np.arange(l)] = 1.0 / r
    for idx in dims.groups:
        sb, zb = s[idx], z[idx]
        s0, _, ns = _split(sb)
        z0, _, nz = _split(zb)
        sn = np.sqrt(np.maximum((s0 - ns) * (s0 + ns), 1e-300))
        zn = np.sqrt(np.maximum((z0 - nz) * (z0 + nz), 1e-300))
        sb = sb / sn[:, None]
        zb = zb / zn[:, None]
        gamma = np.sqrt(np.maximum((1.0 + np.einsum("ij,ij->i", sb, zb)) / 2.0, 1e-300))
        jz = zb.copy()
        jz[:, 1:] = -jz[:, 1:]
        wb = (sb + jz) / (2.0 * gamma[:, None])
        beta = np.sqrt(sn / zn)
        w0, w1 = wb[:, 0], wb[:, 1:]
        k = idx.shape[1]
        blk = np.empty((idx.shape[0], k, k))
        blk[:, 0, 0] = w0
        blk[:, 0, 1:] = w1
        blk[:, 1:, 0] = w1
        blk[:, 1:, 1:] = np.eye(k - 1)[None] + w1[:, :, None] * w1[:, None, :] / (1.0 + w0)[:, None, None]
        inv = blk.copy()
        inv[:, 0, 1:] = -w1
        inv[:, 1:, 0] = -w1
        rows, cols = idx[:, :, None], idx[:, None, :]
        W[rows, cols] = beta[:, None, None] * blk
        Winv[rows, cols] = inv / beta[:, None, None]
    lam = W @ z
    return W, Winv, lam
