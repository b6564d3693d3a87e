"""Primal-dual interior-point method on the homogeneous self-dual embedding.

Nesterov-Todd scaling with a Mehrotra predictor-corrector step. The embedding
yields infeasibility certificates without a phase-one problem. The reduced
KKT system is dense; problems here have at most a few hundred rows.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from . import cones
from .problem import StandardForm

_STEP_FRACTION = 0.99
# accept the best iterate when it is within this factor of the requested tolerances
_NEAR_OPTIMAL = 100.0


def _kkt(A, G, H, reg=1e-13):
    n, p, m = G.shape[1], A.shape[0], G.shape[0]
    K = np.zeros((n + p + m, n + p + m))
    K[:n, n : n + p] = A.T
    K[:n, n + p :] = G.T
    K[n : n + p, :n] = A
    K[n + p :, :n] = G
    K[n + p :, n + p :] = -H
    Kreg = K.copy()
    idx = np.arange(n + p + m)
    Kreg[idx[:n], idx[:n]] += reg
    Kreg[idx[n:], idx[n:]] -= reg
    return K, sla.lu_factor(Kreg, check_finite=False)


def _solve(K, lu, rhs, refine=2):
    x = sla.lu_solve(lu, rhs, check_finite=False)
    for _ in range(refine):
        x = x + sla.lu_solve(lu, rhs - K @ x, check_finite=False)
    return x


class _ReducedKkt:
    """Solve ``[[0, A^T, G^T], [A, 0, 0], [G, 0, -W^2]] u = r``.

    Without equality rows the system collapses to the normal equations
    ``(W^{-1}G)^T (W^{-1}G) dx = ...`` and a Cholesky factor; otherwise (or if
    Cholesky fails) the full symmetric system is LU-factorized.
    """

    def __init__(self, A, G, W, Winv):
        self.A, self.G, self.W, self.Winv = A, G, W, Winv
        self.n, self.p = G.shape[1], A.shape[0]
        self.chol = None
        if self.p == 0:
            self.Gs = Winv @ G
            N = self.Gs.T @ self.Gs
            N[np.diag_indices_from(N)] += 1e-14 * max(1.0, float(np.max(np.diag(N))))
            try:
                self.chol = sla.cho_factor(N, check_finite=False)
            except np.linalg.LinAlgError:
                self.chol = None
        if self.chol is None:
            self.K, self.lu = _kkt(A, G, W @ W)

    def _normal(self, rx, rz):
        wz = self.Winv @ rz
        dx = sla.cho_solve(self.chol, rx + self.Gs.T @ wz, check_finite=False)
        dz = self.Winv @ (self.Gs @ dx - wz)
        return dx, dz

    def solve(self, rx, ry, rz, refine=1):
        if self.chol is None:
            return _solve(self.K, self.lu, np.concatenate([rx, ry, rz]))
        dx, dz = self._normal(rx, rz)
        # refine against the unreduced system; the normal equations square its condition number
        for _ in range(refine):
            e1 = rx - self.G.T @ dz
            e2 = rz - (self.G @ dx - self.W @ (self.W @ dz))
            cx, cz = self._normal(e1, e2)
            dx, dz = dx + cx, dz + cz
        return np.concatenate([dx, dz])


def solve_hsde(sf: StandardForm, tol_feas=1e-8, tol_gap=1e-8, max_iters=100):
    """Compiled :func:`solve_hsde_reference`; same arguments and return value."""
    from . import kernel

    c = np.ascontiguousarray
    sizes = np.asarray(sf.qdims, dtype=np.int64)
    code, x, s, y, z, tau, kappa, arr = kernel.hsde(
        c(sf.q, float), c(sf.A, float), c(sf.b, float), c(sf.G, float), c(sf.h, float),
        int(sf.l), sizes, float(tol_feas), float(tol_gap), int(max_iters),
    )
    keys = ("pres", "dres", "gap", "pcost", "dcost")
    info = {k: float(v) for k, v in zip(keys, arr[:5])}
    info["iters"] = int(arr[5])
    return kernel.STATUS[code], x, s, y, z, tau, kappa, info


def solve_hsde_reference(sf: StandardForm, tol_feas=1e-8, tol_gap=1e-8, max_iters=100):
    """Solve ``min q^T x  s.t.  A x = b, G x + s = h, s in K``.

    Returns ``(status, x, s, y, z, tau, kappa, info)``; ``x`` is divided by
    ``tau`` unless a primal infeasibility certificate was found. ``info``
    holds residuals and the iteration count.
    """
    q, A, b, G, h = sf.q, sf.A, sf.b, sf.G, sf.h
    dims = cones.ConeDims(sf.l, sf.qdims)
    n, p, m = q.size, A.shape[0], G.shape[0]
    e = dims.identity()
    nb, nh, nq = max(1.0, np.linalg.norm(b)), max(1.0, np.linalg.norm(h)), max(1.0, np.linalg.norm(q))

    K0, lu0 = _kkt(A, G, np.eye(m))
    u = _solve(K0, lu0, np.concatenate([np.zeros(n), b, h]))
    x = u[:n]
    s = -u[n + p :]
    u = _solve(K0, lu0, np.concatenate([-q, np.zeros(p), np.zeros(m)]))
    y = u[n : n + p]
    z = u[n + p :]
    ap = cones.interior_shift(dims, s)
    if ap >= -1e-8 * max(1.0, np.linalg.norm(s)):
        s = s + (1.0 + max(ap, 0.0)) * e
    az = cones.interior_shift(dims, z)
    if az >= -1e-8 * max(1.0, np.linalg.norm(z)):
        z = z + (1.0 + max(az, 0.0)) * e
    tau = kappa = 1.0

    status = "iteration-limit"
    info = {}
    it = 0
    best = (np.inf, None)
    for it in range(1, max_iters + 1):
        rx = A.T @ y + G.T @ z + q * tau
        ry = -A @ x + b * tau
        rz = s + G @ x - h * tau
        rt = kappa + q @ x + b @ y + h @ z
        gap = float(s @ z)
        mu = (gap + tau * kappa) / (dims.degree + 1)
        pcost = q @ x / tau
        dcost = -(b @ y + h @ z) / tau
        pres = max(np.linalg.norm(ry) / nb, np.linalg.norm(rz) / nh) / tau
        dres = np.linalg.norm(rx) / nq / tau
        info = {"pres": pres, "dres": dres, "gap": gap / tau**2, "pcost": pcost, "dcost": dcost, "iters": it - 1}
        relgap = gap / tau**2 / max(1.0, min(abs(pcost), abs(dcost)))
        if pres <= tol_feas and dres <= tol_feas and (gap / tau**2 <= tol_gap or relgap <= tol_gap):
            status = "optimal"
            break
        merit = max(pres / tol_feas, dres / tol_feas, min(gap / tau**2, relgap) / tol_gap)
        if merit < best[0]:
            best = (merit, (x / tau, s, y, z, tau, kappa, dict(info)))
        elif merit > 1e3 * best[0] and best[0] < 1e3:
            # rounding errors now dominate; the best iterate is the answer
            break
        by_hz = b @ y + h @ z
        if by_hz < 0:
            cert = np.linalg.norm(A.T @ y + G.T @ z) / nq / -by_hz
            if cert <= tol_feas and tau < 1e-3 * kappa:
                status = "infeasible"
                break
        qx = q @ x
        if qx < 0:
            cert = max(np.linalg.norm(A @ x) / nb, np.linalg.norm(G @ x + s) / nh) / -qx
            if cert <= tol_feas and tau < 1e-3 * kappa:
                status = "unbounded"
                break

        try:
            W, Winv, lam = cones.nt_scaling(dims, s, z)
            solver = _ReducedKkt(A, G, W, Winv)
        except (np.linalg.LinAlgError, ValueError, FloatingPointError):
            break
        u2 = solver.solve(-q, b, h)
        den = q @ u2[:n] + b @ u2[n : n + p] + h @ u2[n + p :] - kappa / tau

        def newton(dx, dy, dz, dt, ds, dk):
            t = cones.inv_prod(dims, lam, ds)
            u1 = solver.solve(dx, -dy, dz - W @ t)
            dtau = (dt - dk / tau - (q @ u1[:n] + b @ u1[n : n + p] + h @ u1[n + p :])) / den
            d = u1 + dtau * u2
            dX, dY, dZ = d[:n], d[n : n + p], d[n + p :]
            dS = W @ (t - W @ dZ)
            dK = (dk - kappa * dtau) / tau
            return dX, dY, dZ, dtau, dS, dK

        def step_len(dZ, dtau, dS, dK):
            a = min(cones.max_step(dims, s, dS), cones.max_step(dims, z, dZ))
            if dtau < 0:
                a = min(a, -tau / dtau)
            if dK < 0:
                a = min(a, -kappa / dK)
            return a

        ll = cones.prod(dims, lam, lam)
        aff = newton(-rx, -ry, -rz, -rt, -ll, -tau * kappa)
        a_aff = min(1.0, step_len(aff[2], aff[3], aff[4], aff[5]))
        sigma = (1.0 - a_aff) ** 3
        corr = cones.prod(dims, Winv @ aff[4], W @ aff[2])
        eta = 1.0 - sigma
        dX, dY, dZ, dtau, dS, dK = newton(
            -eta * rx,
            -eta * ry,
            -eta * rz,
            -eta * rt,
            -ll - corr + sigma * mu * e,
            -tau * kappa - aff[3] * aff[5] + sigma * mu,
        )
        a = min(1.0, _STEP_FRACTION * step_len(dZ, dtau, dS, dK))
        x = x + a * dX
        y = y + a * dY
        z = z + a * dZ
        s = s + a * dS
        tau = tau + a * dtau
        kappa = kappa + a * dK
        if not np.all(np.isfinite(x)) or tau <= 0:
            break

    info["iters"] = it
    if status == "iteration-limit" and best[1] is not None and best[0] <= _NEAR_OPTIMAL:
        bx, bs, by, bz, btau, bkappa, binfo = best[1]
        binfo["iters"] = it
        return "optimal", bx, bs, by, bz, btau, bkappa, binfo
    return status, x / tau if status != "infeasible" else x, s, y, z, tau, kappa, info
