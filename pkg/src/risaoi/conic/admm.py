"""Operator-splitting (ADMM) solver on the homogeneous self-dual embedding.

Each iteration solves one linear system with the fixed matrix ``I + Q``
(factorized once) and projects onto the cone product. Convergence is linear
at best, so this path targets moderate accuracy.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from . import cones
from .problem import StandardForm

_RELAX = 1.5


def solve_admm(sf: StandardForm, tol_feas=1e-6, tol_gap=1e-6, max_iters=20000, x0=None, stall_window=500):
    q = sf.q
    M = np.vstack([sf.A, sf.G])
    bb = np.concatenate([sf.b, sf.h])
    dims = cones.ConeDims(sf.l, sf.qdims)
    n, m = q.size, M.shape[0]
    p = sf.A.shape[0]
    nb, nq = 1.0 + np.linalg.norm(bb), 1.0 + np.linalg.norm(q)

    N = n + m + 1
    Q = np.zeros((N, N))
    Q[:n, n : n + m] = M.T
    Q[:n, -1] = q
    Q[n : n + m, :n] = -M
    Q[n : n + m, -1] = bb
    Q[-1, :n] = -q
    Q[-1, n : n + m] = -bb
    lu = sla.lu_factor(np.eye(N) + Q, check_finite=False)

    u = np.zeros(N)
    v = np.zeros(N)
    u[-1] = v[-1] = 1.0
    if x0 is not None:
        x0 = np.asarray(x0, dtype=float)
        u[:n] = x0
        sl = bb - M @ x0
        v[n : n + m] = cones.project(dims, sl, zero=p)

    def proj_u(w):
        out = w.copy()
        # dual cone of {0}^p x K is R^p x K
        out[n + p : n + m] = cones.project(dims, w[n + p : n + m])
        out[-1] = max(w[-1], 0.0)
        return out

    status = "iteration-limit"
    best_cert = np.inf
    stall = 0
    info = {}
    it = 0
    for it in range(1, max_iters + 1):
        ut = sla.lu_solve(lu, u + v, check_finite=False)
        ur = _RELAX * ut + (1.0 - _RELAX) * u
        u_new = proj_u(ur - v)
        v = v - ur + u_new
        u = u_new

        tau, kappa = u[-1], v[-1]
        if it % 10 and it != max_iters:
            continue
        if tau > 1e-12:
            x = u[:n] / tau
            y = u[n : n + m] / tau
            s = v[n : n + m] / tau
            pres = np.linalg.norm(M @ x + s - bb) / nb
            dres = np.linalg.norm(M.T @ y + q) / nq
            pc, dc = q @ x, -bb @ y
            gap = abs(pc - dc) / (1.0 + abs(pc) + abs(dc))
            info = {"pres": pres, "dres": dres, "gap": gap, "iters": it}
            if pres <= tol_feas and dres <= tol_feas and gap <= tol_gap:
                status = "optimal"
                break
        y_raw, x_raw = u[n : n + m], u[:n]
        by = bb @ y_raw
        if by < 0:
            cert = np.linalg.norm(M.T @ y_raw) / -by
            if cert <= 1e-5 and tau < 1e-6 * max(1.0, kappa):
                status = "infeasible"
                break
        qx = q @ x_raw
        if qx < 0:
            cert = np.linalg.norm(M @ x_raw + v[n : n + m]) / -qx
            if cert <= 1e-5 and tau < 1e-6 * max(1.0, kappa):
                status = "unbounded"
                break
        cur = info.get("pres", np.inf) + info.get("dres", np.inf)
        if cur < 0.999 * best_cert:
            best_cert, stall = cur, 0
        else:
            stall += 10
            if stall >= stall_window and tau < 1e-3:
                status = "infeasible" if by < 0 else "unbounded"
                break

    tau = max(u[-1], 1e-300)
    info["iters"] = it
    return status, u[:n] / tau, v[n : n + m] / tau, u[n : n + m] / tau, info
