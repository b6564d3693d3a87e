"""Compiled homogeneous self-dual interior-point iteration.

A line-for-line port of :func:`risaoi.conic.ipm.solve_hsde_reference` to
numba. The Nesterov-Todd scaling is applied blockwise instead of as a dense
matrix and the factorizations are small hand-written Cholesky and LU
routines, so one iteration costs microseconds instead of the hundreds spent
dispatching small numpy calls. The reference implementation stays the
oracle the kernel is tested against.
"""

from __future__ import annotations

import numpy as np
from numba import njit

STATUS = ("optimal", "infeasible", "unbounded", "iteration-limit")
_OPTIMAL, _INFEASIBLE, _UNBOUNDED, _LIMIT = 0, 1, 2, 3
_STEP_FRACTION = 0.99
_NEAR_OPTIMAL = 100.0


@njit(cache=True)
def _mv(M, v):
    if M.shape[0] == 0 or M.shape[1] == 0:
        return np.zeros(M.shape[0])
    return np.dot(M, v)


@njit(cache=True)
def _mtv(M, v):
    if M.shape[0] == 0 or M.shape[1] == 0:
        return np.zeros(M.shape[1])
    return np.dot(M.T, v)


@njit(cache=True)
def _vdot(u, v):
    acc = 0.0
    for i in range(u.size):
        acc += u[i] * v[i]
    return acc


# ------------------------------------------------------------------ cones


@njit(cache=True)
def _identity(l, heads, m):
    e = np.zeros(m)
    e[:l] = 1.0
    for b in range(heads.size):
        e[heads[b]] = 1.0
    return e


@njit(cache=True)
def _prod(l, heads, sizes, u, v):
    out = np.empty(u.size)
    for i in range(l):
        out[i] = u[i] * v[i]
    for b in range(heads.size):
        h, k = heads[b], sizes[b]
        acc = u[h] * v[h]
        for j in range(h + 1, h + k):
            acc += u[j] * v[j]
            out[j] = u[h] * v[j] + v[h] * u[j]
        out[h] = acc
    return out


@njit(cache=True)
def _inv_prod(l, heads, sizes, u, v):
    out = np.empty(u.size)
    for i in range(l):
        out[i] = v[i] / u[i]
    for b in range(heads.size):
        h, k = heads[b], sizes[b]
        nu2 = 0.0
        dot = 0.0
        for j in range(h + 1, h + k):
            nu2 += u[j] * u[j]
            dot += u[j] * v[j]
        na = np.sqrt(nu2)
        a0 = u[h]
        x0 = (a0 * v[h] - dot) / ((a0 - na) * (a0 + na))
        out[h] = x0
        for j in range(h + 1, h + k):
            out[j] = (v[j] - x0 * u[j]) / a0
    return out


@njit(cache=True)
def _max_step(l, heads, sizes, x, dx):
    alpha = np.inf
    for i in range(l):
        if dx[i] < 0:
            alpha = min(alpha, -x[i] / dx[i])
    for b in range(heads.size):
        h, k = heads[b], sizes[b]
        nu2 = 0.0
        nd2 = 0.0
        dot = 0.0
        for j in range(h + 1, h + k):
            nu2 += x[j] * x[j]
            nd2 += dx[j] * dx[j]
            dot += x[j] * dx[j]
        u0, d0 = x[h], dx[h]
        nu, nd = np.sqrt(nu2), np.sqrt(nd2)
        if not d0 < nd:
            continue
        a = d0 * d0 - nd * nd
        bb = u0 * d0 - dot
        c = max((u0 - nu) * (u0 + nu), 0.0)
        den = -bb + np.sqrt(max(bb * bb - a * c, 0.0))
        cand = c / den if den > 0 else np.inf
        if d0 < 0:
            cand = min(cand, -u0 / d0)
        alpha = min(alpha, cand)
    return alpha


@njit(cache=True)
def _interior_shift(l, heads, sizes, x):
    best = -np.inf
    for i in range(l):
        best = max(best, -x[i])
    for b in range(heads.size):
        h, k = heads[b], sizes[b]
        nu2 = 0.0
        for j in range(h + 1, h + k):
            nu2 += x[j] * x[j]
        best = max(best, np.sqrt(nu2) - x[h])
    if best == -np.inf:
        return -1.0
    return best


@njit(cache=True)
def _nt_scaling(l, heads, sizes, s, z):
    """Return ``(d, w, beta)``: orthant diagonal, SOC scaling points, block factors."""
    d = np.empty(l)
    for i in range(l):
        d[i] = np.sqrt(s[i] / z[i])
    w = np.zeros(s.size)
    beta = np.empty(heads.size)
    for b in range(heads.size):
        h, k = heads[b], sizes[b]
        ns2 = 0.0
        nz2 = 0.0
        for j in range(h + 1, h + k):
            ns2 += s[j] * s[j]
            nz2 += z[j] * z[j]
        ns, nz = np.sqrt(ns2), np.sqrt(nz2)
        sn = np.sqrt(max((s[h] - ns) * (s[h] + ns), 1e-300))
        zn = np.sqrt(max((z[h] - nz) * (z[h] + nz), 1e-300))
        dot = (s[h] / sn) * (z[h] / zn)
        for j in range(h + 1, h + k):
            dot += (s[j] / sn) * (z[j] / zn)
        gamma = np.sqrt(max((1.0 + dot) / 2.0, 1e-300))
        w[h] = (s[h] / sn + z[h] / zn) / (2.0 * gamma)
        for j in range(h + 1, h + k):
            w[j] = (s[j] / sn - z[j] / zn) / (2.0 * gamma)
        beta[b] = np.sqrt(sn / zn)
    return d, w, beta


@njit(cache=True)
def _apply(l, heads, sizes, d, w, beta, v, inverse):
    """``W v`` or ``W^{-1} v`` for the blockwise scaling."""
    out = np.empty(v.size)
    for i in range(l):
        out[i] = v[i] / d[i] if inverse else v[i] * d[i]
    for b in range(heads.size):
        h, k = heads[b], sizes[b]
        w0 = w[h]
        t = 0.0
        for j in range(h + 1, h + k):
            t += w[j] * v[j]
        sign = -1.0 if inverse else 1.0
        f = 1.0 / beta[b] if inverse else beta[b]
        out[h] = f * (w0 * v[h] + sign * t)
        c = t / (1.0 + w0)
        for j in range(h + 1, h + k):
            out[j] = f * (sign * v[h] * w[j] + v[j] + c * w[j])
    return out


# ------------------------------------------------------- factorizations


@njit(cache=True)
def _cholesky(N):
    n = N.shape[0]
    L = np.zeros((n, n))
    for j in range(n):
        acc = N[j, j]
        for k in range(j):
            acc -= L[j, k] * L[j, k]
        if not acc > 0.0:
            return L, False
        L[j, j] = np.sqrt(acc)
        for i in range(j + 1, n):
            acc = N[i, j]
            for k in range(j):
                acc -= L[i, k] * L[j, k]
            L[i, j] = acc / L[j, j]
    return L, True


@njit(cache=True)
def _chol_solve(L, r):
    n = r.size
    y = r.copy()
    for i in range(n):
        acc = y[i]
        for k in range(i):
            acc -= L[i, k] * y[k]
        y[i] = acc / L[i, i]
    for i in range(n - 1, -1, -1):
        acc = y[i]
        for k in range(i + 1, n):
            acc -= L[k, i] * y[k]
        y[i] = acc / L[i, i]
    return y


@njit(cache=True)
def _lu(K):
    n = K.shape[0]
    LU = K.copy()
    piv = np.arange(n)
    for j in range(n):
        p = j
        big = abs(LU[j, j])
        for i in range(j + 1, n):
            if abs(LU[i, j]) > big:
                big = abs(LU[i, j])
                p = i
        if big == 0.0 or not np.isfinite(big):
            return LU, piv, False
        if p != j:
            for c in range(n):
                tmp = LU[j, c]
                LU[j, c] = LU[p, c]
                LU[p, c] = tmp
            tmp2 = piv[j]
            piv[j] = piv[p]
            piv[p] = tmp2
        for i in range(j + 1, n):
            LU[i, j] /= LU[j, j]
            f = LU[i, j]
            if f != 0.0:
                for c in range(j + 1, n):
                    LU[i, c] -= f * LU[j, c]
    return LU, piv, True


@njit(cache=True)
def _lu_solve(LU, piv, r):
    n = r.size
    y = np.empty(n)
    for i in range(n):
        y[i] = r[piv[i]]
    for i in range(n):
        acc = y[i]
        for k in range(i):
            acc -= LU[i, k] * y[k]
        y[i] = acc
    for i in range(n - 1, -1, -1):
        acc = y[i]
        for k in range(i + 1, n):
            acc -= LU[i, k] * y[k]
        y[i] = acc / LU[i, i]
    return y


@njit(cache=True)
def _kkt(A, G, H, reg):
    n, p, m = G.shape[1], A.shape[0], G.shape[0]
    N = n + p + m
    K = np.zeros((N, N))
    for i in range(p):
        for j in range(n):
            K[j, n + i] = A[i, j]
            K[n + i, j] = A[i, j]
    for i in range(m):
        for j in range(n):
            K[j, n + p + i] = G[i, j]
            K[n + p + i, j] = G[i, j]
        for j in range(m):
            K[n + p + i, n + p + j] = -H[i, j]
    Kreg = K.copy()
    for i in range(N):
        Kreg[i, i] += reg if i < n else -reg
    LU, piv, ok = _lu(Kreg)
    return K, LU, piv, ok


@njit(cache=True)
def _kkt_solve(K, LU, piv, rhs, refine):
    x = _lu_solve(LU, piv, rhs)
    for _ in range(refine):
        x = x + _lu_solve(LU, piv, rhs - np.dot(K, x))
    return x


# ------------------------------------------------------------ Newton system


@njit(cache=True)
def _reduced_solve(l, heads, sizes, d, w, beta, A, G, Gs, L, use_chol, K, LU, piv, rx, ry, rz):
    n, p = G.shape[1], A.shape[0]
    if not use_chol:
        rhs = np.concatenate((rx, ry, rz))
        return _kkt_solve(K, LU, piv, rhs, 2)
    wz = _apply(l, heads, sizes, d, w, beta, rz, True)
    dx = _chol_solve(L, rx + _mtv(Gs, wz))
    dz = _apply(l, heads, sizes, d, w, beta, _mv(Gs, dx) - wz, True)
    # one refinement step against the unreduced system
    e1 = rx - _mtv(G, dz)
    Wdz = _apply(l, heads, sizes, d, w, beta, dz, False)
    e2 = rz - (_mv(G, dx) - _apply(l, heads, sizes, d, w, beta, Wdz, False))
    wz = _apply(l, heads, sizes, d, w, beta, e2, True)
    cx = _chol_solve(L, e1 + _mtv(Gs, wz))
    cz = _apply(l, heads, sizes, d, w, beta, _mv(Gs, cx) - wz, True)
    out = np.empty(n + p + dz.size)
    out[:n] = dx + cx
    out[n:] = dz + cz
    return out


@njit(cache=True)
def hsde(q, A, b, G, h, l, sizes, tol_feas, tol_gap, max_iters):
    """Returns ``(status, x, s, y, z, tau, kappa, info)`` with ``info`` =
    ``[pres, dres, gap, pcost, dcost, iters]``."""
    n, p, m = q.size, A.shape[0], G.shape[0]
    heads = np.empty(sizes.size, np.int64)
    off = l
    for b_ in range(sizes.size):
        heads[b_] = off
        off += sizes[b_]
    e = _identity(l, heads, m)
    degree = l + sizes.size
    nb = max(1.0, np.linalg.norm(b)) if p else 1.0
    nh = max(1.0, np.linalg.norm(h)) if m else 1.0
    nq = max(1.0, np.linalg.norm(q)) if n else 1.0
    info = np.zeros(6)

    K0, LU0, piv0, ok0 = _kkt(A, G, np.eye(m), 1e-13)
    if not ok0:
        info[5] = 0
        return _LIMIT, np.zeros(n), np.ones(m), np.zeros(p), np.ones(m), 1.0, 1.0, info
    rhs = np.zeros(n + p + m)
    rhs[n : n + p] = b
    rhs[n + p :] = h
    u = _kkt_solve(K0, LU0, piv0, rhs, 2)
    x = u[:n].copy()
    s = -u[n + p :]
    rhs = np.zeros(n + p + m)
    rhs[:n] = -q
    u = _kkt_solve(K0, LU0, piv0, rhs, 2)
    y = u[n : n + p].copy()
    z = u[n + p :].copy()
    ap = _interior_shift(l, heads, sizes, s)
    if ap >= -1e-8 * max(1.0, np.linalg.norm(s)):
        s = s + (1.0 + max(ap, 0.0)) * e
    az = _interior_shift(l, heads, sizes, z)
    if az >= -1e-8 * max(1.0, np.linalg.norm(z)):
        z = z + (1.0 + max(az, 0.0)) * e
    tau = 1.0
    kappa = 1.0

    status = _LIMIT
    it = 0
    best_merit = np.inf
    bx, bs, by, bz = x.copy(), s.copy(), y.copy(), z.copy()
    btau, bkappa = tau, kappa
    binfo = info.copy()
    have_best = False
    for it in range(1, max_iters + 1):
        rx = _mtv(A, y) + _mtv(G, z) + q * tau
        ry = -_mv(A, x) + b * tau
        rz = s + _mv(G, x) - h * tau
        rt = kappa + _vdot(q, x) + _vdot(b, y) + _vdot(h, z)
        gap = _vdot(s, z)
        mu = (gap + tau * kappa) / (degree + 1)
        pcost = _vdot(q, x) / tau
        dcost = -(_vdot(b, y) + _vdot(h, z)) / tau
        pres = max(np.linalg.norm(ry) / nb if p else 0.0, np.linalg.norm(rz) / nh if m else 0.0) / tau
        dres = (np.linalg.norm(rx) / nq if n else 0.0) / tau
        info[0] = pres
        info[1] = dres
        info[2] = gap / tau**2
        info[3] = pcost
        info[4] = dcost
        info[5] = it - 1
        relgap = gap / tau**2 / max(1.0, min(abs(pcost), abs(dcost)))
        if pres <= tol_feas and dres <= tol_feas and (gap / tau**2 <= tol_gap or relgap <= tol_gap):
            status = _OPTIMAL
            break
        merit = max(pres / tol_feas, dres / tol_feas, min(gap / tau**2, relgap) / tol_gap)
        if merit < best_merit:
            best_merit = merit
            bx, bs, by, bz = x / tau, s.copy(), y.copy(), z.copy()
            btau, bkappa = tau, kappa
            binfo = info.copy()
            have_best = True
        elif merit > 1e3 * best_merit and best_merit < 1e3:
            break
        by_hz = _vdot(b, y) + _vdot(h, z)
        if by_hz < 0:
            cert = np.linalg.norm(_mtv(A, y) + _mtv(G, z)) / nq / -by_hz
            if cert <= tol_feas and tau < 1e-3 * kappa:
                status = _INFEASIBLE
                break
        qx = _vdot(q, x)
        if qx < 0:
            c1 = np.linalg.norm(_mv(A, x)) / nb if p else 0.0
            c2 = np.linalg.norm(_mv(G, x) + s) / nh if m else 0.0
            cert = max(c1, c2) / -qx
            if cert <= tol_feas and tau < 1e-3 * kappa:
                status = _UNBOUNDED
                break

        d, w, beta = _nt_scaling(l, heads, sizes, s, z)
        lam = _apply(l, heads, sizes, d, w, beta, z, False)
        # Newton system: normal equations when there are no equality rows
        use_chol = False
        Gs = np.zeros((m, n))
        L = np.zeros((n, n))
        if p == 0:
            for j in range(n):
                Gs[:, j] = _apply(l, heads, sizes, d, w, beta, np.ascontiguousarray(G[:, j]), True)
            N = np.dot(Gs.T, Gs) if m else np.zeros((n, n))
            dmax = 1.0
            for i in range(n):
                dmax = max(dmax, N[i, i])
            for i in range(n):
                N[i, i] += 1e-14 * dmax
            L, use_chol = _cholesky(N)
        K = np.zeros((1, 1))
        LU = np.zeros((1, 1))
        piv = np.zeros(1, np.int64)
        if not use_chol:
            H = np.empty((m, m))
            for j in range(m):
                col = np.zeros(m)
                col[j] = 1.0
                H[:, j] = _apply(l, heads, sizes, d, w, beta, _apply(l, heads, sizes, d, w, beta, col, False), False)
            K, LU, piv, okk = _kkt(A, G, H, 1e-13)
            if not okk:
                break
        u2 = _reduced_solve(l, heads, sizes, d, w, beta, A, G, Gs, L, use_chol, K, LU, piv, -q, b, h)
        den = _vdot(q, u2[:n]) + _vdot(b, u2[n : n + p]) + _vdot(h, u2[n + p :]) - kappa / tau

        # predictor
        ll = _prod(l, heads, sizes, lam, lam)
        t = _inv_prod(l, heads, sizes, lam, -ll)
        u1 = _reduced_solve(l, heads, sizes, d, w, beta, A, G, Gs, L, use_chol, K, LU, piv,
                            -rx, ry, -rz - _apply(l, heads, sizes, d, w, beta, t, False))
        dk_in = -tau * kappa
        dtau = (-rt - dk_in / tau - (_vdot(q, u1[:n]) + _vdot(b, u1[n : n + p]) + _vdot(h, u1[n + p :]))) / den
        dvec = u1 + dtau * u2
        aZ = dvec[n + p :]
        aS = _apply(l, heads, sizes, d, w, beta, t - _apply(l, heads, sizes, d, w, beta, aZ, False), False)
        aK = (dk_in - kappa * dtau) / tau
        a_aff = min(_max_step(l, heads, sizes, s, aS), _max_step(l, heads, sizes, z, aZ))
        if dtau < 0:
            a_aff = min(a_aff, -tau / dtau)
        if aK < 0:
            a_aff = min(a_aff, -kappa / aK)
        a_aff = min(1.0, a_aff)
        sigma = (1.0 - a_aff) ** 3
        corr = _prod(l, heads, sizes, _apply(l, heads, sizes, d, w, beta, aS, True), _apply(l, heads, sizes, d, w, beta, aZ, False))
        eta = 1.0 - sigma

        # corrector
        ds = -ll - corr + sigma * mu * e
        dk = -tau * kappa - dtau * aK + sigma * mu
        t = _inv_prod(l, heads, sizes, lam, ds)
        u1 = _reduced_solve(l, heads, sizes, d, w, beta, A, G, Gs, L, use_chol, K, LU, piv,
                            -eta * rx, eta * ry, -eta * rz - _apply(l, heads, sizes, d, w, beta, t, False))
        dT = (-eta * rt - dk / tau - (_vdot(q, u1[:n]) + _vdot(b, u1[n : n + p]) + _vdot(h, u1[n + p :]))) / den
        dvec = u1 + dT * u2
        dX = dvec[:n]
        dY = dvec[n : n + p]
        dZ = dvec[n + p :]
        dS = _apply(l, heads, sizes, d, w, beta, t - _apply(l, heads, sizes, d, w, beta, dZ, False), False)
        dK = (dk - kappa * dT) / tau
        a = min(_max_step(l, heads, sizes, s, dS), _max_step(l, heads, sizes, z, dZ))
        if dT < 0:
            a = min(a, -tau / dT)
        if dK < 0:
            a = min(a, -kappa / dK)
        a = min(1.0, _STEP_FRACTION * a)
        x = x + a * dX
        y = y + a * dY
        z = z + a * dZ
        s = s + a * dS
        tau = tau + a * dT
        kappa = kappa + a * dK
        finite = True
        for v in x:
            if not np.isfinite(v):
                finite = False
                break
        if not finite or tau <= 0:
            break

    info[5] = it
    if status == _LIMIT and have_best and best_merit <= _NEAR_OPTIMAL:
        binfo[5] = it
        return _OPTIMAL, bx, bs, by, bz, btau, bkappa, binfo
    if status != _INFEASIBLE:
        x = x / tau
    return status, x, s, y, z, tau, kappa, info
