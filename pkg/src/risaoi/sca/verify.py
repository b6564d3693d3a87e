"""Executable checks that each surrogate is a valid SCA approximation.

Each check is phrased for a constraint ``F(x) <= 0`` (or a penalty term to
be minimized) with surrogate ``F~``. At the expansion point the value and
gradient must agree, and ``F <= F~`` must hold everywhere on the feasible
set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numerics import RngStream
from .problems import SlotProblem, beam_vars, eh_map_beam, eh_map_phase, pack_beam, snr_map_beam, snr_map_phase
from .surrogates import AffineMagnitude

VALUE_TOL = 1e-10
GRAD_TOL = 1e-5
FD_STEP = 1e-5
BOUND_TOL = 1e-9


@dataclass
class SurrogateReport:
    kind: str
    value_error: float  # |F - F~| at x0, relative to the row scale
    grad_error: float  # relative finite-difference mismatch
    max_violation: float  # max (F - F~)/scale over samples
    violations: int
    samples: int

    @property
    def value_ok(self) -> bool:
        return self.value_error <= VALUE_TOL

    @property
    def grad_ok(self) -> bool:
        return self.grad_error <= GRAD_TOL

    @property
    def bound_ok(self) -> bool:
        return self.violations == 0

    @property
    def passed(self) -> bool:
        return self.value_ok and self.grad_ok and self.bound_ok


def _central_grad(f, x0, h=FD_STEP):
    g = np.zeros_like(x0)
    for k in range(x0.size):
        e = np.zeros_like(x0)
        e[k] = h
        g[k] = (f(x0 + e) - f(x0 - e)) / (2 * h)
    return g


def _check(kind, F, Ft, x0, sampler, scale, n_samples):
    value_error = abs(F(x0) - Ft(x0)) / scale
    gF = _central_grad(F, x0)
    gT = _central_grad(Ft, x0)
    denom = max(np.linalg.norm(gF), np.linalg.norm(gT))
    diff = np.linalg.norm(gF - gT)
    # both gradients vanish (degenerate expansion point): compare on the row scale
    grad_error = diff / denom if denom > 1e-8 * scale / FD_STEP else diff * FD_STEP / scale
    worst, bad = -np.inf, 0
    for _ in range(n_samples):
        x = sampler()
        v = (F(x) - Ft(x)) / scale
        worst = max(worst, v)
        bad += int(v > BOUND_TOL)
    return SurrogateReport(kind, float(value_error), float(grad_error), float(worst), bad, n_samples)


def _magnitude_check(kind, mp: AffineMagnitude, rhs, x0, sampler, n_samples):
    coef, const = mp.minorant(x0)

    def F(x):
        return rhs - mp.value(x)

    def Ft(x):
        return rhs - float(coef @ x + const)

    scale = max(abs(rhs), abs(mp.value(x0)), 1e-300)
    return _check(kind, F, Ft, x0, sampler, scale, n_samples)


def verify_surrogate(
    kind: str,
    prob: SlotProblem,
    rho0,
    W0,
    V0,
    index: int = 0,
    block: str = "phase",
    penalty: float = 1.0,
    rng: RngStream | None = None,
    n_samples: int = 100,
) -> SurrogateReport:
    """Check value match, gradient match and the upper-bound property.

    ``kind`` is ``snr`` (row of IU ``index``), ``eh`` (row of EU ``index``)
    or ``penalty``. ``block`` selects the free variables: ``phase`` (rho in
    the unit polydisc) or ``beam`` (all beamformers in the power ball).
    Samples are drawn uniformly from the respective feasible set.
    """
    gen = (rng or RngStream(0)).generator()
    rho0 = np.asarray(rho0, dtype=complex)
    W0 = np.asarray(W0, dtype=complex).reshape(prob.u_i, prob.n_t)
    V0 = np.asarray(V0, dtype=complex).reshape(prob.u_e, prob.n_t)
    N = prob.n_s

    def polydisc():
        r = np.sqrt(gen.random(N))
        th = gen.uniform(0, 2 * np.pi, N)
        z = r * np.exp(1j * th)
        return np.concatenate([z.real, z.imag])

    if kind == "penalty":
        x0 = np.concatenate([rho0.real, rho0.imag])

        def F(x):
            return -penalty * float(np.sum(x**2) - N)

        def Ft(x):
            return -penalty * float(2 * x0 @ x - x0 @ x0 - N)

        return _check(kind, F, Ft, x0, polydisc, max(penalty * N, 1e-300), n_samples)

    if kind == "snr":
        rhs = prob.snr_scale(index)
    elif kind == "eh":
        rhs = prob.energy_threshold
    else:
        raise ValueError(f"unknown surrogate kind {kind!r}")

    if block == "phase":
        n = 2 * N
        x0 = np.concatenate([rho0.real, rho0.imag])
        if kind == "snr":
            mp = snr_map_phase(prob, index, W0[index], n, 0)
        else:
            mp = eh_map_phase(prob, index, V0[index], n, 0)
        sampler = polydisc
    elif block == "beam":
        n_all = beam_vars(prob)
        mp_full = snr_map_beam(prob, index, rho0, n_all) if kind == "snr" else eh_map_beam(prob, index, rho0, n_all)
        # drop the alpha columns; they do not enter |s|^2
        mp = AffineMagnitude(mp_full.L[:, prob.u_i :], mp_full.d)
        x0 = pack_beam(prob, np.zeros(prob.u_i), W0, V0)[prob.u_i :]
        n = x0.size
        radius = np.sqrt(prob.power_budget)

        def sampler():
            d = gen.standard_normal(n)
            return radius * gen.random() ** (1.0 / n) * d / np.linalg.norm(d)

    else:
        raise ValueError(f"unknown block {block!r}")
    return _magnitude_check(kind, mp, rhs, x0, sampler, n_samples)
