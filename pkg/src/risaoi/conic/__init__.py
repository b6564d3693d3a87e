"""Self-contained solver for real linear + second-order-cone programs."""

from __future__ import annotations

import time

import numpy as np

from .admm import solve_admm
from .cones import ConeDims
from .ipm import solve_hsde
from .problem import (
    ConicProblem,
    ConicSolution,
    ResidualReport,
    SocBlock,
    StandardForm,
    check_solution,
    eliminate_fixed,
    to_standard_form,
)
from .oracles import ball_oracle, ball_projection, lp_vertex_oracle
from .scaling import equilibrate

__all__ = [
    "ConicProblem",
    "ConicSolution",
    "ResidualReport",
    "SocBlock",
    "StandardForm",
    "ball_oracle",
    "ball_projection",
    "check_solution",
    "eliminate_fixed",
    "lp_vertex_oracle",
    "solve",
    "to_standard_form",
]


def solve(
    problem: ConicProblem,
    tol_feas: float = 1e-6,
    tol_gap: float = 1e-6,
    max_iters: int | None = None,
    method: str = "ipm",
    warm_start=None,
) -> ConicSolution:
    """Maximize ``problem``.

    ``method`` is ``"ipm"`` (interior point, default) or ``"admm"`` (operator
    splitting; ``warm_start`` seeds its primal iterate). An ``optimal`` status
    is only returned when the independently recomputed constraint violation of
    the unscaled point is within ``tol_feas``; otherwise the status degrades to
    ``iteration-limit``.
    """
    t0 = time.perf_counter()
    reduced, free, x = eliminate_fixed(problem)
    x = x.copy()
    if free.size == 0:
        status, info = "optimal", {"iters": 0}
    else:
        status, xr, info = _solve_reduced(reduced, tol_feas, tol_gap, max_iters, method, warm_start, free)
        x[free] = xr
    rep = check_solution(problem, x)
    if status == "optimal" and rep.max_violation > tol_feas:
        status = "infeasible" if free.size == 0 else "iteration-limit"
    return ConicSolution(
        status=status,
        x=x,
        objective=problem.value(x),
        primal_residual=rep.max_violation,
        dual_residual=float(info.get("dres", np.nan)),
        gap=float(info.get("gap", np.nan)),
        iterations=int(info.get("iters", 0)),
        solve_time=time.perf_counter() - t0,
        method=method,
    )


def _solve_reduced(problem, tol_feas, tol_gap, max_iters, method, warm_start, free):
    sf = to_standard_form(problem)
    dims = ConeDims(sf.l, sf.qdims)
    scaled, sc = equilibrate(sf, dims)
    if method == "ipm":
        inner_tol = min(tol_feas, tol_gap)
        status, xs, _s, _y, _z, _tau, _kappa, info = solve_hsde(
            scaled, tol_feas=inner_tol, tol_gap=inner_tol, max_iters=max_iters or 100
        )
    elif method == "admm":
        x0 = None if warm_start is None else np.asarray(warm_start, float)[free] / sc.col
        status, xs, _s, _y, info = solve_admm(
            scaled, tol_feas=tol_feas * 1e-1, tol_gap=tol_gap * 1e-1, max_iters=max_iters or 20000, x0=x0
        )
    else:
        raise ValueError(f"unknown method {method!r}")
    x = sc.col * xs
    if not np.all(np.isfinite(x)):
        x = np.zeros(problem.n)
        if status == "optimal":
            status = "iteration-limit"
    return status, x, info
