"""Problem and solution containers for real LP + second-order-cone programs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class SocBlock:
    """Second-order cone constraint ``||A x + b|| <= c^T x + d``."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: float
    name: str = ""

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = np.asarray(self.b, dtype=float).ravel()
        self.c = np.asarray(self.c, dtype=float).ravel()
        self.d = float(self.d)
        if self.A.shape[0] != self.b.size:
            raise ValueError(f"SOC block {self.name!r}: A has {self.A.shape[0]} rows, b has {self.b.size}")


@dataclass
class ConicProblem:
    """maximize ``objective @ x + offset`` subject to

    * ``row_lo <= rows @ x <= row_hi`` (equality when the bounds coincide),
    * ``lb <= x <= ub``,
    * every :class:`SocBlock`.

    Infinite bounds are allowed and simply dropped.
    """

    objective: np.ndarray
    rows: np.ndarray | None = None
    row_lo: np.ndarray | None = None
    row_hi: np.ndarray | None = None
    lb: np.ndarray | None = None
    ub: np.ndarray | None = None
    soc: list[SocBlock] = field(default_factory=list)
    names: list[str] | None = None
    row_names: list[str] | None = None
    offset: float = 0.0

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).ravel()
        n = self.objective.size
        if self.rows is None:
            self.rows = np.zeros((0, n))
        rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        self.rows = rows.reshape(-1, n) if n else rows.reshape(rows.shape[0] if rows.ndim == 2 and rows.shape[1] == 0 else 0, 0)
        m = self.rows.shape[0]
        self.row_lo = np.full(m, -np.inf) if self.row_lo is None else np.asarray(self.row_lo, float).ravel()
        self.row_hi = np.full(m, np.inf) if self.row_hi is None else np.asarray(self.row_hi, float).ravel()
        self.lb = np.full(n, -np.inf) if self.lb is None else np.asarray(self.lb, float).ravel()
        self.ub = np.full(n, np.inf) if self.ub is None else np.asarray(self.ub, float).ravel()
        if self.row_lo.size != m or self.row_hi.size != m:
            raise ValueError("row bounds do not match the number of rows")
        if self.lb.size != n or self.ub.size != n:
            raise ValueError("variable bounds do not match the number of variables")
        for blk in self.soc:
            if blk.A.shape[1] != n or blk.c.size != n:
                raise ValueError(f"SOC block {blk.name!r} has wrong column count")
        if self.names is not None and len(self.names) != n:
            raise ValueError("names do not match the number of variables")
        if self.row_names is None:
            self.row_names = [f"row{k}" for k in range(m)]

    @property
    def n(self) -> int:
        return self.objective.size

    def value(self, x) -> float:
        return float(self.objective @ np.asarray(x, dtype=float) + self.offset)

    def var_name(self, k: int) -> str:
        return self.names[k] if self.names else f"x{k}"

    def dump(self) -> str:
        """Human-readable listing, one constraint per line."""

        def lin(coef):
            terms = [f"{coef[k]:+.6g}*{self.var_name(k)}" for k in np.flatnonzero(coef)]
            return " ".join(terms) if terms else "0"

        out = [f"maximize {lin(self.objective)} {self.offset:+.6g}"]
        for k in range(self.rows.shape[0]):
            out.append(f"{self.row_names[k]}: {self.row_lo[k]:.6g} <= {lin(self.rows[k])} <= {self.row_hi[k]:.6g}")
        for k in range(self.n):
            if np.isfinite(self.lb[k]) or np.isfinite(self.ub[k]):
                out.append(f"bound: {self.lb[k]:.6g} <= {self.var_name(k)} <= {self.ub[k]:.6g}")
        for j, blk in enumerate(self.soc):
            args = "; ".join(f"{lin(blk.A[r])} {blk.b[r]:+.6g}" for r in range(blk.A.shape[0]))
            out.append(f"{blk.name or f'soc{j}'}: || {args} || <= {lin(blk.c)} {blk.d:+.6g}")
        return "\n".join(out)


@dataclass
class ConicSolution:
    status: str  # optimal | infeasible | unbounded | iteration-limit
    x: np.ndarray
    objective: float
    primal_residual: float
    dual_residual: float
    gap: float
    iterations: int
    solve_time: float = 0.0
    method: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


@dataclass
class StandardForm:
    """``min q^T x  s.t.  A x = b,  G x + s = h,  s in R+^l x Q^{q_1} x ...``"""

    q: np.ndarray
    A: np.ndarray
    b: np.ndarray
    G: np.ndarray
    h: np.ndarray
    l: int
    qdims: list[int]


def _compress_constant_rows(A, b):
    """Merge the rows of an SOC block that do not depend on x into one.

    Only their joint norm matters; identically zero rows are dropped so that
    the solver never sees cone coordinates pinned at zero.
    """
    const = ~np.any(A != 0, axis=1)
    if not const.any():
        return A, b
    r = float(np.linalg.norm(b[const]))
    A_out, b_out = A[~const], b[~const]
    if r > 0:
        A_out = np.vstack([A_out, np.zeros((1, A.shape[1]))])
        b_out = np.append(b_out, r)
    if A_out.shape[0] == 0:
        return np.zeros((1, A.shape[1])), np.zeros(1)
    return A_out, b_out


def to_standard_form(p: ConicProblem) -> StandardForm:
    n = p.n
    eq = np.isfinite(p.row_lo) & np.isfinite(p.row_hi) & (p.row_lo == p.row_hi)
    A = p.rows[eq]
    b = p.row_lo[eq]
    g_rows, h_vals = [], []
    ineq = ~eq
    up = ineq & np.isfinite(p.row_hi)
    lo = ineq & np.isfinite(p.row_lo)
    g_rows.append(p.rows[up])
    h_vals.append(p.row_hi[up])
    g_rows.append(-p.rows[lo])
    h_vals.append(-p.row_lo[lo])
    eye = np.eye(n)
    fub = np.isfinite(p.ub)
    flb = np.isfinite(p.lb)
    g_rows.append(eye[fub])
    h_vals.append(p.ub[fub])
    g_rows.append(-eye[flb])
    h_vals.append(-p.lb[flb])
    l = sum(len(h) for h in h_vals)
    qdims = []
    for blk in p.soc:
        A_blk, b_blk = _compress_constant_rows(blk.A, blk.b)
        # s = [c^T x + d; A x + b]  ->  G = -[c^T; A],  h = [d; b]
        g_rows.append(-np.vstack([blk.c[np.newaxis, :], A_blk]))
        h_vals.append(np.concatenate([[blk.d], b_blk]))
        qdims.append(A_blk.shape[0] + 1)
    G = np.vstack(g_rows) if g_rows else np.zeros((0, n))
    h = np.concatenate(h_vals) if h_vals else np.zeros(0)
    return StandardForm(q=-p.objective.copy(), A=A, b=b, G=G, h=h, l=l, qdims=qdims)


def eliminate_fixed(p: ConicProblem):
    """Substitute out variables with ``lb == ub``.

    Returns ``(reduced, free, x_fixed)`` where ``free`` indexes the remaining
    variables and ``x_fixed`` holds the full vector with fixed entries set.
    A pinned variable would otherwise become two opposing inequalities with
    no strict interior.
    """
    fixed = np.isfinite(p.lb) & (p.lb == p.ub)
    free = np.flatnonzero(~fixed)
    x_fixed = np.where(fixed, p.lb, 0.0)
    if not fixed.any():
        return p, free, x_fixed
    shift = p.rows @ x_fixed
    soc = [
        SocBlock(A=blk.A[:, free], b=blk.b + blk.A @ x_fixed, c=blk.c[free], d=blk.d + blk.c @ x_fixed, name=blk.name)
        for blk in p.soc
    ]
    reduced = ConicProblem(
        objective=p.objective[free],
        rows=p.rows[:, free],
        row_lo=p.row_lo - shift,
        row_hi=p.row_hi - shift,
        lb=p.lb[free],
        ub=p.ub[free],
        soc=soc,
        names=None if p.names is None else [p.names[k] for k in free],
        row_names=list(p.row_names),
        offset=p.offset + float(p.objective @ x_fixed),
    )
    return reduced, free, x_fixed


@dataclass
class ResidualReport:
    max_violation: float
    violations: dict[str, float]

    def violated(self, tol: float = 1e-6) -> list[str]:
        return [k for k, v in self.violations.items() if v > tol]


def check_solution(problem: ConicProblem, x) -> ResidualReport:
    """Recompute every constraint violation of ``x`` directly from ``problem``.

    Violations are absolute and use only the user-facing problem data, never
    the solver's internal standard form or scaling.
    """
    if hasattr(x, "x"):
        x = x.x
    x = np.asarray(x, dtype=float).ravel()
    if x.size != problem.n:
        raise ValueError(f"solution has {x.size} entries, problem has {problem.n} variables")
    r = problem.rows @ x
    row_v = np.maximum(np.maximum(problem.row_lo - r, r - problem.row_hi), 0.0)
    viol: dict[str, float] = dict(zip(problem.row_names, row_v.tolist()))
    bounded = np.flatnonzero(np.isfinite(problem.lb) | np.isfinite(problem.ub))
    bound_v = np.maximum(np.maximum(problem.lb - x, x - problem.ub), 0.0)
    for k in bounded:
        viol[f"bound:{problem.var_name(k)}"] = float(bound_v[k])
    for j, blk in enumerate(problem.soc):
        lhs = np.linalg.norm(blk.A @ x + blk.b)
        rhs = blk.c @ x + blk.d
        viol[blk.name or f"soc{j}"] = float(max(lhs - rhs, 0.0))
    worst = max(viol.values(), default=0.0)
    return ResidualReport(max_violation=worst, violations=viol)
