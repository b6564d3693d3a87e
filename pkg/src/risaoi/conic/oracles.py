"""Brute-force reference solutions used to validate the conic solver."""

from __future__ import annotations

import itertools

import numpy as np


def lp_vertex_oracle(c, A, b, tol: float = 1e-9):
    """Maximize ``c @ x`` over the polytope ``A x <= b`` by enumerating vertices.

    The polytope must be bounded. Returns ``(value, x)``, or ``(None, None)``
    when no vertex exists (empty set).
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = c.size
    best, arg = None, None
    for rows in itertools.combinations(range(A.shape[0]), n):
        sub = A[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, b[list(rows)])
        if np.all(A @ x <= b + tol * (1 + np.abs(b))):
            v = float(c @ x)
            if best is None or v > best:
                best, arg = v, x
    return best, arg


def ball_oracle(c, center, radius: float):
    """Maximize ``c @ x`` over ``||x - center|| <= radius``; closed form."""
    c = np.asarray(c, dtype=float)
    center = np.asarray(center, dtype=float)
    nc = np.linalg.norm(c)
    x = center + (radius * c / nc if nc > 0 else 0.0)
    return float(c @ center + radius * nc), x


def ball_projection(y, center, radius: float):
    """Euclidean projection of ``y`` onto the ball; closed form."""
    y = np.asarray(y, dtype=float)
    center = np.asarray(center, dtype=float)
    d = y - center
    nd = np.linalg.norm(d)
    return y.copy() if nd <= radius else center + radius * d / nd
