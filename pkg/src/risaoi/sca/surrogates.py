"""Affine-magnitude constraints and their first-order minorants.

Every nonconvex constraint in the slot problem has the form
``|s(x)|^2 >= rhs(x)`` where ``s`` is a complex scalar that is affine in the
real decision vector ``x``. Writing ``s(x) = (L x + d)`` with ``L`` of shape
(2, n) (real/imaginary rows) makes the tangent-plane minorant

    |s(x0)|^2 + 2 s(x0)^T L (x - x0)

uniform across the phase block and the beamforming block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class AffineMagnitude:
    """s(x) = L x + d, viewed as (Re s, Im s)."""

    L: np.ndarray  # (2, n)
    d: np.ndarray  # (2,)

    def value(self, x) -> float:
        s = self.L @ x + self.d
        return float(s @ s)

    def minorant(self, x0):
        """Return ``(coef, const)`` with ``coef @ x + const`` tangent at ``x0``."""
        s0 = self.L @ x0 + self.d
        coef = 2.0 * (s0 @ self.L)
        const = float(-(s0 @ s0) + 2.0 * (s0 @ self.d))
        return coef, const

    def minorant_value(self, x, x0) -> float:
        coef, const = self.minorant(x0)
        return float(coef @ x + const)


def conj_linear_map(a, b, n_vars: int, offset: int) -> AffineMagnitude:
    """s = rho^H a + b with rho = x[offset:offset+N] + 1j * x[offset+N:offset+2N]."""
    a = np.asarray(a, dtype=complex)
    N = a.size
    L = np.zeros((2, n_vars))
    L[0, offset : offset + N] = a.real
    L[0, offset + N : offset + 2 * N] = a.imag
    L[1, offset : offset + N] = a.imag
    L[1, offset + N : offset + 2 * N] = -a.real
    return AffineMagnitude(L, np.array([complex(b).real, complex(b).imag]))


def linear_map(h, n_vars: int, re_offset: int, im_offset: int, const=0.0) -> AffineMagnitude:
    """s = h^H w + const with w = x[re_offset:+N] + 1j * x[im_offset:+N]."""
    c = np.conj(np.asarray(h, dtype=complex))
    N = c.size
    L = np.zeros((2, n_vars))
    L[0, re_offset : re_offset + N] = c.real
    L[0, im_offset : im_offset + N] = -c.imag
    L[1, re_offset : re_offset + N] = c.imag
    L[1, im_offset : im_offset + N] = c.real
    const = complex(const)
    return AffineMagnitude(L, np.array([const.real, const.imag]))
