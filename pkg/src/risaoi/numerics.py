"""Complex linear-algebra helpers and the seeded randomness contract.

Every random draw in the package goes through an :class:`RngStream`; there is
no module-level generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def as_cvec(a) -> np.ndarray:
    v = np.asarray(a, dtype=complex)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"expected a nonempty 1-D complex vector, got shape {v.shape}")
    return v


def hermitian_product(a, b) -> complex:
    """Return ``a^H b`` for two complex vectors of equal length."""
    a = as_cvec(a)
    b = as_cvec(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def adjoint(m) -> np.ndarray:
    """Conjugate transpose; 1-D input is treated as a column vector."""
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        return m.conj()[np.newaxis, :]
    return m.conj().T


def complex_to_real_embedding(m) -> np.ndarray:
    """Map ``M`` to ``[[Re M, -Im M], [Im M, Re M]]``.

    The map is a ring homomorphism, so complex products carry over to real
    products of the embedded blocks. A vector ``z`` is embedded as
    ``[Re z; Im z]``, consistent with multiplying by the embedded matrix.
    """
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    re, im = m.real, m.imag
    return np.block([[re, -im], [im, re]])


def stack_real(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.concatenate([z.real.ravel(), z.imag.ravel()])


def unstack_real(x, shape) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    k = x.size // 2
    return (x[:k] + 1j * x[k:]).reshape(shape)


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream identified by ``(seed, stream)``.

    ``child(*keys)`` derives an independent sub-stream; identical key paths
    always produce identical draw sequences.
    """

    seed: int
    stream: int = 0
    path: tuple = field(default=())

    def child(self, *keys: int) -> "RngStream":
        return RngStream(self.seed, self.stream, self.path + tuple(int(k) for k in keys))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            entropy=int(self.seed) & ((1 << 64) - 1),
            spawn_key=(int(self.stream),) + self.path,
        )
        return np.random.Generator(np.random.PCG64(ss))


def sample_cn(dims, rng) -> np.ndarray:
    """Draw i.i.d. CN(0, 1) entries (real and imaginary parts each of variance 1/2).

    ``rng`` is an :class:`RngStream` or a numpy ``Generator``. Values are drawn
    as a trailing (re, im) axis in C order, so a larger first dimension from
    the same stream extends a smaller draw instead of reshuffling it.
    """
    dims = (dims,) if np.isscalar(dims) else tuple(dims)
    if any(int(d) <= 0 for d in dims):
        raise ValueError(f"dimensions must be positive, got {dims}")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    raw = gen.standard_normal(dims + (2,))
    return (raw[..., 0] + 1j * raw[..., 1]) / np.sqrt(2.0)


def db_to_linear(db: float) -> float:
    return float(10.0 ** (db / 10.0))


def dbm_to_watts(dbm: float) -> float:
    return float(10.0 ** ((dbm - 30.0) / 10.0))


def watts_to_dbm(w: float) -> float:
    if w <= 0:
        return float("-inf")
    return float(10.0 * np.log10(w) + 30.0)
