"""Age-of-Information bookkeeping for the information streams.

Slot ``t`` proceeds as: arrivals update the buffer and system time, the
policy decides, delivery is evaluated, then :func:`step_aoi` produces the ages
seen at the start of slot ``t + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .numerics import RngStream

# initial conditions, reported in run metadata
INITIAL_AGE = 1
INITIAL_SYSTEM_TIME = 0
INITIAL_BUFFER = 0


@dataclass
class AoiState:
    age: np.ndarray  # A_i, slots
    system_time: np.ndarray  # z_i, slots
    buffer: np.ndarray  # k_i in {0, 1}
    arrival_prob: np.ndarray  # lambda_i
    t: int = 0

    @classmethod
    def initial(cls, arrival_prob) -> "AoiState":
        lam = np.atleast_1d(np.asarray(arrival_prob, dtype=float))
        if np.any(lam < 0) or np.any(lam > 1):
            raise ValueError(f"arrival probabilities must lie in [0, 1], got {lam}")
        u = lam.size
        return cls(
            age=np.full(u, INITIAL_AGE, dtype=np.int64),
            system_time=np.full(u, INITIAL_SYSTEM_TIME, dtype=np.int64),
            buffer=np.full(u, INITIAL_BUFFER, dtype=np.int64),
            arrival_prob=lam,
        )

    @property
    def weights(self) -> np.ndarray:
        """Per-slot AoI reduction obtainable by delivering now, (A_i - z_i) k_i."""
        return ((self.age - self.system_time) * self.buffer).astype(float)

    def copy(self) -> "AoiState":
        return replace(
            self,
            age=self.age.copy(),
            system_time=self.system_time.copy(),
            buffer=self.buffer.copy(),
        )


@dataclass
class SlotOutcome:
    scheduled: np.ndarray  # alpha_i in {0, 1}
    delivered: np.ndarray  # {0, 1}
    snr: np.ndarray = field(default_factory=lambda: np.zeros(0))  # linear
    harvested: np.ndarray = field(default_factory=lambda: np.zeros(0))  # watts


def sample_arrivals(state: AoiState, rng) -> tuple[AoiState, np.ndarray]:
    """Draw a_i ~ Bernoulli(lambda_i); an arrival overwrites the buffer and resets z_i."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    a = (gen.random(state.arrival_prob.size) < state.arrival_prob).astype(np.int64)
    new = state.copy()
    new.system_time = np.where(a == 1, 0, state.system_time + 1)
    new.buffer = np.where(a == 1, 1, state.buffer)
    return new, a


def realized_snr(h, w, noise_power: float) -> float:
    """|h^H w|^2 / sigma^2."""
    if noise_power <= 0:
        raise ValueError(f"noise power must be positive, got {noise_power}")
    return float(abs(np.vdot(h, w)) ** 2 / noise_power)


def harvested_energy(g, v) -> float:
    """|g^H v|^2 in watts."""
    return float(abs(np.vdot(g, v)) ** 2)


def aoi_recursion(alpha, k, z, age):
    """Four-term AoI update with alpha standing for a successful scheduled delivery."""
    return alpha * k * z + (1 - alpha) * (1 - k) * age + (1 - alpha) * k * age + alpha * (1 - k) * age + 1


def step_aoi(state: AoiState, outcome: SlotOutcome) -> AoiState:
    alpha = np.asarray(outcome.scheduled, dtype=np.int64)
    delivered = np.asarray(outcome.delivered, dtype=np.int64)
    if np.any((delivered == 1) & (alpha * state.buffer != 1)):
        raise ValueError("delivery reported for a stream that was not scheduled or had no buffered packet")
    new = state.copy()
    new.age = aoi_recursion(delivered, state.buffer, state.system_time, state.age)
    new.buffer = np.where(delivered == 1, 0, state.buffer)
    new.t = state.t + 1
    return new


def definitional_aoi(arrivals, delivered) -> np.ndarray:
    """Ages at slots 1..T replayed from an event log.

    ``arrivals[t, i]`` and ``delivered[t, i]`` are the slot-``t`` indicators.
    A_i(t) is the number of slots since the generation of the freshest packet
    delivered before slot ``t``; the initial age of 1 corresponds to a
    virtual packet generated at slot -1.
    """
    arrivals = np.asarray(arrivals)
    delivered = np.asarray(delivered)
    T, U = arrivals.shape
    out = np.zeros((T, U), dtype=np.int64)
    for i in range(U):
        last_gen = -1
        buffered_gen = None
        for t in range(T):
            if arrivals[t, i]:
                buffered_gen = t
            if delivered[t, i]:
                if buffered_gen is None:
                    raise ValueError(f"stream {i} delivered at slot {t} with an empty buffer")
                last_gen = max(last_gen, buffered_gen)
                buffered_gen = None
            out[t, i] = (t + 1) - last_gen
    return out
