import numpy as np
import pytest

from risaoi.baselines import (
    BaselineKind,
    af_cascade_snr,
    af_received_snr,
    af_relay_slot,
    draw_relay_channels,
    eh_power_split,
    mrt_beamformers,
    mrt_slot,
    random_phases,
)
from risaoi.channel import NetworkSizes, PathLossParams, draw_channels
from risaoi.numerics import RngStream
from risaoi.sca.problems import snr_values

from conftest import make_problem


class TestMrt:
    def test_single_iu_full_power(self):
        ch = draw_channels(PathLossParams(), NetworkSizes(4, 2, 1, 0), RngStream(0))
        rho = np.ones(2)
        W, V = mrt_beamformers(ch, rho, [3.0], [])
        h = ch.composite_iu(rho)[0]
        snr = abs(h @ W[0]) ** 2 / 1e-10
        assert snr == pytest.approx(3.0 * np.linalg.norm(h) ** 2 / 1e-10, rel=1e-12)
        assert V.shape == (0, 4)

    def test_equal_split(self):
        ch = draw_channels(PathLossParams(), NetworkSizes(4, 2, 2, 0), RngStream(1))
        W, _ = mrt_beamformers(ch, np.ones(2), [1.5, 1.5], [])
        np.testing.assert_allclose(np.sum(np.abs(W) ** 2, axis=1), [1.5, 1.5], rtol=1e-12)

    def test_beats_random_beams(self):
        ch = draw_channels(PathLossParams(), NetworkSizes(4, 3, 1, 0), RngStream(2))
        rho = random_phases(3, RngStream(2))
        W, _ = mrt_beamformers(ch, rho, [1.0], [])
        h = ch.composite_iu(rho)[0]
        best = abs(h @ W[0]) ** 2
        g = np.random.default_rng(2)
        for _ in range(100):
            w = g.normal(size=4) + 1j * g.normal(size=4)
            w /= np.linalg.norm(w)
            assert abs(h @ w) ** 2 <= best * (1 + 1e-12)

    def test_negative_power(self):
        ch = draw_channels(PathLossParams(), NetworkSizes(4, 2, 1, 0), RngStream(0))
        with pytest.raises(ValueError):
            mrt_beamformers(ch, np.ones(2), [-1.0], [])


class TestRandomPhases:
    def test_unit_modulus(self):
        assert np.max(np.abs(np.abs(random_phases(1000, RngStream(0))) - 1)) <= 1e-15

    def test_uniform_mean(self):
        r = random_phases(10**5, RngStream(1))
        assert abs(r.real.mean()) < 0.02 and abs(r.imag.mean()) < 0.02

    def test_deterministic(self):
        np.testing.assert_array_equal(random_phases(8, RngStream(3).child(2)), random_phases(8, RngStream(3).child(2)))


class TestPowerSplit:
    def test_equal_share_suffices(self):
        assert eh_power_split([1.0, 1.0], 2, 4.0, 0.5) == (1.0, 1.0)

    def test_bisection_meets_threshold(self):
        gains = np.array([0.1, 0.4])
        p, q = eh_power_split(gains, 1, 3.0, 0.12)
        assert q * gains.min() == pytest.approx(0.12, rel=1e-9)
        assert p + 2 * q == pytest.approx(3.0)

    def test_infeasible(self):
        assert eh_power_split([0.01], 1, 1.0, 1.0) is None

    def test_slot_respects_budget(self):
        prob = make_problem(seed=4, q_dbm=-10)
        b = mrt_slot(prob, random_phases(prob.n_s, RngStream(4)))
        assert b.feasible
        assert np.sum(np.abs(b.W) ** 2) + np.sum(np.abs(b.V) ** 2) == pytest.approx(prob.power_budget)
        assert b.alpha.sum() == prob.channels_available
        assert np.all(b.harvested >= prob.energy_threshold * (1 - 1e-9))
        np.testing.assert_allclose(b.snr, snr_values(prob, b.rho, b.W))


class TestAfRelay:
    def test_cascade_formula(self):
        assert af_cascade_snr(10, 10) == pytest.approx(100 / 21)

    def test_limit(self):
        assert af_cascade_snr(7.0, 1e15) == pytest.approx(7.0, rel=1e-12)

    def test_signal_chain_oracle(self):
        g = np.random.default_rng(0)
        for _ in range(20):
            H = g.normal(size=(3, 4)) + 1j * g.normal(size=(3, 4))
            f = g.normal(size=3) + 1j * g.normal(size=3)
            u = g.normal(size=4) + 1j * g.normal(size=4)
            u /= np.linalg.norm(u)
            p, q, n = g.uniform(0.1, 2), g.uniform(0.1, 2), g.uniform(0.5, 2)
            g1 = p * np.linalg.norm(H @ u) ** 2 / n
            g2 = q * np.linalg.norm(f) ** 2 / n
            assert af_received_snr(H, u, f, p, q, n) == pytest.approx(af_cascade_snr(g1, g2), rel=1e-10)

    def test_slot(self):
        prob = make_problem(seed=5, q_dbm=-15)
        relay = draw_relay_channels(PathLossParams(), NetworkSizes(4, 8, 3, 3), 4, RngStream(5))
        b = af_relay_slot(prob, relay, 0.5)
        assert b.feasible and b.alpha.sum() == 2
        assert np.sum(np.abs(b.W) ** 2) + np.sum(np.abs(b.V) ** 2) <= 0.5 * prob.power_budget * (1 + 1e-9)
        assert np.all(b.snr[b.alpha == 0] == 0)
        with pytest.raises(ValueError):
            af_relay_slot(prob, relay, 1.0)


def test_parse_policy():
    assert BaselineKind.parse("Random-Phase") is BaselineKind.RANDOM_PHASE
    with pytest.raises(ValueError, match="unknown policy"):
        BaselineKind.parse("zf")
