from decimal import Decimal, getcontext

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risaoi.channel import (
    NetworkSizes,
    PathLossParams,
    amplitude_gain,
    composite_factor_eu,
    composite_factor_iu,
    draw_channels,
)
from risaoi.numerics import RngStream


def small(seed, n_t=3, n_s=2, u_i=2, u_e=2):
    return draw_channels(PathLossParams(), NetworkSizes(n_t, n_s, u_i, u_e), RngStream(seed))


class TestAmplitudeGain:
    def test_reference_distance(self):
        p = PathLossParams()
        for n in (2.0, 2.2, 3.5):
            assert amplitude_gain(p, 1.0, n) == pytest.approx(10**-1.5, rel=1e-12)

    def test_high_precision_oracle(self):
        getcontext().prec = 50
        ref = (Decimal("1e-3") * Decimal(3) ** Decimal("-2.2")).sqrt()
        assert abs(amplitude_gain(PathLossParams(), 3.0, 2.2) - float(ref)) < 1e-12

    def test_inverse_square(self):
        p = PathLossParams()
        r = (amplitude_gain(p, 10.0, 2.0) / amplitude_gain(p, 5.0, 2.0)) ** 2
        assert r == pytest.approx(0.25, rel=1e-12)

    def test_rejects_bad_distance(self):
        with pytest.raises(ValueError):
            amplitude_gain(PathLossParams(), 0.0, 2.0)
        with pytest.raises(ValueError):
            PathLossParams(d_br=-1.0)


class TestDrawChannels:
    def test_direct_link_power(self):
        p = PathLossParams()
        h = np.concatenate([draw_channels(p, NetworkSizes(4, 1, 1, 0), RngStream(s)).h_b.ravel() for s in range(2500)])
        expected = 1e-3 * 31**-2.2
        assert abs(np.mean(np.abs(h) ** 2) / expected - 1) < 0.03

    def test_deterministic(self):
        a, b = small(7), small(7)
        for name in ("h_b", "h_r", "g_b", "g_r", "G"):
            np.testing.assert_array_equal(getattr(a, name), getattr(b, name))

    def test_default_shapes(self):
        ch = draw_channels(PathLossParams(), NetworkSizes(), RngStream(0))
        assert ch.G.shape == (40, 4)
        assert ch.h_b.shape == (3, 4) and ch.h_r.shape == (3, 40)
        assert ch.g_b.shape == (3, 4) and ch.g_r.shape == (3, 40)

    def test_ris_user_distance_floor(self):
        p = PathLossParams(d_bj=3.0, d_br=3.0)
        assert p.ris_eu_distance == p.reference_distance
        assert PathLossParams().ris_iu_distance == 28.0


class TestComposite:
    def test_identity_phases(self):
        ch = small(1)
        rho = np.ones(2)
        for i in range(2):
            U, hb = composite_factor_iu(ch, i)
            ref = ch.h_r[i].conj() @ ch.G + hb.conj()
            np.testing.assert_allclose(rho.conj() @ U + hb.conj(), ref, atol=1e-12)
            np.testing.assert_allclose(ch.composite_iu(rho)[i], ref, atol=1e-12)
            V, gb = composite_factor_eu(ch, i)
            np.testing.assert_allclose(rho.conj() @ V + gb.conj(), ch.g_r[i].conj() @ ch.G + gb.conj(), atol=1e-12)

    @pytest.mark.parametrize("kind", ["iu", "eu"])
    def test_scalar_loop(self, kind):
        ch = small(2)
        U, _ = (composite_factor_iu if kind == "iu" else composite_factor_eu)(ch, 1)
        r = (ch.h_r if kind == "iu" else ch.g_r)[1]
        for n in range(2):
            for t in range(3):
                assert abs(U[n, t] - r[n].conjugate() * ch.G[n, t]) < 1e-15

    def test_blocked_reflection(self):
        ch = small(3)
        ch.h_r[:] = 0
        U, hb = composite_factor_iu(ch, 0)
        assert not U.any()
        rho = np.exp(1j * np.arange(2))
        np.testing.assert_array_equal(ch.composite_iu(rho)[0], hb.conj())
        ch.G[:] = 0
        np.testing.assert_array_equal(ch.composite_eu(rho), ch.g_b.conj())

    def test_index_checks(self):
        with pytest.raises(IndexError):
            composite_factor_iu(small(0), 5)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**31))
    def test_factorization_matches_phi(self, seed):
        g = np.random.default_rng(seed)
        ch = small(seed, n_s=5)
        rho = np.exp(1j * g.uniform(0, 2 * np.pi, 5)) * g.uniform(0, 1, 5)
        w = g.normal(size=3) + 1j * g.normal(size=3)
        Phi = np.diag(rho.conj())
        for i in range(2):
            direct = (ch.h_r[i].conj() @ Phi @ ch.G + ch.h_b[i].conj()) @ w
            assert abs(ch.composite_iu(rho)[i] @ w - direct) <= 1e-10 * np.linalg.norm(w) * max(1.0, abs(direct))

    def test_without_eus(self):
        ch = small(4).without_eus()
        assert ch.sizes.u_e == 0
        assert ch.composite_eu(np.ones(2)).shape == (0, 3)
