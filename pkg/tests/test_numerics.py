import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risaoi.numerics import (
    RngStream,
    adjoint,
    complex_to_real_embedding,
    db_to_linear,
    dbm_to_watts,
    hermitian_product,
    sample_cn,
    stack_real,
    unstack_real,
    watts_to_dbm,
)


def cmat(seed, shape):
    g = np.random.default_rng(seed)
    return g.normal(size=shape) + 1j * g.normal(size=shape)


class TestHermitianProduct:
    def test_unit_style(self):
        assert hermitian_product([1, 1j], [1, 1j]) == pytest.approx(2)

    def test_orthogonal(self):
        assert hermitian_product([1, 0], [0, 1]) == 0

    def test_scalar_loop_oracle(self):
        a, b = cmat(1, 8), cmat(2, 8)
        ref = 0j
        for k in range(8):
            ref += a[k].conjugate() * b[k]
        assert abs(hermitian_product(a, b) - ref) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            hermitian_product([1, 2], [1, 2, 3])


class TestEmbedding:
    def test_imaginary_unit(self):
        np.testing.assert_array_equal(complex_to_real_embedding([[1j]]), [[0, -1], [1, 0]])

    def test_identity(self):
        np.testing.assert_array_equal(complex_to_real_embedding(np.eye(2)), np.eye(4))

    def test_product(self):
        A, B = cmat(3, (3, 3)), cmat(4, (3, 3))
        E = complex_to_real_embedding
        np.testing.assert_allclose(E(A @ B), E(A) @ E(B), atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6), st.integers(1, 5), st.integers(1, 5))
    def test_homomorphism_and_adjoint(self, seed, m, n):
        A, B, z = cmat(seed, (m, n)), cmat(seed + 1, (n, m)), cmat(seed + 2, n)
        E = complex_to_real_embedding
        np.testing.assert_allclose(E(A @ B), E(A) @ E(B), atol=1e-12)
        np.testing.assert_allclose(E(adjoint(A)), E(A).T, atol=1e-12)
        np.testing.assert_allclose(adjoint(adjoint(A)), A, atol=0)
        np.testing.assert_allclose(E(A) @ stack_real(z), stack_real(A @ z), atol=1e-12)
        np.testing.assert_array_equal(unstack_real(stack_real(z), z.shape), z)


class TestSampleCn:
    def test_unit_power(self):
        x = sample_cn(10**5, RngStream(11))
        assert abs(np.mean(np.abs(x) ** 2) - 1.0) <= 0.02

    def test_re_im_uncorrelated(self):
        x = sample_cn(10**5, RngStream(12))
        assert abs(np.corrcoef(x.real, x.imag)[0, 1]) < 0.02

    def test_deterministic(self):
        a = sample_cn((4, 3), RngStream(5, 2).child(1))
        b = sample_cn((4, 3), RngStream(5, 2).child(1))
        assert a.tobytes() == b.tobytes()

    def test_streams_differ(self):
        assert not np.array_equal(sample_cn(4, RngStream(5).child(1)), sample_cn(4, RngStream(5).child(2)))

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            sample_cn((0, 3), RngStream(0))


def test_db_helpers():
    assert db_to_linear(30) == pytest.approx(1000)
    assert dbm_to_watts(-70) == pytest.approx(1e-10)
    assert watts_to_dbm(1e-4) == pytest.approx(-10)
    assert watts_to_dbm(0) == -np.inf
