import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import crandn, random_hpd
from mimo_jscc.errors import DimensionError, SingularMatrixError
from mimo_jscc.numerics import (
    as_matrix,
    cholesky,
    frobenius_norm_sq,
    hermitian,
    inv_hpd,
    logdet_hpd,
    matmul,
    real_stack,
    solve_hpd,
)


def naive_matmul(a, b):
    out = np.zeros((a.shape[0], b.shape[1]), dtype=complex)
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            for k in range(a.shape[1]):
                out[i, j] += a[i, k] * b[k, j]
    return out


def test_matmul_identity_and_i_squared(rng):
    m = crandn(rng, 2, 3)
    assert np.array_equal(matmul(np.eye(2), m), m)
    assert matmul([[1j]], [[1j]])[0, 0] == -1


def test_matmul_matches_triple_loop(rng):
    a, b = crandn(rng, 3, 2), crandn(rng, 2, 3)
    np.testing.assert_allclose(matmul(a, b), naive_matmul(a, b), atol=1e-12)


def test_matmul_dimension_error_names_shapes():
    with pytest.raises(DimensionError, match="2x3.*2x2"):
        matmul(np.ones((2, 3)), np.ones((2, 2)))


def test_hermitian(rng):
    assert hermitian([[1j]])[0, 0] == -1j
    r = rng.standard_normal((2, 3))
    assert np.array_equal(hermitian(r), r.T)
    a = crandn(rng, 2, 3)
    h = hermitian(a)
    assert h.shape == (3, 2)
    for i in range(2):
        for j in range(3):
            assert h[j, i] == np.conj(a[i, j])
    assert np.array_equal(hermitian(hermitian(a)), a)


def test_hermitian_reverses_products(rng):
    a, b = crandn(rng, 3, 4), crandn(rng, 4, 2)
    np.testing.assert_allclose(hermitian(a @ b), hermitian(b) @ hermitian(a), atol=1e-12)


def test_solve_hpd_trivial(rng):
    np.testing.assert_allclose(solve_hpd(2 * np.eye(2), np.eye(2)), 0.5 * np.eye(2), atol=1e-15)
    b = crandn(rng, 3, 2)
    np.testing.assert_allclose(solve_hpd(np.eye(3), b), b, atol=1e-15)


@pytest.mark.parametrize("n", range(1, 9))
def test_solve_hpd_residual(rng, n):
    a = random_hpd(rng, n)
    b = crandn(rng, n, 3)
    x = solve_hpd(a, b)
    assert np.linalg.norm(a @ x - b) <= 1e-10 * np.linalg.norm(b)


def test_solve_hpd_batched(rng):
    a = np.stack([random_hpd(rng, 3) for _ in range(5)])
    b = crandn(rng, 5, 3, 2)
    x = solve_hpd(a, b)
    for i in range(5):
        np.testing.assert_allclose(a[i] @ x[i], b[i], atol=1e-10)


def test_cholesky_factor(rng):
    a = random_hpd(rng, 4)
    L = cholesky(a)
    assert np.allclose(np.triu(L, 1), 0)
    np.testing.assert_allclose(L @ L.conj().T, a, atol=1e-12)


@pytest.mark.parametrize("bad", [np.zeros((2, 2)), np.diag([1.0, -1.0]), [[1, 2], [2, 1]]])
def test_non_hpd_raises(bad):
    with pytest.raises(SingularMatrixError):
        solve_hpd(bad, np.eye(2))
    with pytest.raises(SingularMatrixError):
        logdet_hpd(bad)


def test_logdet_trivial():
    assert logdet_hpd(2 * np.eye(2)) == pytest.approx(2.0, abs=1e-12)
    assert logdet_hpd(np.eye(5)) == pytest.approx(0.0, abs=1e-12)


def test_logdet_matches_eigenvalue_oracle(rng):
    a = random_hpd(rng, 3)
    oracle = np.sum(np.log2(np.linalg.eigvalsh(a)))
    assert abs(logdet_hpd(a) - oracle) <= 1e-9


def test_logdet_of_inverse_cancels(rng):
    for n in (2, 4, 8):
        a = random_hpd(rng, n)
        assert abs(logdet_hpd(a) + logdet_hpd(inv_hpd(a))) <= 1e-8


def test_frobenius(rng):
    assert frobenius_norm_sq(np.eye(2)) == 2
    assert frobenius_norm_sq([[3 + 4j]]) == 25
    a = crandn(rng, 3, 4)
    assert frobenius_norm_sq(a) == pytest.approx(sum(abs(v) ** 2 for v in a.ravel()), rel=1e-14)


def test_real_stack_examples():
    np.testing.assert_array_equal(real_stack([[1j]]), [[0, -1], [1, 0]])
    r = np.array([[1.0, 2.0], [3.0, 4.0]])
    s = real_stack(r)
    np.testing.assert_array_equal(s[:2, :2], r)
    np.testing.assert_array_equal(s[2:, 2:], r)
    assert not s[:2, 2:].any() and not s[2:, :2].any()


def test_as_matrix_rejects_nonfinite():
    with pytest.raises(ValueError):
        as_matrix([[np.nan]])
    m = as_matrix([[1, 2]])
    assert not m.flags.writeable


complex_entries = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


def cmat(r, c):
    return st.lists(complex_entries, min_size=r * c, max_size=r * c).map(
        lambda v: np.array(v, dtype=complex).reshape(r, c)
    )


@settings(max_examples=60, deadline=None)
@given(cmat(2, 2), cmat(2, 2))
def test_real_stack_is_ring_homomorphism(a, b):
    np.testing.assert_allclose(real_stack(a @ b), real_stack(a) @ real_stack(b), atol=1e-12 * (1 + np.abs(a).max() * np.abs(b).max()))
    np.testing.assert_allclose(real_stack(a + b), real_stack(a) + real_stack(b), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(cmat(3, 2))
def test_hermitian_involution(a):
    assert np.array_equal(hermitian(hermitian(a)), a)
