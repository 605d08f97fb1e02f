"""Small dense complex linear algebra.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Every function
accepts a stack of matrices with shape ``(..., m, n)`` and returns new
arrays, never mutating its inputs. Sizes in this package never exceed a few
tens of rows, so the factorizations below loop over the matrix dimension and
vectorize over the leading batch axes.
"""

import numpy as np

from .errors import DimensionError, SingularMatrixError

__all__ = [
    "as_matrix",
    "matmul",
    "hermitian",
    "cholesky",
    "solve_hpd",
    "inv_hpd",
    "logdet_hpd",
    "frobenius_norm_sq",
    "real_stack",
]

ATOL = 1e-10
RTOL = 1e-8


def as_matrix(a) -> np.ndarray:
    """Validate ``a`` as a (stack of) finite complex matrices and return a
    read-only ``complex128`` copy."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim == 1:
        m = m[np.newaxis, :]
    if m.ndim < 2 or m.shape[-1] == 0 or m.shape[-2] == 0:
        raise DimensionError(f"expected a non-empty matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    m.flags.writeable = False
    return m


def matmul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape[-1] != b.shape[-2]:
        raise DimensionError(
            f"cannot multiply {a.shape[-2]}x{a.shape[-1]} by {b.shape[-2]}x{b.shape[-1]}"
        )
    return a @ b


def hermitian(a) -> np.ndarray:
    """Conjugate transpose of the last two axes."""
    return np.conj(np.swapaxes(np.asarray(a), -1, -2))


def cholesky(a) -> np.ndarray:
    """Lower-triangular ``L`` with ``a = L Lᴴ``.

    Raises
    ------
    SingularMatrixError
        If a pivot is not strictly positive.
    """
    a = np.asarray(a, dtype=np.complex128)
    n = a.shape[-1]
    if a.shape[-2] != n:
        raise DimensionError(f"expected a square matrix, got {a.shape[-2]}x{n}")
    L = np.zeros_like(a)
    for j in range(n):
        row = L[..., j, :j]
        d = a[..., j, j].real - np.sum(np.abs(row) ** 2, axis=-1)
        if np.any(~(d > 0)):
            raise SingularMatrixError(f"matrix is not positive definite (pivot {j})")
        ljj = np.sqrt(d)
        L[..., j, j] = ljj
        if j + 1 < n:
            below = a[..., j + 1:, j] - np.einsum("...ik,...k->...i", L[..., j + 1:, :j], np.conj(row))
            L[..., j + 1:, j] = below / ljj[..., np.newaxis]
    return L


def _forward(L, b):
    n = L.shape[-1]
    x = np.zeros(np.broadcast_shapes(L.shape[:-2], b.shape[:-2]) + b.shape[-2:], dtype=np.complex128)
    for i in range(n):
        acc = b[..., i, :] - np.einsum("...k,...kc->...c", L[..., i, :i], x[..., :i, :])
        x[..., i, :] = acc / L[..., i, i][..., np.newaxis]
    return x


def _backward(L, b):
    # solves Lᴴ x = b
    n = L.shape[-1]
    x = np.zeros_like(b)
    for i in reversed(range(n)):
        acc = b[..., i, :] - np.einsum("...k,...kc->...c", np.conj(L[..., i + 1:, i]), x[..., i + 1:, :])
        x[..., i, :] = acc / L[..., i, i][..., np.newaxis].real
    return x


def solve_hpd(a, b) -> np.ndarray:
    """Solve ``a x = b`` for Hermitian positive definite ``a`` via Cholesky."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape[-2] != b.shape[-2]:
        raise DimensionError(
            f"cannot solve {a.shape[-2]}x{a.shape[-1]} system against {b.shape[-2]}x{b.shape[-1]}"
        )
    L = cholesky(a)
    return _backward(L, _forward(L, b))


def inv_hpd(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    eye = np.broadcast_to(np.eye(a.shape[-1], dtype=np.complex128), a.shape)
    return solve_hpd(a, eye)


def logdet_hpd(a):
    """Base-2 log-determinant of a Hermitian positive definite matrix.

    Computed as ``2 Σ log2 L_ii`` from the Cholesky factor, so it stays
    accurate where the determinant itself would overflow.
    """
    L = cholesky(a)
    diag = np.real(np.diagonal(L, axis1=-2, axis2=-1))
    return 2.0 * np.sum(np.log2(diag), axis=-1)


def frobenius_norm_sq(a):
    a = np.asarray(a)
    return np.sum(a.real ** 2 + a.imag ** 2, axis=(-2, -1))


def real_stack(a) -> np.ndarray:
    """Real embedding ``[[Re, -Im], [Im, Re]]`` of a complex matrix.

    Products map to products: ``real_stack(a @ b) == real_stack(a) @ real_stack(b)``.
    """
    a = np.asarray(a, dtype=np.complex128)
    top = np.concatenate([a.real, -a.imag], axis=-1)
    bottom = np.concatenate([a.imag, a.real], axis=-1)
    return np.concatenate([top, bottom], axis=-2)
