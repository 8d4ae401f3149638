"""Dense complex matrix kernel.

Hermitian eigendecomposition by cyclic Jacobi rotations, skew-Hermitian
matrix exponential, Frobenius inner product, and structure validators for
the matrix classes the rest of the package relies on (Hermitian,
skew-Hermitian traceless, unitary). Everything here is sized for dense
matrices of dimension up to a few dozen.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from . import tolerances
from .errors import NumericError, UsageError

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

_JACOBI_MAX_SWEEPS = 64


def as_complex_matrix(a) -> np.ndarray:
    """Validate and return a finite square complex matrix."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise UsageError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] < 1:
        raise UsageError("matrix dimension must be positive")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise UsageError("matrix entries must be finite")
    return m


def frobenius_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a)))


def frobenius_inner(a, b) -> complex:
    """Frobenius inner product tr(a^H b)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise UsageError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.sum(np.conj(a) * b))


def check_hermitian(a, tol: float = tolerances.HERMITIAN_SYM) -> np.ndarray:
    """Validate ||M - M^H||_F <= tol * ||M||_F and return the matrix."""
    m = as_complex_matrix(a)
    scale = max(frobenius_norm(m), 1e-300)
    defect = frobenius_norm(m - m.conj().T)
    if defect > tol * scale:
        raise UsageError(f"matrix is not Hermitian: relative defect {defect / scale:.3e}")
    return m


def check_skew_traceless(a, tol: float = tolerances.SKEW_SYM) -> np.ndarray:
    """Validate ||M + M^H||_F and |tr M| <= tol * ||M||_F and return the matrix."""
    m = as_complex_matrix(a)
    scale = max(frobenius_norm(m), 1e-300)
    defect = frobenius_norm(m + m.conj().T)
    if defect > tol * scale:
        raise UsageError(f"matrix is not skew-Hermitian: relative defect {defect / scale:.3e}")
    tr = abs(np.trace(m))
    if tr > tol * scale:
        raise UsageError(f"matrix is not traceless: relative |trace| {tr / scale:.3e}")
    return m


def check_unitary(a, tol: float = tolerances.UNITARY) -> np.ndarray:
    """Validate ||U^H U - I||_F <= tol and return the matrix."""
    m = as_complex_matrix(a)
    n = m.shape[0]
    defect = frobenius_norm(m.conj().T @ m - np.eye(n))
    if defect > tol:
        raise UsageError(f"matrix is not unitary: defect {defect:.3e}")
    return m


def unitarity_defect(a) -> float:
    m = np.asarray(a, dtype=complex)
    return frobenius_norm(m.conj().T @ m - np.eye(m.shape[0]))


def skew_traceless_part(m) -> np.ndarray:
    """Project an arbitrary matrix onto skew-Hermitian traceless matrices."""
    m = as_complex_matrix(m)
    n = m.shape[0]
    s = (m - m.conj().T) / 2.0
    return s - (np.trace(s) / n) * np.eye(n)


def hermitian_eig(h, tol: float = 1e-14, max_sweeps: int = _JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(w, V)`` with eigenvalues ``w`` ascending and unitary ``V``
    such that ``h = V diag(w) V^H``. ``tol`` bounds the final off-diagonal
    mass relative to ||h||_F. Raises NumericError if the sweep budget is
    exhausted before the off-diagonal mass falls below tolerance.

    The rotations operate on plain Python complex scalars: at the target
    dimensions (<= 64) this outruns vectorized updates, whose per-call
    overhead dominates on tiny matrices.
    """
    h = check_hermitian(h)
    n = h.shape[0]
    if n == 1:
        return np.array([h[0, 0].real]), np.eye(1, dtype=complex)

    a = [[complex(h[i, j]) for j in range(n)] for i in range(n)]
    v = [[1.0 + 0.0j if i == j else 0.0j for j in range(n)] for i in range(n)]
    scale = max(frobenius_norm(h), 1e-300)

    converged = False
    for _ in range(max_sweeps):
        off = math.sqrt(2.0 * sum(abs(a[i][j]) ** 2 for i in range(n) for j in range(i + 1, n)))
        if off <= tol * scale:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                tau = (a[q][q].real - a[p][p].real) / (2.0 * mag)
                t = (1.0 if tau >= 0.0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c * phase
                sc = s.conjugate()
                for k in range(n):
                    akp = a[k][p]
                    akq = a[k][q]
                    a[k][p] = c * akp - sc * akq
                    a[k][q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p][k]
                    aqk = a[q][k]
                    a[p][k] = c * apk - s * aqk
                    a[q][k] = sc * apk + c * aqk
                for k in range(n):
                    vkp = v[k][p]
                    vkq = v[k][q]
                    v[k][p] = c * vkp - sc * vkq
                    v[k][q] = s * vkp + c * vkq
    if not converged:
        off = math.sqrt(2.0 * sum(abs(a[i][j]) ** 2 for i in range(n) for j in range(i + 1, n)))
        raise NumericError(
            f"Jacobi eigensolver did not converge in {max_sweeps} sweeps; "
            f"relative off-diagonal residual {off / scale:.3e}"
        )

    w = np.array([a[i][i].real for i in range(n)])
    vm = np.array(v, dtype=complex)
    order = np.argsort(w, kind="stable")
    return w[order], vm[:, order]


def exp_skew(omega) -> np.ndarray:
    """Unitary exponential of a skew-Hermitian traceless matrix.

    Computed through the Hermitian eigendecomposition of i*omega, so the
    result is unitary up to eigensolver accuracy and has determinant 1 up
    to the traceless defect of the input.
    """
    omega = check_skew_traceless(omega)
    n = omega.shape[0]
    if frobenius_norm(omega) == 0.0:
        return np.eye(n, dtype=complex)
    w, v = hermitian_eig(1j * omega)
    return (v * np.exp(-1j * w)) @ v.conj().T


def polar_unitary(m) -> np.ndarray:
    """Nearest unitary factor U of m = U P, via eigendecomposition of m^H m."""
    m = as_complex_matrix(m)
    w, v = hermitian_eig(m.conj().T @ m)
    if np.any(w <= 0.0):
        raise NumericError("matrix is numerically singular; polar factor undefined")
    inv_sqrt = (v * (1.0 / np.sqrt(w))) @ v.conj().T
    return m @ inv_sqrt


@lru_cache(maxsize=16)
def traceless_hermitian_basis(n: int) -> np.ndarray:
    """Orthonormal basis of traceless Hermitian n x n matrices.

    Orthonormal under tr(A B); real off-diagonal pairs first, then the
    imaginary pairs, then the diagonal ladder. Shape (n^2 - 1, n, n).
    """
    if n < 2:
        raise UsageError("traceless Hermitian basis requires n >= 2")
    mats = []
    r = 1.0 / math.sqrt(2.0)
    for i in range(n):
        for j in range(i + 1, n):
            b = np.zeros((n, n), dtype=complex)
            b[i, j] = r
            b[j, i] = r
            mats.append(b)
            b = np.zeros((n, n), dtype=complex)
            b[i, j] = -1.0j * r
            b[j, i] = 1.0j * r
            mats.append(b)
    for k in range(1, n):
        d = np.zeros(n)
        d[:k] = 1.0
        d[k] = -float(k)
        mats.append(np.diag(d).astype(complex) / math.sqrt(k * (k + 1.0)))
    out = np.array(mats)
    out.setflags(write=False)
    return out
