"""
Small dense complex linear algebra.

Everything in this package lives in dimension 32 or less, so the routines here
favour transparency over speed. Matrices and vectors are plain numpy arrays
of dtype complex128; nothing here mutates its inputs.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
NORM_TOL = 1e-12
SUPPORT_CUTOFF = 1e-12
JACOBI_TOL = 1e-14
MAX_DIM = 32


class NotHermitianError(ValueError):
    """Raised when an operation needs a Hermitian matrix and gets something else."""


class NotPSDError(ValueError):
    """Raised when a matrix has an eigenvalue below -PSD_TOL."""


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {a.shape}")
    return a


def as_vector(v) -> np.ndarray:
    a = np.asarray(v, dtype=complex).reshape(-1)
    if a.size == 0:
        raise ValueError("empty vector")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def ket(*amplitudes) -> np.ndarray:
    """Build a ket from its amplitudes, e.g. ``ket(1, 0, 1) / sqrt(2)``."""
    return np.array(amplitudes, dtype=complex)


def basis(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(v) -> np.ndarray:
    """|v><v| (not renormalised)."""
    v = as_vector(v)
    return np.outer(v, np.conj(v))


def is_normalized(v, tol: float = NORM_TOL) -> bool:
    v = as_vector(v)
    return abs(np.vdot(v, v).real - 1.0) <= tol


def max_asymmetry(m) -> float:
    """Largest elementwise |M - M^dagger|."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return float("inf")
    return float(np.max(np.abs(m - dagger(m)))) if m.size else 0.0


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    return max_asymmetry(m) <= tol


def _require_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    asym = max_asymmetry(m)
    if asym > tol:
        raise NotHermitianError(f"matrix is not Hermitian: max |M - M^dagger| = {asym:.3e}")
    if m.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {m.shape[0]} exceeds the supported maximum {MAX_DIM}")


def hermitian_eig(m, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """
    Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Parameters
    ----------
    m : array_like
        Hermitian matrix of dimension at most 32.
    tol : float
        Allowed elementwise asymmetry of the input.

    Returns
    -------
    eigenvalues : ndarray
        Real eigenvalues in ascending order.
    eigenvectors : ndarray
        Unitary matrix whose k-th column belongs to the k-th eigenvalue.

    Raises
    ------
    NotHermitianError
        If ``max |m - m^dagger| > tol``; the message carries the asymmetry.
    """
    a = as_matrix(m)
    _require_hermitian(a, tol)
    n = a.shape[0]
    a = 0.5 * (a + dagger(a))
    v = np.eye(n, dtype=complex)
    threshold = JACOBI_TOL * max(1.0, float(np.linalg.norm(a)))

    off_diag = ~np.eye(n, dtype=bool)
    for _ in range(100):
        off = np.sqrt(np.sum(np.abs(a[off_diag]) ** 2))
        if off < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag < 1e-3 * threshold:
                    continue
                # Phase q so the pivot turns real, then a real Givens rotation.
                phase = np.conj(apq) / mag
                app, aqq = a[p, p].real, a[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                j = np.array([[c, s], [-s * phase, c * phase]], dtype=complex)
                cols = [p, q]
                a[:, cols] = a[:, cols] @ j
                a[cols, :] = dagger(j) @ a[cols, :]
                v[:, cols] = v[:, cols] @ j
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    else:  # pragma: no cover - never observed for n <= 32
        raise RuntimeError("Jacobi iteration did not converge")

    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def min_eigenvalue(m) -> float:
    return float(hermitian_eig(m)[0][0])


def is_psd(m, tol: float = PSD_TOL) -> bool:
    if not is_hermitian(m):
        return False
    return min_eigenvalue(m) >= -tol


def mat_pow_half(m, exponent: float) -> np.ndarray:
    """
    Square root (``exponent=+0.5``) or support-restricted inverse square root
    (``exponent=-0.5``) of a positive semidefinite matrix.

    Eigenvalues below ``SUPPORT_CUTOFF`` are treated as exactly zero, so for
    ``-0.5`` the result is the inverse square root on the support of ``m`` and
    vanishes on its kernel.
    """
    if exponent not in (0.5, -0.5):
        raise ValueError(f"exponent must be +1/2 or -1/2, got {exponent}")
    w, v = hermitian_eig(m)
    if w[0] < -PSD_TOL:
        raise NotPSDError(f"matrix has negative eigenvalue {w[0]:.3e}")
    keep = w >= SUPPORT_CUTOFF
    scaled = np.zeros_like(w)
    scaled[keep] = w[keep] ** exponent
    return (v * scaled) @ dagger(v)


def support_projector(m) -> np.ndarray:
    w, v = hermitian_eig(m)
    vk = v[:, w >= SUPPORT_CUTOFF]
    return vk @ dagger(vk)


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(np.atleast_2d(a)), as_matrix(np.atleast_2d(b)))


def partial_trace(m, dims: tuple[int, int], keep: str = "first") -> np.ndarray:
    """
    Trace out one factor of a bipartite operator on C^d1 (x) C^d2.

    ``keep`` is ``"first"`` or ``"second"``.
    """
    m = as_matrix(m)
    d1, d2 = dims
    if m.shape != (d1 * d2, d1 * d2):
        raise ValueError(f"matrix of shape {m.shape} does not match dims {dims}")
    t = m.reshape(d1, d2, d1, d2)
    if keep == "first":
        return np.einsum("ajbj->ab", t)
    if keep == "second":
        return np.einsum("iaib->ab", t)
    raise ValueError(f"keep must be 'first' or 'second', got {keep!r}")


def gram_matrix(states) -> np.ndarray:
    """G[j, k] = <psi_j | psi_k>."""
    s = np.array([as_vector(v) for v in states])
    return np.conj(s) @ s.T
