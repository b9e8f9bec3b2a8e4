"""Dense real-symmetric eigendecomposition.

LAPACK (through :func:`numpy.linalg.eigh`) does the work; this module adds
input validation, a reproducible eigenvector sign convention and a residual
check so a bad decomposition is reported instead of returned.
"""

from dataclasses import dataclass

import numpy as np


class EigenSolverError(RuntimeError):
    """Raised when a decomposition fails or does not meet its accuracy bounds."""


RESIDUAL_TOL = 1e-10
ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class EigenDecomposition:
    values: np.ndarray
    vectors: np.ndarray

    def __len__(self):
        return self.values.size


def symmetrize(a):
    """Return ``(A + A.T) / 2`` as a float64 array, so entries match exactly."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return 0.5 * (a + a.T)


def fix_signs(vectors):
    """Make the largest-magnitude entry of each column positive.

    Ties in magnitude go to the lowest row index (``argmax`` semantics).
    Operates in place and returns the array.
    """
    if vectors.size == 0:
        return vectors
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    vectors *= signs
    return vectors


def eigh(a, check=True):
    """Eigendecomposition of a real symmetric matrix.

    Parameters
    ----------
    a : array_like, shape (n, n)
        Symmetric matrix. Only exact symmetry is accepted; use
        :func:`symmetrize` when building from floating-point pieces.
    check : bool
        Verify the residual and orthogonality bounds after solving.

    Returns
    -------
    EigenDecomposition
        Ascending eigenvalues and orthonormal column eigenvectors.

    Raises
    ------
    ValueError
        Non-square, empty, non-symmetric or non-finite input.
    EigenSolverError
        LAPACK did not converge or the result misses the accuracy bounds.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if not np.array_equal(a, a.T):
        raise ValueError("matrix is not exactly symmetric")
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigensolver did not converge: {exc}") from exc
    v = fix_signs(np.ascontiguousarray(v))
    if check:
        _verify(a, w, v)
    return EigenDecomposition(w, v)


def eigvalsh(a):
    """Ascending eigenvalues only (same validation as :func:`eigh`)."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    try:
        return np.linalg.eigvalsh(a)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigensolver did not converge: {exc}") from exc


def _verify(a, w, v):
    scale = max(1.0, float(np.linalg.norm(a)))
    res = np.linalg.norm(a @ v - v * w, axis=0)
    worst = float(res.max())
    if worst > RESIDUAL_TOL * scale:
        raise EigenSolverError(f"eigenpair residual {worst:.3e} exceeds bound")
    ortho = float(np.abs(v.T @ v - np.eye(v.shape[1])).max())
    if ortho > ORTHO_TOL:
        raise EigenSolverError(f"eigenvectors not orthonormal ({ortho:.3e})")
