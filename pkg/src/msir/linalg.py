"""Dense symmetric linear algebra used throughout the package.

Factorizations are delegated to LAPACK (via numpy/scipy), with a
deterministic eigenvector sign convention layered on top so that fitted
models and serialized files are reproducible run to run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import MsirError

# Relative eigenvalue floor below which a nominally SPD matrix is rejected.
SPD_EIG_FLOOR = 1e-12


def _as_matrix(m) -> np.ndarray:
    """Accept a raw array or any object carrying a ``.matrix`` attribute."""
    m = getattr(m, "matrix", m)
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise MsirError(f"expected a square matrix, got shape {a.shape}")
    return a


def _check_symmetric(a: np.ndarray, name: str = "matrix", tol: float = 1e-8) -> None:
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
    dev = float(np.max(np.abs(a - a.T), initial=0.0))
    if dev > tol * scale:
        raise MsirError(f"{name} is not symmetric: max |A - A^T| = {dev:.3e}")


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry (lowest index on ties)
    is positive."""
    lead = np.argmax(np.abs(vectors), axis=0)
    flip = vectors[lead, np.arange(vectors.shape[1])] < 0.0
    out = vectors.copy()
    out[:, flip] *= -1.0
    return out


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenpairs of a symmetric matrix, eigenvalues nonincreasing.

    Column ``j`` of ``eigenvectors`` pairs with ``eigenvalues[j]``; each
    column is unit norm with its largest-magnitude entry positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def sym_eigendecomposition(a) -> EigenDecomposition:
    """Full eigendecomposition of a symmetric matrix.

    Parameters
    ----------
    a : (n, n) array_like
        Symmetric matrix (checked to 1e-8, relative for large entries).

    Returns
    -------
    EigenDecomposition
        Eigenvalues sorted nonincreasing, orthonormal eigenvector columns
        with the deterministic sign convention applied.
    """
    a = _as_matrix(a)
    _check_symmetric(a, name="input")
    sym = (a + a.T) / 2.0
    try:
        w, v = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise MsirError(f"symmetric eigensolver failed to converge: {exc}") from exc
    order = np.argsort(w)[::-1]
    return EigenDecomposition(w[order], _fix_signs(v[:, order]))


def ridge_inverse_apply(g, tau: float, b) -> np.ndarray:
    """Solve (G + tau*I) X = B symmetrically via Cholesky.

    The ridged matrix is factored rather than inverted; ``b`` may be a
    vector or a matrix of right-hand sides.
    """
    g = _as_matrix(g)
    if not np.isfinite(tau) or tau <= 0.0:
        raise MsirError(f"ridge parameter must be positive, got {tau!r}")
    b = np.asarray(b, dtype=float)
    if b.shape[0] != g.shape[0]:
        raise MsirError(f"right-hand side has {b.shape[0]} rows, expected {g.shape[0]}")
    ridged = g + tau * np.eye(g.shape[0])
    try:
        factor = scipy.linalg.cho_factor(ridged, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise MsirError(f"G + tau*I is not positive definite (tau={tau!r}): {exc}") from exc
    return scipy.linalg.cho_solve(factor, b, check_finite=False)


def _spd_eigh(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of an SPD matrix with the relative eigenvalue floor
    enforced; ascending eigenvalues."""
    a = _as_matrix(m)
    w, v = np.linalg.eigh((a + a.T) / 2.0)
    largest = w[-1]
    if largest <= 0.0 or w[0] <= SPD_EIG_FLOOR * largest:
        raise MsirError(
            f"matrix is not positive definite: eigenvalue {w[0]:.3e} "
            f"below floor {SPD_EIG_FLOOR:.0e} * {largest:.3e}"
        )
    return w, v


def spd_matrix_log(m) -> np.ndarray:
    """Matrix logarithm of an SPD matrix via its eigendecomposition."""
    w, v = _spd_eigh(m)
    out = (v * np.log(w)) @ v.T
    return (out + out.T) / 2.0


def spd_power(m, exponent: float) -> np.ndarray:
    """Real matrix power ``M^exponent`` of an SPD matrix (e.g. -0.5, -1)."""
    w, v = _spd_eigh(m)
    out = (v * w**exponent) @ v.T
    return (out + out.T) / 2.0


def logdet_spd(m) -> float:
    """log-determinant of an SPD matrix, 2 * sum(log diag(Cholesky))."""
    a = _as_matrix(m)
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise MsirError(f"matrix is not positive definite (Cholesky failed): {exc}") from exc
    return float(2.0 * np.sum(np.log(np.diag(chol))))
