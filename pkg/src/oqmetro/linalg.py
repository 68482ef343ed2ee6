"""Small dense Hermitian-matrix kernel.

Everything downstream (effects, quasiprobability measures, probe
projectors) lives in dimension 2 or 3, so this is a thin, tolerance-aware
wrapper around ``numpy.linalg.eigh`` rather than a general linear-algebra
layer.
"""

from __future__ import annotations

import numpy as np

from .errors import NotHermitian, NotPsd

HERMITIAN_TOL = 1e-10
# Eigenvalues in [-EIG_CLAMP, 0) are float noise and treated as 0;
# anything below -EIG_CLAMP counts as genuine negativity.
EIG_CLAMP = 1e-10


def as_matrix(m) -> np.ndarray:
    """Coerce to a square complex ndarray."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    """True iff max |m - m^dagger| entrywise <= tol."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    a = as_matrix(m)
    return float(np.max(np.abs(a - a.conj().T))) <= tol


def hermitian_eigensystem(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvector columns.

    Raises NotHermitian if the input fails the Hermiticity check.
    """
    a = as_matrix(m)
    if not is_hermitian(a, HERMITIAN_TOL):
        raise NotHermitian("matrix is not Hermitian to tolerance 1e-10")
    vals, vecs = np.linalg.eigh(a)
    return vals, vecs


def is_psd(m, tol: float = HERMITIAN_TOL) -> bool:
    """True iff the minimum eigenvalue is >= -tol. Requires Hermitian input."""
    a = as_matrix(m)
    if not is_hermitian(a, max(tol, HERMITIAN_TOL)):
        raise NotHermitian("matrix is not Hermitian to tolerance")
    vals = np.linalg.eigvalsh(a)
    return float(vals[0]) >= -tol


def psd_sqrt(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Principal square root of a PSD matrix.

    Eigenvalues in [-tol, 0) are clamped to 0 before taking the root.
    """
    a = as_matrix(m)
    if not is_psd(a, tol):
        raise NotPsd("matrix is not positive semidefinite to tolerance")
    vals, vecs = np.linalg.eigh(a)
    vals = np.where(vals < 0.0, 0.0, vals)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T
