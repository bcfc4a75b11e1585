"""Total-variability subspace: covariance eigenstructure and i-vectors.

The projection basis holds the top eigenvectors of the supervector
covariance (centered at the UBM supervector). Projecting an utterance
supervector's offset onto that basis, optionally whitened by the
eigenvalues, yields its i-vector.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .adaptation import Supervector
from .errors import (
    DimensionMismatchError,
    RankDeficientError,
    TooFewSupervectorsError,
)

JACOBI_OFF_TOLERANCE = 1e-10
EIGENVALUE_FLOOR_FRACTION = 1e-12


@dataclass(frozen=True)
class TotalVariabilityModel:
    """Mean supervector, orthonormal basis (D, c) and its eigenvalues."""

    mean_supervector: np.ndarray
    basis: np.ndarray
    eigenvalues: np.ndarray
    whiten: bool

    def __post_init__(self):
        m = np.asarray(self.mean_supervector, dtype=np.float64)
        basis = np.asarray(self.basis, dtype=np.float64)
        lam = np.asarray(self.eigenvalues, dtype=np.float64)
        object.__setattr__(self, "mean_supervector", m)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "eigenvalues", lam)
        if basis.ndim != 2 or basis.shape[0] != m.size:
            raise ValueError(
                f"basis shape {basis.shape} inconsistent with supervector "
                f"dimension {m.size}"
            )
        if lam.shape != (basis.shape[1],):
            raise ValueError("one eigenvalue per basis column required")
        if lam.size:
            if np.any(lam <= 0):
                raise ValueError("eigenvalues must be positive")
            if np.any(np.diff(lam) > 0):
                raise ValueError("eigenvalues must be sorted descending")
            gram = basis.T @ basis
            if np.max(np.abs(gram - np.eye(lam.size))) > 1e-8:
                raise ValueError("basis columns are not orthonormal")

    @property
    def supervector_dim(self) -> int:
        return self.mean_supervector.size

    @property
    def ivector_dim(self) -> int:
        return self.basis.shape[1]


def _as_matrix(supervectors) -> np.ndarray:
    rows = [
        sv.values if isinstance(sv, Supervector) else np.asarray(sv, dtype=np.float64)
        for sv in supervectors
    ]
    dims = {r.size for r in rows}
    if len(dims) > 1:
        raise DimensionMismatchError(f"mixed supervector dimensions: {sorted(dims)}")
    return np.array(rows, dtype=np.float64)


def _as_vector(m) -> np.ndarray:
    return m.values if isinstance(m, Supervector) else np.asarray(m, dtype=np.float64)


def build_covariance(supervectors, m) -> np.ndarray:
    """Covariance of the supervectors around m (not the sample mean).

    Entry (i, j) is the mean over utterances of the product of offsets in
    coordinates i and j; the result is exactly symmetric.
    """
    x = _as_matrix(supervectors)
    center = _as_vector(m)
    if x.shape[0] < 2:
        raise TooFewSupervectorsError(
            f"need at least 2 supervectors, got {x.shape[0]}"
        )
    if x.shape[1] != center.size:
        raise DimensionMismatchError(
            f"supervector dimension {x.shape[1]} does not match m's {center.size}"
        )
    offsets = x - center
    cov = offsets.T @ offsets / x.shape[0]
    return (cov + cov.T) / 2.0


def symmetric_eigendecomposition(
    matrix: np.ndarray,
    off_tolerance: float = JACOBI_OFF_TOLERANCE,
    max_sweeps: int = 100,
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps run until the off-diagonal Frobenius mass falls below
    off_tolerance times the matrix's Frobenius norm. Returns eigenvalues
    in descending order and the matching eigenvectors as columns.
    """
    a = np.array(matrix, dtype=np.float64)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise DimensionMismatchError(f"matrix must be square, got {a.shape}")
    if n and np.max(np.abs(a - a.T)) > 1e-8 * max(1.0, np.max(np.abs(a))):
        raise ValueError("matrix is not symmetric")
    a = (a + a.T) / 2.0
    v = np.eye(n)
    total = np.sqrt(np.sum(a * a))
    if n < 2 or total == 0.0:
        return np.diag(a).copy(), v

    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= off_tolerance * total:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(apq) <= 1e-300 + 1e-17 * abs(diff):
                    # rotation angle below rounding resolution
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = diff / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                row_p, row_q = a[p].copy(), a[q].copy()
                a[p] = c * row_p - s * row_q
                a[q] = s * row_p + c * row_q
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                a[p, q] = a[q, p] = 0.0

                vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q

    order = np.argsort(-np.diag(a), kind="stable")
    return np.diag(a)[order].copy(), v[:, order]


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Make each column's largest-magnitude entry positive (reproducible signs)."""
    if vectors.size == 0:
        return vectors
    peak = np.argmax(np.abs(vectors), axis=0)
    flips = np.sign(vectors[peak, np.arange(vectors.shape[1])])
    flips[flips == 0] = 1.0
    return vectors * flips


def fit(
    supervectors,
    m,
    c: int,
    whiten: bool = True,
    strict: bool = False,
) -> TotalVariabilityModel:
    """Build the projection from training supervectors.

    Keeps the top-c eigenpairs of the covariance around m; eigenvalues at
    or below 1e-12 times the largest are rejected, shrinking c with a
    warning (or raising RankDeficientError when strict). Requires
    1 <= c <= min(D, N-1).
    """
    x = _as_matrix(supervectors)
    center = _as_vector(m)
    n, d = x.shape
    if n < 2:
        raise TooFewSupervectorsError(f"need at least 2 supervectors, got {n}")
    if d != center.size:
        raise DimensionMismatchError(
            f"supervector dimension {d} does not match m's {center.size}"
        )
    if not 1 <= c <= min(d, n - 1):
        raise ValueError(
            f"c must be in [1, min(D={d}, N-1={n - 1})], got {c}"
        )

    offsets = x - center
    if d <= n:
        values, vectors = symmetric_eigendecomposition(build_covariance(x, center))
    else:
        # Too many dimensions for a direct decomposition to pay off: the
        # N x N Gram matrix shares the covariance's nonzero spectrum and
        # its eigenvectors map up through the data matrix.
        gram = offsets @ offsets.T / n
        values, dual = symmetric_eigendecomposition((gram + gram.T) / 2.0)
        positive = values > 0
        vectors = offsets.T @ dual[:, positive]
        norms = np.linalg.norm(vectors, axis=0)
        vectors = vectors / np.where(norms > 0, norms, 1.0)
        for j in range(1, vectors.shape[1]):  # one Gram-Schmidt pass for hygiene
            vectors[:, j] -= vectors[:, :j] @ (vectors[:, :j].T @ vectors[:, j])
            norm = np.linalg.norm(vectors[:, j])
            if norm > 0:
                vectors[:, j] /= norm
        values = values[positive]

    if values.size == 0 or values[0] <= 0:
        usable = 0
    else:
        floor = EIGENVALUE_FLOOR_FRACTION * values[0]
        usable = int(np.sum(values > floor))
    kept = min(c, usable)
    if kept < c:
        if strict:
            raise RankDeficientError(
                f"only {usable} eigenvalues above the floor, {c} requested"
            )
        warnings.warn(
            f"i-vector dimension reduced from {c} to {kept}: "
            f"only {usable} eigenvalues above the floor",
            stacklevel=2,
        )

    basis = _fix_signs(vectors[:, :kept])
    return TotalVariabilityModel(center, basis, values[:kept].copy(), whiten)


def extract_ivector(M, model: TotalVariabilityModel) -> np.ndarray:
    """Coordinates of the supervector's offset from m in the basis.

    With whitening on, each coordinate is divided by the square root of
    its eigenvalue so training i-vectors have unit per-component variance.
    """
    vec = _as_vector(M)
    if vec.size != model.supervector_dim:
        raise DimensionMismatchError(
            f"supervector dimension {vec.size} does not match model's "
            f"{model.supervector_dim}"
        )
    omega = model.basis.T @ (vec - model.mean_supervector)
    if model.whiten:
        omega = omega / np.sqrt(model.eigenvalues)
    return omega


def reconstruct_supervector(model: TotalVariabilityModel, omega: np.ndarray) -> np.ndarray:
    """Map an i-vector back to supervector space (inverse of extract_ivector
    up to the discarded complement)."""
    omega = np.asarray(omega, dtype=np.float64)
    if omega.shape != (model.ivector_dim,):
        raise DimensionMismatchError(
            f"i-vector shape {omega.shape} does not match model dimension "
            f"{model.ivector_dim}"
        )
    if model.whiten:
        omega = omega * np.sqrt(model.eigenvalues)
    return model.mean_supervector + model.basis @ omega
