"""Dense symmetric linear algebra: congruence diagonalization to a +/-1 diagonal.

Given a nonsingular symmetric matrix A, find an invertible M with
M.T @ A @ M equal to the inertia matrix diag(+1 x ell, -1 x (n - ell)).
The count ell of positive directions defines the congruence-invariant
signature 2*ell - n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotSymmetric, SingularMatrix

# Relative determinant threshold below which a matrix is treated as singular.
SINGULARITY_REL_TOL = 1e-12
MAX_DIM = 32


def inertia_matrix(ell: int, n: int) -> np.ndarray:
    """diag(+1 repeated ell times, -1 repeated n - ell times)."""
    d = np.ones(n)
    d[ell:] = -1.0
    return np.diag(d)


def inertia_vector(ell: int, n: int) -> np.ndarray:
    e = np.ones(n)
    e[ell:] = -1.0
    return e


@dataclass(frozen=True, eq=False)
class Diagonalization:
    """Result of diagonalizing a symmetric matrix by congruence.

    ``matrix`` is M with M.T @ A @ M = inertia_matrix(ell, n).  The positive
    directions occupy the first ``ell`` columns.
    """

    matrix: np.ndarray
    ell: int
    n: int

    @property
    def signature(self) -> int:
        return 2 * self.ell - self.n

    def inertia(self) -> np.ndarray:
        return inertia_matrix(self.ell, self.n)

    def reduction_transform(self) -> np.ndarray:
        """The change-of-variables matrix W with W @ A @ W.T = inertia.

        Substituting y = W x turns the quadratic form of A into the inertia
        form, so solution spaces transform through W rather than M itself.
        """
        return np.ascontiguousarray(self.matrix.T)


def _as_square(a) -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    n = m.shape[0]
    if n < 2:
        raise ValueError("matrix dimension must be at least 2")
    if n > MAX_DIM:
        raise ValueError(f"matrix dimension {n} exceeds supported maximum {MAX_DIM}")
    return m


def _check_symmetric(m: np.ndarray) -> None:
    if not np.array_equal(m, m.T):
        raise NotSymmetric("matrix entries are not exactly symmetric")


def _jacobi_eigh(a: np.ndarray, max_sweeps: int = 50) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigendecomposition for small symmetric matrices.

    Returns (eigenvalues, eigenvectors) with columns of V satisfying
    A @ V[:, i] = w[i] * V[:, i].  The sweep order is fixed, so the result
    is bitwise reproducible for identical inputs.
    """
    n = a.shape[0]
    w = a.copy()
    v = np.eye(n)
    scale = np.max(np.abs(a))
    if scale == 0.0:
        return np.zeros(n), v
    stop = 1e-16 * scale
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            row = np.abs(w[p, p + 1 :])
            m = row.max()
            if m > off:
                off = m
        if off <= stop:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = w[p, q]
                if abs(apq) <= stop:
                    continue
                theta = (w[q, q] - w[p, p]) / (2.0 * apq)
                sign = 1.0 if theta >= 0.0 else -1.0
                t = sign / (abs(theta) + np.sqrt(1.0 + theta * theta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rp = w[:, p].copy()
                rq = w[:, q].copy()
                w[:, p] = c * rp - s * rq
                w[:, q] = s * rp + c * rq
                rp = w[p, :].copy()
                rq = w[q, :].copy()
                w[p, :] = c * rp - s * rq
                w[q, :] = s * rp + c * rq
                # keep symmetry exact where round-off matters
                w[p, q] = 0.0
                w[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(w).copy(), v


def _normalize_column_signs(m: np.ndarray) -> np.ndarray:
    out = m.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        nz = np.nonzero(np.abs(col) > 1e-12 * max(1.0, np.max(np.abs(col))))[0]
        if nz.size and col[nz[0]] < 0.0:
            out[:, j] = -col
    return out


def diagonalize(a) -> Diagonalization:
    """Congruence-diagonalize a nonsingular symmetric matrix.

    Eigenpairs are ordered positive-first, then by decreasing magnitude;
    each eigenvector is scaled by 1/sqrt(|eigenvalue|) and its sign fixed so
    the first nonzero entry is positive.  This pins M uniquely.

    Raises NotSymmetric or SingularMatrix.
    """
    m = _as_square(a)
    _check_symmetric(m)
    n = m.shape[0]
    eigvals, eigvecs = _jacobi_eigh(m)
    scale = np.max(np.abs(m))
    det = float(np.prod(eigvals))
    if scale == 0.0 or abs(det) <= SINGULARITY_REL_TOL * scale**n:
        raise SingularMatrix(
            f"|det| = {abs(det):.3e} below threshold {SINGULARITY_REL_TOL:.0e} * scale^n"
        )
    # positive eigenvalues first, each group sorted by |eigenvalue| descending
    order = sorted(range(n), key=lambda i: (eigvals[i] <= 0.0, -abs(eigvals[i])))
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    ell = int(np.sum(eigvals > 0.0))
    cols = eigvecs / np.sqrt(np.abs(eigvals))[None, :]
    return Diagonalization(matrix=_normalize_column_signs(cols), ell=ell, n=n)


def signature(a) -> int:
    """Signature 2*ell - n of a nonsingular symmetric matrix."""
    return diagonalize(a).signature
