"""Dense real linear algebra: SVD, Moore-Penrose pseudo-inverse, least squares.

Matrices are plain 2-D ``float64`` numpy arrays and vectors are 1-D arrays.
Datasets are stored sample-per-row (N x D); a projection ``y = P x`` of every
row is therefore computed as ``X @ P.T``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ShapeError

# Entries below this (on a unit-norm column) count as zero for the sign rule.
_SIGN_EPS = 1e-12


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate ``a`` as a finite, non-empty 2-D float64 array."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {m.shape}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError(f"{name} must have at least one row and column, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericalError(f"{name} of shape {m.shape} has non-finite entries")
    return m


def as_vector(x, name: str = "vector") -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise NumericalError(f"{name} has non-finite entries")
    return v


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD ``a = u @ diag(singular_values) @ vt`` with r = min(m, n)."""

    u: np.ndarray
    singular_values: np.ndarray
    vt: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.singular_values) @ self.vt


def svd(a) -> SvdResult:
    """Thin singular value decomposition with a fixed sign convention.

    Backed by LAPACK (``numpy.linalg.svd``). Each column of ``u`` is flipped so
    that its first entry with magnitude above 1e-12 is positive, and the
    matching row of ``vt`` is flipped with it.
    """
    a = as_matrix(a)
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge for matrix of shape {a.shape}") from exc
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(s)) and np.all(np.isfinite(vt))):
        raise NumericalError(f"SVD produced non-finite factors for matrix of shape {a.shape}")

    significant = np.abs(u) > _SIGN_EPS
    first = np.argmax(significant, axis=0)
    lead = u[first, np.arange(u.shape[1])]
    signs = np.where(lead < 0, -1.0, 1.0)
    u = u * signs
    vt = vt * signs[:, None]
    return SvdResult(u=u, singular_values=s, vt=vt)


def default_rank_tol(shape: tuple[int, int], s_max: float) -> float:
    return max(shape) * np.finfo(np.float64).eps * s_max


def numerical_rank(a, rank_tol: float | None = None) -> int:
    a = as_matrix(a)
    s = svd(a).singular_values
    tol = default_rank_tol(a.shape, s[0]) if rank_tol is None else rank_tol
    return int(np.sum(s > tol))


def pseudo_inverse(a, rank_tol: float | None = None) -> np.ndarray:
    """Moore-Penrose pseudo-inverse ``V diag(1/s_i) U^T`` over ``s_i > rank_tol``.

    ``rank_tol`` defaults to ``max(m, n) * eps * s_max``.
    """
    a = as_matrix(a)
    if rank_tol is not None and rank_tol < 0:
        raise ValueError("rank_tol must be non-negative")
    res = svd(a)
    s = res.singular_values
    tol = default_rank_tol(a.shape, s[0]) if rank_tol is None else rank_tol
    keep = s > tol
    inv_s = np.zeros_like(s)
    inv_s[keep] = 1.0 / s[keep]
    return (res.vt.T * inv_s) @ res.u.T


def solve_least_squares(a, b, rank_tol: float | None = None) -> np.ndarray:
    """Minimum-Frobenius-norm minimizer of ``||a @ x - b||_F``, as ``pinv(a) @ b``.

    ``b`` may be a matrix (n x q) or a vector (n,); the result has the
    matching rank.
    """
    a = as_matrix(a, "a")
    b_arr = np.asarray(b, dtype=np.float64)
    vector_rhs = b_arr.ndim == 1
    b_mat = as_matrix(b_arr[:, None] if vector_rhs else b_arr, "b")
    if b_mat.shape[0] != a.shape[0]:
        raise ShapeError(f"row mismatch: a is {a.shape}, b is {b_mat.shape}")
    x = pseudo_inverse(a, rank_tol) @ b_mat
    return x[:, 0] if vector_rhs else x


def matmul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply shapes {a.shape} and {b.shape}")
    return a @ b
