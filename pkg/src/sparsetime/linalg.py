"""Dense linear-algebra kernel.

Matrices are plain float64 ``numpy`` arrays; this module only adds shape and
finiteness checks plus a deterministic truncated SVD on top of LAPACK.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import NumericalError, ShapeError, SvdConvergenceError

Matrix = NDArray[np.float64]

SVD_MAX_SWEEPS = 1000
SVD_TOLERANCE = 1e-12


def as_matrix(x: ArrayLike, *, name: str = "matrix") -> Matrix:
    """转换为二维 float64 矩阵，并校验有限性。"""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"{name} contains NaN or Inf")
    return arr


@dataclass(frozen=True)
class TruncatedSvd:
    u: Matrix
    sigma: NDArray[np.float64]
    v: Matrix

    @property
    def k(self) -> int:
        return int(self.sigma.shape[0])

    def reconstruct(self) -> Matrix:
        return (self.u * self.sigma) @ self.v.T


def matmul(a: ArrayLike, b: ArrayLike) -> Matrix:
    left = as_matrix(a, name="a")
    right = as_matrix(b, name="b")
    if left.shape[1] != right.shape[0]:
        raise ShapeError(f"matmul dimension mismatch: {left.shape} x {right.shape}")
    return left @ right


def frobenius_norm(x: ArrayLike) -> float:
    arr = np.asarray(x, dtype=np.float64)
    return float(np.sqrt(np.sum(arr * arr)))


def truncated_svd(x: ArrayLike, k: int) -> TruncatedSvd:
    """Leading ``k`` singular triplets of ``x``.

    Each left singular vector is flipped so that its largest-magnitude entry is
    nonnegative (the matching right vector flips with it), which makes the
    factorization deterministic.
    """
    mat = as_matrix(x, name="x")
    rows, cols = mat.shape
    if not 1 <= k <= min(rows, cols):
        raise ShapeError(f"rank k={k} out of range [1, {min(rows, cols)}] for shape {mat.shape}")
    try:
        u, sigma, vt = np.linalg.svd(mat, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SvdConvergenceError(
            f"SVD did not converge within {SVD_MAX_SWEEPS} sweeps (tol={SVD_TOLERANCE:g}) for shape {mat.shape}"
        ) from exc

    u_k = u[:, :k].copy()
    v_k = vt[:k, :].T.copy()
    pivots = np.argmax(np.abs(u_k), axis=0)
    signs = np.where(u_k[pivots, np.arange(k)] < 0, -1.0, 1.0)
    u_k *= signs
    v_k *= signs
    # LAPACK 可能返回 -0.0 或极小负值
    sigma_k = np.maximum(sigma[:k], 0.0)
    return TruncatedSvd(u=u_k, sigma=sigma_k, v=v_k)
