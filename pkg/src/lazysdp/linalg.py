"""Dense symmetric-matrix kernels: vec/Kronecker helpers, spectral functions, Woodbury.

Matrices are plain ``numpy`` arrays. ``vec`` stacks columns (Fortran order), so
``vec(M)[j * rows + i] == M[i, j]`` with zero-based indices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .errors import EigenFailure, NotPositiveDefinite, SingularUpdate

SYM_RTOL = 1e-12
WOODBURY_COND_LIMIT = 1e14


@dataclass(frozen=True)
class SpectralDecomp:
    """``M = U @ diag(lam) @ U.T`` with orthogonal ``U``."""

    U: np.ndarray
    lam: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.lam) @ self.U.T

    def apply(self, f) -> np.ndarray:
        """Spectral function ``U diag(f(lam)) U^T``."""
        return symmetrize((self.U * f(self.lam)) @ self.U.T)


def vec(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2:
        raise ValueError(f"vec expects a 2-D array, got shape {M.shape}")
    return M.reshape(-1, order="F")


def unvec(v: np.ndarray, rows: int, cols: int | None = None) -> np.ndarray:
    cols = rows if cols is None else cols
    return np.asarray(v).reshape(rows, cols, order="F")


def kron(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Kronecker product; block ``(i, j)`` of the result is ``A[i, j] * B``."""
    A = np.atleast_2d(A)
    B = np.atleast_2d(B)
    (ra, ca), (rb, cb) = A.shape, B.shape
    return (A[:, None, :, None] * B[None, :, None, :]).reshape(ra * rb, ca * cb)


def symmetrize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def symmetry_defect(M: np.ndarray) -> float:
    """Largest ``|M_ij - M_ji|`` relative to ``max(1, ||M||_F)``."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(M - M.T)) / max(1.0, np.linalg.norm(M)))


def is_symmetric(M: np.ndarray, rtol: float = SYM_RTOL) -> bool:
    M = np.asarray(M)
    return M.ndim == 2 and M.shape[0] == M.shape[1] and symmetry_defect(M) <= rtol


def sym_eig(M: np.ndarray) -> SpectralDecomp:
    """Eigendecomposition of a real symmetric matrix (LAPACK ``syevd``).

    Eigenvalues come back ascending, but callers should not rely on the order.
    """
    M = np.asarray(M, dtype=float)
    if M.size and not np.isfinite(M).all():
        raise EigenFailure("matrix has non-finite entries", float("inf"), float("inf"))
    lam, U, info = lapack.dsyevd(M, compute_v=1, lower=1)
    if info != 0:
        fro = float(np.linalg.norm(M))
        try:
            cond = float(np.linalg.cond(M))
        except np.linalg.LinAlgError:
            cond = float("inf")
        raise EigenFailure(f"eigen-iteration failed to converge (info={info})", fro, cond)
    return SpectralDecomp(U, lam)


def eigvalsh(M: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(np.asarray(M, dtype=float))


def pd_decomp(M: np.ndarray, what: str = "matrix") -> SpectralDecomp:
    """Eigendecomposition of the symmetric part of ``M``; raises unless it is positive definite."""
    dec = sym_eig(symmetrize(np.asarray(M, dtype=float)))
    lam_min = float(dec.lam.min()) if dec.lam.size else 1.0
    if not lam_min > 0.0:
        raise NotPositiveDefinite(lam_min, what)
    return dec


def psd_sqrt(M: np.ndarray) -> np.ndarray:
    return pd_decomp(M, "psd_sqrt argument").apply(np.sqrt)


def psd_inv_sqrt(M: np.ndarray) -> np.ndarray:
    return pd_decomp(M, "psd_inv_sqrt argument").apply(lambda lam: 1.0 / np.sqrt(lam))


def psd_sqrt_pair(M: np.ndarray, what: str = "matrix") -> tuple[np.ndarray, np.ndarray]:
    """``(M^{1/2}, M^{-1/2})`` from a single eigendecomposition."""
    dec = pd_decomp(M, what)
    root = np.sqrt(dec.lam)
    return dec.apply(lambda _: root), dec.apply(lambda _: 1.0 / root)


def spd_inverse(M: np.ndarray, what: str = "matrix") -> np.ndarray:
    """Inverse of a symmetric positive definite matrix via Cholesky (LAPACK ``potrf``/``potri``)."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return M.copy()
    c, info = lapack.dpotrf(M, lower=1)
    if info != 0:
        raise NotPositiveDefinite(float(eigvalsh(symmetrize(M)).min()), what)
    inv, info = lapack.dpotri(c, lower=1)
    if info != 0:
        raise NotPositiveDefinite(0.0, what)
    low = np.tril(inv)
    return low + np.tril(inv, -1).T


def lu_inverse(M: np.ndarray) -> np.ndarray:
    """General inverse via partial-pivot LU (LAPACK ``getrf``/``getri``)."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return M.copy()
    lu, piv, info = lapack.dgetrf(M)
    if info > 0:
        raise np.linalg.LinAlgError("singular matrix")
    inv, info = lapack.dgetri(lu, piv)
    if info != 0:
        raise np.linalg.LinAlgError("singular matrix")
    return inv


def lu_solve_checked(M: np.ndarray, rhs: np.ndarray, cond_limit: float = WOODBURY_COND_LIMIT):
    """Solve ``M X = rhs`` with partial-pivot LU; refuse if ``cond_1(M) > cond_limit``.

    Returns ``(X, cond_estimate)``.
    """
    M = np.asarray(M, dtype=float)
    k = M.shape[0]
    if k == 0:
        return np.zeros_like(rhs, dtype=float), 1.0
    if not np.all(np.isfinite(M)):
        raise SingularUpdate(float("inf"), k)
    anorm = float(np.max(np.sum(np.abs(M), axis=0)))
    lu, piv, info = lapack.dgetrf(M)
    if info > 0 or anorm == 0.0:
        raise SingularUpdate(float("inf"), k)
    rcond, _ = lapack.dgecon(lu, anorm, norm="1")
    cond = float("inf") if rcond == 0.0 else 1.0 / rcond
    if cond > cond_limit:
        raise SingularUpdate(cond, k)
    X, info = lapack.dgetrs(lu, piv, np.asarray(rhs, dtype=float))
    return X, cond


def woodbury_update(
    Minv: np.ndarray,
    U: np.ndarray,
    Cmat: np.ndarray,
    V: np.ndarray,
    cond_limit: float = WOODBURY_COND_LIMIT,
) -> np.ndarray:
    """Return ``(M + U C V)^{-1}`` given ``Minv = M^{-1}``.

    Uses ``Minv - Minv U (C^{-1} + V Minv U)^{-1} V Minv``. Raises
    :class:`SingularUpdate` when either ``C`` or the inner ``k x k`` system has a
    condition estimate above ``cond_limit``.
    """
    Minv = np.asarray(Minv, dtype=float)
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    Cmat = np.atleast_2d(np.asarray(Cmat, dtype=float))
    k = Cmat.shape[0]
    if k == 0 or not np.any(U) or not np.any(V):
        return Minv.copy()
    Cinv, _ = lu_solve_checked(Cmat, np.eye(k), cond_limit)
    MU = Minv @ U
    VM = V @ Minv
    inner = Cinv + V @ MU
    corr, _ = lu_solve_checked(inner, VM, cond_limit)
    return Minv - MU @ corr


def trace_product(S_inv: np.ndarray, A: np.ndarray) -> float:
    """``sum_ij S_inv[i, j] * A[i, j]``, i.e. ``tr(S_inv A)`` for symmetric inputs."""
    S_inv = np.asarray(S_inv, dtype=float)
    A = np.asarray(A, dtype=float)
    if S_inv.shape != A.shape:
        raise ValueError(f"shape mismatch {S_inv.shape} vs {A.shape}")
    return float(np.vdot(S_inv, A))


def spectral_norm_sym(M: np.ndarray) -> float:
    lam = eigvalsh(symmetrize(M))
    return float(np.max(np.abs(lam))) if lam.size else 0.0
