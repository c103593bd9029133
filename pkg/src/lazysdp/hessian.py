"""Maintenance of ``G = (A (S_tilde^{-1} kron S_tilde^{-1}) A^T)^{-1}``.

A rank-``r`` change of ``S_tilde^{-1}`` turns the Kronecker square into
``S_tilde^{-1} kron S_tilde^{-1} + Y1 Y2^T`` with ``Y1, Y2`` of width
``2 n r + r^2``, so ``G`` can be refreshed by Woodbury in the ``m x m`` space.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import linalg
from .errors import NumericError, RankDeficient

HESSIAN_COND_LIMIT = 1e12
CROSS_CHECK_RTOL = 1e-9


@dataclass
class HessianInverseState:
    G: np.ndarray
    A_stacked: np.ndarray
    last_rank: int = 0
    fallbacks: int = 0
    flops: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.G.shape[0]


def gram_kron(A_stacked: np.ndarray, S_inv: np.ndarray) -> np.ndarray:
    """``A (S_inv kron S_inv) A^T`` with the Kronecker factor materialized."""
    K = linalg.kron(S_inv, S_inv)
    return linalg.symmetrize(A_stacked @ K @ A_stacked.T)


def gram_trace(A_stacked: np.ndarray, S_inv: np.ndarray) -> np.ndarray:
    """``H_jk = tr(S_inv A_j S_inv A_k)`` evaluated as traces of products."""
    m = A_stacked.shape[0]
    n = S_inv.shape[0]
    mats = A_stacked.reshape(m, n, n).transpose(0, 2, 1)
    W = np.matmul(S_inv, mats)
    # tr(W_j W_k) = <W_j, W_k^T>
    return linalg.symmetrize(W.reshape(m, -1) @ W.transpose(0, 2, 1).reshape(m, -1).T)


def _invert_gram(H: np.ndarray) -> np.ndarray:
    try:
        c, low = sla.cho_factor(H, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        raise RankDeficient("Hessian Gram matrix is numerically singular; constraints may be redundant") from None
    # squared pivot ratio bounds 1/cond(H); refuse beyond about 1e14
    d = np.abs(np.diag(c))
    if d.size and d.min() <= 1e-7 * d.max():
        raise RankDeficient("Hessian Gram matrix is numerically singular; constraints may be redundant")
    return linalg.symmetrize(sla.cho_solve((c, low), np.eye(H.shape[0]), check_finite=False))


def init_inverse(A_stacked: np.ndarray, S_tilde_inv: np.ndarray) -> HessianInverseState:
    H = gram_kron(A_stacked, S_tilde_inv)
    return HessianInverseState(_invert_gram(H), A_stacked)


def build_Y_factors(S_tilde_inv_sqrt: np.ndarray, V3: np.ndarray, V4: np.ndarray):
    """``Y1 = [R kron V3, V3 kron R, V3 kron V3]`` and likewise ``Y2`` with ``V4``.

    ``R`` is the inverse square root of the approximate slack *before* the update.
    """
    n, r = V3.shape
    if r == 0:
        empty = np.zeros((n * n, 0))
        return empty, empty.copy()
    R = S_tilde_inv_sqrt
    Y1 = np.hstack([linalg.kron(R, V3), linalg.kron(V3, R), linalg.kron(V3, V3)])
    Y2 = np.hstack([linalg.kron(R, V4), linalg.kron(V4, R), linalg.kron(V4, V4)])
    return Y1, Y2


def update_inverse(
    state: HessianInverseState, Y1: np.ndarray, Y2: np.ndarray, cond_limit: float = HESSIAN_COND_LIMIT
) -> HessianInverseState:
    """Woodbury step ``G <- G - G P (I + Q^T G P)^{-1} Q^T G`` with ``P = A Y1``, ``Q = A Y2``.

    When ``k > m`` the pair is first compressed to width ``m`` through a thin QR
    of ``P^T = Q_r R_r``: ``P Q^T = R_r^T (Q Q_r)^T``. This keeps the inner system
    ``m x m`` without the accuracy loss of the plain push-through form, which
    drops about three digits once the Hessian condition number reaches ``1e7``.

    Raises :class:`SingularUpdate` if the inner system's condition estimate
    exceeds ``cond_limit``; the caller decides whether to re-initialize.
    """
    k = width = Y1.shape[1]
    if k == 0:
        return HessianInverseState(state.G, state.A_stacked, 0, state.fallbacks, {})
    A = state.A_stacked
    m, n2 = A.shape
    P = A @ Y1
    Q = A @ Y2
    if k > m:
        Q_r, R_r = np.linalg.qr(P.T)
        P, Q = R_r.T, Q @ Q_r
        k = m
    GP = state.G @ P
    QG = Q.T @ state.G
    corr, _ = linalg.lu_solve_checked(np.eye(k) + QG @ P, QG, cond_limit)
    G_new = linalg.symmetrize(state.G - GP @ corr)
    flops = {"hessian_woodbury": 2 * m * n2 * width + 3 * m * m * k + k * k * m + k**3}
    return HessianInverseState(G_new, A, width, state.fallbacks, flops)


def hessian_exact(A_stacked: np.ndarray, S: np.ndarray, rtol: float = CROSS_CHECK_RTOL) -> np.ndarray:
    """Exact Hessian ``H_jk = tr(S^{-1} A_j S^{-1} A_k)``, cross-checked by the Kronecker route."""
    S_inv = linalg.spd_inverse(S, "slack")
    H_trace = gram_trace(A_stacked, S_inv)
    H_kron = gram_kron(A_stacked, S_inv)
    scale = max(np.linalg.norm(H_trace), 1e-300)
    if np.linalg.norm(H_trace - H_kron) > rtol * scale:
        raise NumericError(
            f"Hessian routes disagree: rel. diff {np.linalg.norm(H_trace - H_kron) / scale:.2e}"
        )
    return H_trace


def fidelity(G: np.ndarray, A_stacked: np.ndarray, S_tilde: np.ndarray) -> float:
    """``||G H_tilde - I||_F`` with ``H_tilde`` rebuilt from ``S_tilde`` directly."""
    S_inv = linalg.lu_inverse(S_tilde)  # independent of the Cholesky/eigen paths used elsewhere
    E = G @ gram_trace(A_stacked, S_inv)
    E.flat[:: E.shape[0] + 1] -= 1.0
    return float(np.sqrt(np.einsum("ij,ij->", E, E)))

