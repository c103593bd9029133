"""Approximate slack maintenance by eigenvalue-thresholded low-rank corrections.

The approximate slack ``S_tilde`` is only touched when it drifts away from the
exact slack in the ``S_new^{-1/2} (.) S_new^{-1/2}`` metric. Each correction is
``S_tilde += V1 @ V2.T`` and its inverse is refreshed with a rank-``r_t`` Woodbury step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import linalg
from .errors import NotPositiveDefinite, SingularUpdate

EPS_S = 0.01
ALPHA_S = 1.011


def log_factor(n: int) -> float:
    """Natural log of ``n`` floored at 2, shared by the update rule and the potential checks."""
    return max(math.log(n), 2.0) if n > 0 else 2.0


@dataclass
class ApproxSlackState:
    S_tilde: np.ndarray
    S_tilde_inv: np.ndarray
    S_tilde_inv_sqrt: np.ndarray
    eps_S: float = EPS_S

    @classmethod
    def from_slack(cls, S: np.ndarray, eps_S: float = EPS_S) -> "ApproxSlackState":
        S = linalg.symmetrize(np.asarray(S, dtype=float))
        dec = linalg.sym_eig(S)
        if dec.lam.min() <= 0:
            raise NotPositiveDefinite(dec.lam.min(), "initial slack")
        return cls(S.copy(), dec.apply(lambda lam: 1.0 / lam), dec.apply(lambda lam: lam**-0.5), eps_S)

    @property
    def n(self) -> int:
        return self.S_tilde.shape[0]


@dataclass
class LowRankUpdate:
    """Factors of ``S_tilde_new - S_tilde = V1 @ V2.T``.

    ``U``, ``lambda_mid`` and ``lambda_new`` are kept for diagnostics. The
    eigenpairs of ``S_new`` are kept too, so ``S_new_sqrt`` and ``S_new_inv_sqrt``
    are formed only when someone asks for them.
    """

    V1: np.ndarray
    V2: np.ndarray
    lambda_mid: np.ndarray
    lambda_new: np.ndarray
    U: np.ndarray
    S_new_eigvecs: np.ndarray
    S_new_root: np.ndarray
    S_new_inv: np.ndarray
    r: int = 0

    @property
    def rank(self) -> int:
        return self.V1.shape[1]

    @cached_property
    def S_new_sqrt(self) -> np.ndarray:
        Q = self.S_new_eigvecs
        return linalg.symmetrize((Q * self.S_new_root) @ Q.T)

    @cached_property
    def S_new_inv_sqrt(self) -> np.ndarray:
        Q = self.S_new_eigvecs
        return linalg.symmetrize((Q / self.S_new_root) @ Q.T)


@dataclass
class SlackStep:
    """Outcome of :func:`apply_update`: the new state plus the inverse-update factors."""

    state: ApproxSlackState
    V3: np.ndarray
    V4: np.ndarray
    fallback: bool = False
    cond: float = 1.0
    flops: dict = field(default_factory=dict)
    woodbury_inv: np.ndarray | None = None


def sorted_by_magnitude(lam: np.ndarray) -> np.ndarray:
    """Permutation sorting ``|lam|`` descending; ties keep ascending original index."""
    return np.argsort(-np.abs(lam), kind="stable")


def select_rank(abs_sorted: np.ndarray, eps_S: float = EPS_S) -> int:
    """Run the doubling loop on magnitudes already sorted descending; returns ``r``.

    Returns 0 when no update is needed. Zero-based: ``abs_sorted[k - 1]`` is the
    ``k``-th largest magnitude.
    """
    n = abs_sorted.shape[0]
    if n == 0 or abs_sorted[0] <= eps_S:
        return 0
    shrink = 1.0 - 1.0 / log_factor(n)
    r = 1
    while r <= n / 2 and (
        abs_sorted[2 * r - 1] > eps_S or abs_sorted[2 * r - 1] > shrink * abs_sorted[r - 1]
    ):
        r += 1
    return r


def low_rank_slack_update(S_new: np.ndarray, state: ApproxSlackState) -> LowRankUpdate:
    n = state.n
    # one decomposition S_new = Q diag(root^2) Q^T serves as the cone test, gives
    # S_new^{-1}, and lets Z_mid be diagonalized in the Q basis:
    # Z_mid = Q (B^T S_tilde B - I) Q^T with B = Q diag(1/root)
    dec = linalg.pd_decomp(S_new, "new slack")
    Q, root = dec.U, np.sqrt(dec.lam)
    S_inv = linalg.symmetrize((Q / dec.lam) @ Q.T)
    B = Q / root
    K = B.T @ state.S_tilde @ B
    K = 0.5 * (K + K.T)
    K.flat[:: n + 1] -= 1.0
    dec = linalg.sym_eig(K)
    lam, U = dec.lam, Q @ dec.U
    pi = sorted_by_magnitude(lam)
    r = select_rank(np.abs(lam[pi]), state.eps_S)
    lam_new = lam.copy()
    if r == 0:
        empty = np.zeros((n, 0))
        return LowRankUpdate(empty, empty.copy(), lam, lam_new, U, Q, root, S_inv, 0)
    lam_new[pi[: min(2 * r, n)]] = 0.0
    diff = lam_new - lam
    support = np.flatnonzero(diff)
    # S_new^{1/2} U = Q diag(root) (Q^T U) = Q diag(root) dec.U
    W = Q @ (root[:, None] * dec.U[:, support])
    return LowRankUpdate(W * diff[support], W, lam, lam_new, U, Q, root, S_inv, r)


def apply_update(state: ApproxSlackState, upd: LowRankUpdate, cond_limit: float = linalg.WOODBURY_COND_LIMIT) -> SlackStep:
    """``S_tilde <- S_tilde + V1 V2^T`` with a Woodbury refresh of the inverse.

    ``V3 = -S_tilde^{-1} V1 (I + V2^T S_tilde^{-1} V1)^{-1}`` and
    ``V4 = S_tilde^{-1} V2`` satisfy ``S_tilde_new^{-1} = S_tilde^{-1} + V3 V4^T``.
    If the inner system is ill-conditioned the inverse is recomputed directly and
    ``fallback`` is set; ``V3``/``V4`` are then still returned but not trusted.

    The new inverse square root needs an eigendecomposition anyway, so the stored
    inverse is re-anchored to its square. Otherwise the Woodbury-updated inverse
    and the inverse square root drift apart by ``O(u cond(S_tilde))`` per step,
    and that mismatch feeds straight into the Hessian-inverse update. The raw
    Woodbury result is kept in ``SlackStep.woodbury_inv`` for inspection.
    """
    k = upd.rank
    n = state.n
    if k == 0:
        empty = np.zeros((n, 0))
        return SlackStep(state, empty, empty.copy())
    V1, V2 = upd.V1, upd.V2
    S_tilde_new = linalg.symmetrize(state.S_tilde + V1 @ V2.T)
    P1 = state.S_tilde_inv @ V1
    V4 = state.S_tilde_inv @ V2
    inner = np.eye(k) + V2.T @ P1
    flops = {"slack_woodbury": 3 * n * n * k + 2 * n * k * k + k**3}
    fallback = False
    try:
        sol, cond = linalg.lu_solve_checked(inner.T, P1.T, cond_limit)
        V3 = -sol.T
        woodbury_inv = linalg.symmetrize(state.S_tilde_inv + V3 @ V4.T)
    except SingularUpdate as exc:
        fallback, cond = True, exc.cond
        woodbury_inv = None
        V3 = np.full((n, k), np.nan)
    R_new = linalg.psd_inv_sqrt(S_tilde_new)
    new_state = ApproxSlackState(S_tilde_new, linalg.symmetrize(R_new @ R_new), R_new, state.eps_S)
    return SlackStep(new_state, V3, V4, fallback, cond, flops, woodbury_inv)


def closed_form(upd: LowRankUpdate, S_new: np.ndarray) -> np.ndarray:
    """``S_new + S_new^{1/2} U diag(lambda_new) U^T S_new^{1/2}``."""
    W = upd.S_new_sqrt @ upd.U
    return linalg.symmetrize(S_new + (W * upd.lambda_new) @ W.T)


def sandwich_eigenvalues(S: np.ndarray, S_tilde: np.ndarray) -> np.ndarray:
    """Eigenvalues of ``S^{-1/2} S_tilde S^{-1/2}`` from a fresh decomposition."""
    S_mhalf = linalg.psd_inv_sqrt(S)
    return linalg.eigvalsh(linalg.symmetrize(S_mhalf @ S_tilde @ S_mhalf))
