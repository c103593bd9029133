"""Bounded-diameter reduction to an SDP with a known strictly feasible primal/dual pair.

Given an instance with feasible set inside ``{||X||_2 <= R}`` and ``||C||_2 <= L``,
the modified problem has dimension ``n + 2`` and ``m + 1`` constraints, and
``X0 = I``, ``y0 = (0, ..., 0, 1)`` are strictly feasible for it. A solution of
the modified problem with duality gap at most ``delta**2`` maps back via
``X_hat = R * X0[:n, :n]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import InfeasibleInitialization, NotConverged
from .model import SdpInstance, Solution


@dataclass(frozen=True, eq=False)
class InitializedProblem:
    modified: SdpInstance
    R: float
    L: float
    delta: float
    y0: np.ndarray
    S0: np.ndarray
    X0: np.ndarray

    @property
    def n_orig(self) -> int:
        return self.modified.n - 2

    @property
    def m_orig(self) -> int:
        return self.modified.m - 1


def default_lipschitz(inst: SdpInstance) -> float:
    """``||C||_2``, floored at a tiny positive value so ``delta / L`` stays finite."""
    return max(linalg.spectral_norm_sym(inst.C), 1e-12)


def build_modified(inst: SdpInstance, R: float, L: float | None = None, delta: float = 1e-4) -> InitializedProblem:
    if not R > 0:
        raise ValueError(f"diameter bound R must be positive, got {R}")
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    c_norm = linalg.spectral_norm_sym(inst.C)
    if L is None:
        L = default_lipschitz(inst)
    if not L > 0:
        raise ValueError(f"Lipschitz bound L must be positive, got {L}")
    if L < c_norm * (1 - 1e-12):
        raise ValueError(f"L={L} is smaller than ||C||_2={c_norm}")

    n, m = inst.n, inst.m
    N = n + 2
    scale = delta / L

    A_bar = np.zeros((m + 1, N, N))
    A_bar[:m, :n, :n] = inst.A
    A_bar[:m, n + 1, n + 1] = inst.b / R - np.trace(inst.A, axis1=1, axis2=2)
    A_bar[m, :n, :n] = np.eye(n)
    A_bar[m, n, n] = 1.0
    b_bar = np.concatenate([inst.b / R, [n + 1.0]])
    C_bar = np.zeros((N, N))
    C_bar[:n, :n] = inst.C * scale
    C_bar[n + 1, n + 1] = -1.0

    modified = SdpInstance(C_bar, A_bar, b_bar)
    y0 = np.zeros(m + 1)
    y0[m] = 1.0
    S0 = np.eye(N)
    S0[:n, :n] -= inst.C * scale
    lam_min = float(linalg.eigvalsh(S0[:n, :n]).min()) if n else 1.0
    if lam_min <= 0:
        raise InfeasibleInitialization(
            f"I - C*delta/L is not positive definite (lambda_min={lam_min:.3e}); increase L or decrease delta"
        )
    return InitializedProblem(modified, float(R), float(L), float(delta), y0, S0, np.eye(N))


def feasibility_defects(problem: InitializedProblem) -> dict[str, float]:
    """Max absolute defects of the identities that make ``(X0, y0, S0)`` feasible."""
    mod = problem.modified
    return {
        "primal": float(np.max(np.abs(mod.inner(problem.X0) - mod.b))),
        "dual": float(np.max(np.abs(mod.slack(problem.y0) - problem.S0))),
    }


def residual_bound(inst: SdpInstance, R: float, delta: float) -> float:
    """``4 n delta (R sum_i ||A_i||_1 + ||b||_1)`` with Schatten-1 norms."""
    schatten = sum(float(np.sum(np.abs(linalg.eigvalsh(Ai)))) for Ai in inst.A)
    return 4 * inst.n * delta * (R * schatten + float(np.sum(np.abs(inst.b))))


def extract_solution(
    modified_sol: Solution, inst: SdpInstance, R: float, delta: float, L: float | None = None
) -> Solution:
    """Map a modified-problem solution with gap ``<= delta**2`` back to ``inst``.

    The returned ``y`` is ``(L / delta) * y_bar[:m]``, the dual rescaled to the
    original objective; it is only approximately dual feasible.
    """
    if not modified_sol.duality_gap <= delta**2:
        raise NotConverged(
            f"modified duality gap {modified_sol.duality_gap:.3e} exceeds delta^2={delta**2:.3e}",
            best=modified_sol,
        )
    n, m = inst.n, inst.m
    X_hat = R * modified_sol.X[:n, :n]
    y_bar = np.asarray(modified_sol.y)
    y = (L / delta) * y_bar[:m] if L is not None and y_bar.shape[0] == m + 1 else np.full(m, np.nan)
    info = dict(modified_sol.info)
    info["modified_duality_gap"] = modified_sol.duality_gap
    return Solution.evaluate(inst, X_hat, y, **info)
