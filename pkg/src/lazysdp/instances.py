"""Small instance generators with known feasibility structure or analytic optima."""
from __future__ import annotations

import numpy as np

from .model import SdpInstance


def _rand_sym(rng: np.random.Generator, n: int) -> np.ndarray:
    M = rng.standard_normal((n, n))
    return (M + M.T) / 2


def random_instance(n: int, m: int, seed: int | np.random.Generator | None = 0) -> tuple[SdpInstance, float]:
    """Random instance with ``A_1 = I`` and a strictly feasible primal point.

    Returns the instance and a valid diameter bound ``R``. With ``A_1 = I`` the
    constraint ``tr X = b_1`` keeps every feasible ``X`` inside ``||X||_2 <= b_1``.
    """
    if m > n * (n + 1) // 2:
        raise ValueError(f"m={m} exceeds n(n+1)/2={n * (n + 1) // 2}")
    if m < 1:
        raise ValueError("need at least one constraint")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    A = np.empty((m, n, n))
    A[0] = np.eye(n)
    for i in range(1, m):
        A[i] = _rand_sym(rng, n)
    B = rng.standard_normal((n, n))
    X0 = B @ B.T / n + np.eye(n)
    b = np.einsum("kij,ij->k", A, X0)
    C = _rand_sym(rng, n)
    return SdpInstance(C, A, b), float(b[0])


def trace_toy(n: int = 2) -> SdpInstance:
    """``max -tr X`` s.t. ``tr X = 1``; optimum ``-1``."""
    return SdpInstance(-np.eye(n), np.eye(n)[None], np.array([1.0]))


def scalar_toy(a: float = 2.0, b: float = 3.0, c: float = 1.0) -> SdpInstance:
    """``n = 1``: ``max c x`` s.t. ``a x = b``, ``x >= 0``; optimum ``c b / a``."""
    return SdpInstance(np.array([[c]]), np.array([[[a]]]), np.array([b]))


def diagonal_lp() -> SdpInstance:
    """The LP ``max x1`` s.t. ``x1 + x2 = 1``, ``x >= 0`` embedded on the diagonal; optimum 1."""
    return SdpInstance(np.diag([1.0, 0.0]), np.eye(2)[None], np.array([1.0]))


def max_cut(n: int, p: float = 0.5, seed: int | None = 0) -> tuple[SdpInstance, float]:
    """Max-cut relaxation ``max <L/4, X>`` s.t. ``X_ii = 1`` on a G(n, p) graph.

    Returns the instance and ``R = n`` (since ``tr X = n``).
    """
    rng = np.random.default_rng(seed)
    W = np.triu((rng.random((n, n)) < p).astype(float), 1)
    W = W + W.T
    Lap = np.diag(W.sum(axis=1)) - W
    A = np.zeros((n, n, n))
    A[np.arange(n), np.arange(n), np.arange(n)] = 1.0
    return SdpInstance(Lap / 4, A, np.ones(n)), float(n)
