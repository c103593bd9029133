"""SDP problem data, stacked constraint matrix and instance validation.

The primal problem is ``max <C, X>`` subject to ``<A_i, X> = b_i`` and ``X >= 0``;
its dual is ``min b^T y`` subject to ``S = sum_i y_i A_i - C >= 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import linalg
from .errors import InputError

SYMMETRIZE_TOL = 1e-9
RANK_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class SdpInstance:
    """Dense problem data.

    ``A`` is stored as an ``(m, n, n)`` array. Construction only checks shapes and
    finiteness; use :meth:`from_arrays` to get symmetrization of small defects, and
    :func:`validate` for a full report.
    """

    C: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        C = np.array(self.C, dtype=float, ndmin=2)
        b = np.array(self.b, dtype=float).reshape(-1)
        A = np.asarray(self.A, dtype=float)
        n = C.shape[0]
        if A.size == 0:
            A = A.reshape(0, n, n)
        if C.ndim != 2 or C.shape != (n, n):
            raise InputError(f"C must be square, got shape {C.shape}")
        if A.ndim != 3 or A.shape[1:] != (n, n):
            raise InputError(f"A must have shape (m, {n}, {n}), got {A.shape}")
        if A.shape[0] != b.shape[0]:
            raise InputError(f"{A.shape[0]} constraint matrices but {b.shape[0]} entries in b")
        for name, arr in (("C", C), ("A", A), ("b", b)):
            if not np.all(np.isfinite(arr)):
                raise InputError(f"{name} contains non-finite entries")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_arrays(cls, C, A, b, sym_tol: float = SYMMETRIZE_TOL) -> "SdpInstance":
        """Build an instance, replacing nearly symmetric matrices by ``(M + M^T) / 2``.

        A symmetry defect above ``sym_tol`` raises :class:`InputError`.
        """
        C = np.array(C, dtype=float, ndmin=2)
        A = np.array(A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, *C.shape)
        mats = [("C", C)] + [(f"A{i + 1}", Ai) for i, Ai in enumerate(A)]
        for name, M in mats:
            if M.ndim == 2 and M.shape[0] == M.shape[1]:
                d = linalg.symmetry_defect(M)
                if d > sym_tol:
                    raise InputError(f"{name} is not symmetric (defect {d:.2e})")
        C = linalg.symmetrize(C)
        A = 0.5 * (A + A.transpose(0, 2, 1))
        return cls(C, A, b)

    @property
    def n(self) -> int:
        return self.C.shape[0]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def inner(self, X: np.ndarray) -> np.ndarray:
        """``[<A_i, X>]_i``."""
        return np.einsum("kij,ij->k", self.A, X)

    def slack(self, y: np.ndarray) -> np.ndarray:
        """``S = sum_i y_i A_i - C`` (symmetrized)."""
        n = self.n
        S = (np.asarray(y, dtype=float) @ self.A.reshape(self.m, n * n)).reshape(n, n) - self.C
        return linalg.symmetrize(S)

    def allclose(self, other: "SdpInstance", atol: float = 1e-12) -> bool:
        return (
            self.n == other.n
            and self.m == other.m
            and np.allclose(self.C, other.C, rtol=0, atol=atol)
            and np.allclose(self.A, other.A, rtol=0, atol=atol)
            and np.allclose(self.b, other.b, rtol=0, atol=atol)
        )


def stack_constraints(inst: SdpInstance) -> np.ndarray:
    """The ``m x n^2`` matrix whose row ``i`` is ``vec(A_i)``."""
    m, n = inst.m, inst.n
    # row-major reshape of A_i^T equals the column-stacking of A_i
    return np.ascontiguousarray(inst.A.transpose(0, 2, 1).reshape(m, n * n))


@dataclass
class Solution:
    """Primal/dual pair with quality measures.

    ``duality_gap`` is ``b^T y - <C, X>`` as recorded; ``primal_residual`` is
    ``sum_i |<A_i, X> - b_i|``; ``psd_violation`` is ``max(0, -lambda_min(X))``.
    """

    X: np.ndarray
    y: np.ndarray
    objective: float
    duality_gap: float
    primal_residual: float
    psd_violation: float
    info: dict = field(default_factory=dict)

    @classmethod
    def evaluate(cls, inst: SdpInstance, X: np.ndarray, y: np.ndarray, **info) -> "Solution":
        X = linalg.symmetrize(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float)
        objective = float(np.vdot(inst.C, X))
        lam_min = float(linalg.eigvalsh(X).min()) if inst.n else 0.0
        return cls(
            X=X,
            y=y,
            objective=objective,
            duality_gap=float(inst.b @ y) - objective if y.shape == inst.b.shape else float("nan"),
            primal_residual=float(np.sum(np.abs(inst.inner(X) - inst.b))),
            psd_violation=max(0.0, -lam_min),
            info=dict(info),
        )

    def to_dict(self) -> dict:
        return {
            "objective": self.objective,
            "duality_gap": self.duality_gap,
            "primal_residual": self.primal_residual,
            "psd_violation": self.psd_violation,
            "y": self.y.tolist(),
            "X": self.X.tolist(),
            "info": self.info,
        }


@dataclass(frozen=True)
class Issue:
    code: str  # "symmetry" | "rank" | "dimension"
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.message}"


@dataclass
class ValidationReport:
    issues: list[Issue] = field(default_factory=list)
    rank: int | None = None

    @property
    def ok(self) -> bool:
        return not self.issues

    def has(self, code: str) -> bool:
        return any(i.code == code for i in self.issues)


def validate(inst: SdpInstance, sym_tol: float = linalg.SYM_RTOL) -> ValidationReport:
    """Report symmetry defects, dimension problems and rank deficiency of the stacked constraints."""
    report = ValidationReport()
    n, m = inst.n, inst.m
    if n == 0:
        report.issues.append(Issue("dimension", "matrix dimension is zero"))
        return report
    if m == 0:
        report.issues.append(Issue("dimension", "no constraints"))
    if m > n * (n + 1) // 2:
        report.issues.append(
            Issue("dimension", f"m={m} exceeds n(n+1)/2={n * (n + 1) // 2}; constraints cannot be independent")
        )
    for name, M in [("C", inst.C)] + [(f"A{i + 1}", Ai) for i, Ai in enumerate(inst.A)]:
        d = linalg.symmetry_defect(M)
        if d > sym_tol:
            report.issues.append(Issue("symmetry", f"{name} asymmetric (defect {d:.2e})"))
    if m:
        A = stack_constraints(inst)
        _, R, _ = sla.qr(A.T, mode="economic", pivoting=True)
        diag = np.abs(np.diag(R))
        rank = int(np.sum(diag > RANK_RTOL * max(diag[0], 1e-300))) if diag.size else 0
        report.rank = rank
        if rank < m:
            report.issues.append(Issue("rank", f"stacked constraints have rank {rank} < m={m}"))
    return report
