"""Potential-function instrumentation for the lazy slack updates.

Every quantity here is recomputed from fresh eigendecompositions of the exact
and approximate slacks handed over by the solver, never from maintained inverses.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .slack import EPS_S, log_factor

CHECK_TOL = 1e-8
ASSUMPTION_TOL = 1e-9
DRIFT_LIMIT = 0.02
DISPLACEMENT_LIMIT = 1e-3
TELESCOPE_TOL = 1e-6


@dataclass(frozen=True)
class PotentialWeights:
    g: np.ndarray
    label: str = "custom"

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float).reshape(-1)
        if g.size == 0 or np.any(~np.isfinite(g)) or np.any(g <= 0):
            raise ValueError("weights must be finite and strictly positive")
        if np.any(np.diff(g) > 0):
            raise ValueError("weights must be non-increasing")
        object.__setattr__(self, "g", g)

    @classmethod
    def inv_sqrt(cls, n: int) -> "PotentialWeights":
        return cls(1.0 / np.sqrt(np.arange(1, n + 1)), "inv-sqrt")

    @classmethod
    def load(cls, path) -> "PotentialWeights":
        """Read weights from a JSON list or whitespace-separated text file."""
        with open(path) as fh:
            text = fh.read()
        try:
            values = json.loads(text)
        except json.JSONDecodeError:
            values = [float(tok) for tok in text.split()]
        return cls(np.asarray(values, dtype=float), f"file:{path}")

    @property
    def n(self) -> int:
        return self.g.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.g))

    def at_rank(self, r: int) -> float:
        """``g_r`` with 1-based ``r`` (0 for ``r == 0``)."""
        return float(self.g[r - 1]) if r > 0 else 0.0


@dataclass
class DifferenceMatrices:
    Z: np.ndarray
    Z_mid: np.ndarray
    Z_new: np.ndarray
    drift_fro: float  # ||S^{-1/2} S_new S^{-1/2} - I||_F


@dataclass
class LemmaCheck:
    passed: bool | None  # None when skipped
    margin: float
    reason: str = ""

    @property
    def skipped(self) -> bool:
        return self.passed is None


@dataclass
class AmortizationReport:
    T: int
    ranks: list[int]
    sum_rg: float
    bound: float
    ratio: float

    def to_dict(self) -> dict:
        return {"T": self.T, "sum_rg": self.sum_rg, "bound": self.bound, "ratio": self.ratio,
                "max_rank": max(self.ranks, default=0), "total_rank": int(sum(self.ranks))}


def potential(Z: np.ndarray, w: PotentialWeights) -> float:
    """``sum_i g_i |lambda(Z)|_[i]`` with magnitudes sorted descending."""
    if Z.shape[0] != w.n:
        raise ValueError(f"dimension {Z.shape[0]} does not match {w.n} weights")
    mags = np.sort(np.abs(linalg.eigvalsh(linalg.symmetrize(Z))))[::-1]
    return float(w.g @ mags)


def _whiten(M_inv_sqrt: np.ndarray, X: np.ndarray) -> np.ndarray:
    return linalg.symmetrize(M_inv_sqrt @ X @ M_inv_sqrt) - np.eye(X.shape[0])


def difference_matrices(S, S_tilde, S_new, S_tilde_new) -> DifferenceMatrices:
    R = linalg.psd_inv_sqrt(S)
    R_new = linalg.psd_inv_sqrt(S_new)
    return DifferenceMatrices(
        Z=_whiten(R, S_tilde),
        Z_mid=_whiten(R_new, S_tilde),
        Z_new=_whiten(R_new, S_tilde_new),
        drift_fro=float(np.linalg.norm(_whiten(R, S_new))),
    )


def closeness_holds(Z: np.ndarray, drift_fro: float) -> tuple[bool, str]:
    """Both closeness preconditions: small exact-slack move and ``||Z||_2 <= 0.01``."""
    z_norm = linalg.spectral_norm_sym(Z)
    if drift_fro > DRIFT_LIMIT + ASSUMPTION_TOL:
        return False, f"slack drift {drift_fro:.4g} > {DRIFT_LIMIT}"
    if z_norm > EPS_S + ASSUMPTION_TOL:
        return False, f"||Z||_2 = {z_norm:.4g} > {EPS_S}"
    return True, ""


def check_s_move(Z, Z_mid, w: PotentialWeights, drift_fro: float | None = None, tol: float = CHECK_TOL) -> LemmaCheck:
    """Potential increase caused by the exact slack moving is at most ``||g||_2``."""
    if drift_fro is not None:
        ok, reason = closeness_holds(Z, drift_fro)
        if not ok:
            return LemmaCheck(None, float("nan"), reason)
    increase = potential(Z_mid, w) - potential(Z, w)
    margin = w.norm - increase
    return LemmaCheck(margin >= -tol, margin)


def stilde_bound(r_t: int, w: PotentialWeights, eps_S: float = EPS_S) -> float:
    return eps_S / (10.0 * log_factor(w.n)) * r_t * w.at_rank(r_t)


def check_stilde_move(Z_mid, Z_new, r_t: int, w: PotentialWeights, tol: float = CHECK_TOL) -> LemmaCheck:
    """Potential decrease from a rank-``r_t`` correction is at least ``eps_S/(10 log n) r_t g_{r_t}``."""
    decrease = potential(Z_mid, w) - potential(Z_new, w)
    margin = decrease - stilde_bound(r_t, w)
    return LemmaCheck(margin >= -tol, margin)


def eigen_displacement(Z, Z_mid) -> float:
    """``sum_i (lambda(Z)_[i] - lambda(Z_mid)_[i])^2`` with both spectra sorted descending."""
    a = np.sort(linalg.eigvalsh(linalg.symmetrize(Z)))
    b = np.sort(linalg.eigvalsh(linalg.symmetrize(Z_mid)))
    return float(np.sum((a - b) ** 2))


def amortization_report(ranks, w: PotentialWeights, n: int | None = None) -> AmortizationReport:
    n = w.n if n is None else n
    ranks = [int(r) for r in ranks]
    if any(r < 0 or r > n for r in ranks):
        raise ValueError(f"ranks must lie in [0, {n}]")
    T = len(ranks)
    sum_rg = float(sum(r * w.at_rank(r) for r in ranks))
    bound = T * w.norm * math.log(n) if n > 1 else 0.0
    if bound > 0:
        ratio = sum_rg / bound
    else:
        ratio = 0.0 if sum_rg == 0 else float("inf")
    return AmortizationReport(T, ranks, sum_rg, bound, ratio)


@dataclass
class IterationVerdict:
    t: int
    r_t: int
    s_move: LemmaCheck
    stilde_move: LemmaCheck
    displacement: float | None
    phi_Z: float
    phi_mid: float
    phi_new: float

    def to_dict(self) -> dict:
        def lemma(c: LemmaCheck):
            status = "skipped" if c.skipped else ("pass" if c.passed else "fail")
            return {"status": status, "margin": None if c.skipped else c.margin, "reason": c.reason or None}

        return {"t": self.t, "r_t": self.r_t, "s_move": lemma(self.s_move),
                "stilde_move": lemma(self.stilde_move), "displacement": self.displacement}


@dataclass
class LemmaMonitor:
    """Solver observer that checks the potential lemmas at every iteration."""

    weights: PotentialWeights | None = None
    verdicts: list[IterationVerdict] = field(default_factory=list)
    _phi_start: float | None = None
    _phi_end: float = 0.0

    def __call__(self, ctx) -> None:
        n = ctx.S.shape[0]
        if self.weights is None:
            self.weights = PotentialWeights.inv_sqrt(n)
        w = self.weights
        dm = difference_matrices(ctx.S, ctx.S_tilde, ctx.S_new, ctx.S_tilde_new)
        ok, reason = closeness_holds(dm.Z, dm.drift_fro)
        s_move = check_s_move(dm.Z, dm.Z_mid, w, dm.drift_fro)
        stilde = check_stilde_move(dm.Z_mid, dm.Z_new, ctx.r_t, w)
        verdict = IterationVerdict(
            t=ctx.t,
            r_t=ctx.r_t,
            s_move=s_move,
            stilde_move=stilde,
            displacement=eigen_displacement(dm.Z, dm.Z_mid) if ok else None,
            phi_Z=potential(dm.Z, w),
            phi_mid=potential(dm.Z_mid, w),
            phi_new=potential(dm.Z_new, w),
        )
        if self._phi_start is None:
            self._phi_start = verdict.phi_Z
        self._phi_end = verdict.phi_new
        self.verdicts.append(verdict)
        ctx.record.extra["s_move"] = s_move.passed
        ctx.record.extra["stilde_move"] = stilde.passed

    @property
    def ranks(self) -> list[int]:
        return [v.r_t for v in self.verdicts]

    def telescoping_error(self) -> float:
        """Gap between the end-to-end potential change and the sum of per-step deltas."""
        if not self.verdicts:
            return 0.0
        total = sum((v.phi_mid - v.phi_Z) - (v.phi_mid - v.phi_new) for v in self.verdicts)
        return abs((self._phi_end - self._phi_start) - total)

    def counts(self) -> dict:
        def tally(attr):
            checks = [getattr(v, attr) for v in self.verdicts]
            return {
                "pass": sum(c.passed is True for c in checks),
                "fail": sum(c.passed is False for c in checks),
                "skipped": sum(c.skipped for c in checks),
            }

        disp = [v.displacement for v in self.verdicts if v.displacement is not None]
        return {
            "s_move": tally("s_move"),
            "stilde_move": tally("stilde_move"),
            "assumption_violations": sum(v.s_move.skipped for v in self.verdicts),
            "max_displacement": max(disp, default=0.0),
            "displacement_violations": sum(d > DISPLACEMENT_LIMIT for d in disp),
        }

    def all_passed(self) -> bool:
        c = self.counts()
        return (
            c["s_move"]["fail"] == 0
            and c["stilde_move"]["fail"] == 0
            and c["displacement_violations"] == 0
            and self.telescoping_error() <= TELESCOPE_TOL
        )

    def summary(self) -> dict:
        report = amortization_report(self.ranks, self.weights) if self.weights is not None else None
        return {
            "record": "verification",
            "weights": self.weights.label if self.weights is not None else None,
            "iterations": len(self.verdicts),
            **self.counts(),
            "telescoping_error": self.telescoping_error(),
            "amortization": report.to_dict() if report else None,
            "all_passed": self.all_passed(),
            "per_iteration": [v.to_dict() for v in self.verdicts],
        }
