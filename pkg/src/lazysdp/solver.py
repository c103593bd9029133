"""Short-step log-barrier method on the dual with lazily maintained slack and Hessian inverse.

The dual iterate follows the central path of ``f_eta(y) = eta b^T y - log det S(y)``.
Each step raises ``eta`` by ``1 + eps_N / (20 sqrt(n))``, takes one Newton step
with the maintained ``G ~ H^{-1}``, recomputes the exact slack, and then refreshes
the approximate slack and ``G`` by low-rank updates.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

from . import hessian, linalg, slack
from .errors import NotConverged, NotPositiveDefinite, SingularUpdate, StepOutOfCone, ValidationError
from .initializer import InitializedProblem, build_modified, extract_solution
from .model import SdpInstance, Solution, stack_constraints, validate

VARIANTS = ("maintained", "naive")
CHECK_LEVELS = ("off", "cheap", "full")


@dataclass
class SolverConfig:
    """Solver knobs.

    ``eta0`` is the barrier parameter at the first iterate. The reduction's start
    point ``y0`` is exactly central for ``eta = 1`` when ``C = 0`` (and within
    ``O(delta)`` otherwise), which is why 1 is the default.
    """

    eps: float = 1e-4
    eps_newton: float = 0.1
    max_iters: int | None = None
    variant: str = "maintained"
    trace_path: str | None = None
    check_level: str = "cheap"
    eta0: float = 1.0
    keep_iterates: bool = False

    def __post_init__(self):
        if not 0 < self.eps <= 0.01:
            raise ValueError(f"eps must lie in (0, 0.01], got {self.eps}")
        if not math.sqrt(self.eps) < self.eps_newton <= 0.1:
            raise ValueError(
                f"eps_newton must satisfy sqrt(eps)={math.sqrt(self.eps):.4g} < eps_newton <= 0.1, got {self.eps_newton}"
            )
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.check_level not in CHECK_LEVELS:
            raise ValueError(f"check_level must be one of {CHECK_LEVELS}, got {self.check_level!r}")
        if self.max_iters is not None and self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")
        if not self.eta0 > 0:
            raise ValueError("eta0 must be positive")

    def eta_target(self, n: int) -> float:
        """Barrier value at which the duality gap bound reaches ``eps**2``."""
        return n * (1 + 2 * self.eps_newton) / self.eps**2

    def iteration_cap(self, n: int) -> int:
        if self.max_iters is not None:
            return self.max_iters
        return math.ceil(40.0 / self.eps_newton * math.sqrt(n) * math.log(n / self.eps))

    def eta_factor(self, n: int) -> float:
        return 1.0 + self.eps_newton / (20.0 * math.sqrt(n))


@dataclass
class DualState:
    y: np.ndarray
    eta: float
    S: np.ndarray
    S_inv: np.ndarray
    S_inv_sqrt: np.ndarray | None = None  # filled in lazily by the slack maintainer

    @classmethod
    def at(cls, inst: SdpInstance, y: np.ndarray, eta: float) -> "DualState":
        S = inst.slack(y)
        try:
            S_inv = linalg.spd_inverse(S, "dual slack")
        except NotPositiveDefinite as exc:
            raise StepOutOfCone(0, exc.lambda_min) from None
        return cls(np.asarray(y, dtype=float).copy(), float(eta), S, S_inv)


@dataclass
class IterationRecord:
    t: int
    eta: float
    r_t: int
    newton_measure: float | None = None
    slack_drift_fro: float | None = None
    sandwich_min: float | None = None
    sandwich_max: float | None = None
    g_fidelity: float | None = None
    wall_time_us: float = 0.0
    flop_counters: dict = field(default_factory=dict)
    slack_fallback: bool = False
    hessian_fallback: bool = False
    objective: float = 0.0  # b^T y after the step
    y: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("y")
        extra = d.pop("extra")
        d.update(extra)
        return {"record": "iteration", **d}


@dataclass
class Maintainers:
    """The two lazily updated objects carried between iterations."""

    slack: slack.ApproxSlackState
    hess: hessian.HessianInverseState


@dataclass
class StepContext:
    """Snapshot handed to observers after every step (before/after matrices)."""

    t: int
    S: np.ndarray
    S_tilde: np.ndarray
    S_new: np.ndarray
    S_tilde_new: np.ndarray
    r_t: int
    update: slack.LowRankUpdate
    record: IterationRecord
    maintainers: Maintainers | None = None  # after the update


def gradient(state: DualState, A_stacked: np.ndarray, b: np.ndarray, eta: float) -> np.ndarray:
    """``g_j = eta b_j - tr(S^{-1} A_j)``."""
    return eta * b - A_stacked @ linalg.vec(state.S_inv)


def newton_step(G: np.ndarray, g: np.ndarray) -> np.ndarray:
    return -(G @ g)


def newton_measure(state: DualState, A_stacked: np.ndarray, b: np.ndarray, eta: float | None = None) -> float:
    """``g^T H^{-1} g`` against the exact Hessian at ``state``."""
    eta = state.eta if eta is None else eta
    g = gradient(state, A_stacked, b, eta)
    H = hessian.hessian_exact(A_stacked, state.S)
    c = sla.cho_factor(H, lower=True, check_finite=False)
    return float(g @ sla.cho_solve(c, g, check_finite=False))


def init_maintainers(A_stacked: np.ndarray, S: np.ndarray) -> Maintainers:
    approx = slack.ApproxSlackState.from_slack(S)
    return Maintainers(approx, hessian.init_inverse(A_stacked, approx.S_tilde_inv))


def step(
    state: DualState,
    maint: Maintainers,
    inst: SdpInstance,
    cfg: SolverConfig,
    t: int,
    A_stacked: np.ndarray | None = None,
    observers: Sequence[Callable[[StepContext], None]] = (),
) -> tuple[DualState, Maintainers, IterationRecord]:
    """One barrier iteration. Returns the new dual state, maintainers and a record."""
    tic = time.perf_counter()
    A = stack_constraints(inst) if A_stacked is None else A_stacked
    n, m = inst.n, inst.m
    eta_new = state.eta * cfg.eta_factor(n)
    g = gradient(state, A, inst.b, eta_new)
    y_new = state.y + newton_step(maint.hess.G, g)
    S_new = inst.slack(y_new)
    flops = {"gradient": m * n * n, "newton": m * m, "slack": m * n * n + n**3, "lowrank_slack": 12 * n**3}

    # the slack maintainer's decomposition of S_new doubles as the cone test and gives S_new^{-1}
    try:
        upd = slack.low_rank_slack_update(S_new, maint.slack)
    except NotPositiveDefinite as exc:
        raise StepOutOfCone(t, exc.lambda_min) from None
    inv_sqrt = upd.S_new_inv_sqrt if cfg.check_level != "off" else None
    new_state = DualState(y_new, eta_new, S_new, upd.S_new_inv, inv_sqrt)
    r_t = upd.rank
    slack_fallback = hess_fallback = False
    if r_t == 0:
        new_maint = maint
    elif cfg.variant == "maintained":
        sstep = slack.apply_update(maint.slack, upd)
        flops.update(sstep.flops)
        slack_fallback = sstep.fallback
        new_hess = None
        if not sstep.fallback:
            Y1, Y2 = hessian.build_Y_factors(maint.slack.S_tilde_inv_sqrt, sstep.V3, sstep.V4)
            try:
                new_hess = hessian.update_inverse(maint.hess, Y1, Y2)
                flops.update(new_hess.flops)
            except SingularUpdate:
                hess_fallback = True
        else:
            hess_fallback = True
        if new_hess is None:
            new_hess = hessian.init_inverse(A, sstep.state.S_tilde_inv)
            new_hess.fallbacks = maint.hess.fallbacks + 1
            flops["hessian_reinit"] = m * n**4 + m * m * n * n + m**3
        new_maint = Maintainers(sstep.state, new_hess)
    else:
        S_tilde_new = linalg.symmetrize(maint.slack.S_tilde + upd.V1 @ upd.V2.T)
        approx = slack.ApproxSlackState.from_slack(S_tilde_new, maint.slack.eps_S)
        new_maint = Maintainers(approx, hessian.init_inverse(A, approx.S_tilde_inv))
        flops["hessian_direct"] = m * n**4 + m * m * n * n + m**3

    record = IterationRecord(
        t=t,
        eta=eta_new,
        r_t=r_t,
        flop_counters=flops,
        slack_fallback=slack_fallback,
        hessian_fallback=hess_fallback,
        objective=float(inst.b @ y_new),
        y=y_new.copy() if cfg.keep_iterates else None,
    )
    if cfg.check_level != "off":
        S_mhalf = state.S_inv_sqrt if state.S_inv_sqrt is not None else linalg.psd_inv_sqrt(state.S)
        record.slack_drift_fro = float(
            np.linalg.norm(linalg.symmetrize(S_mhalf @ S_new @ S_mhalf) - np.eye(n))
        )
        R_new = inv_sqrt
        sw = linalg.eigvalsh(linalg.symmetrize(R_new @ new_maint.slack.S_tilde @ R_new))
        record.sandwich_min, record.sandwich_max = float(sw.min()), float(sw.max())
        record.g_fidelity = hessian.fidelity(new_maint.hess.G, A, new_maint.slack.S_tilde)
    if cfg.check_level == "full":
        record.newton_measure = newton_measure(new_state, A, inst.b)
    if observers:
        ctx = StepContext(
            t, state.S, maint.slack.S_tilde, S_new, new_maint.slack.S_tilde, r_t, upd, record, new_maint
        )
        for obs in observers:
            obs(ctx)
    record.wall_time_us = (time.perf_counter() - tic) * 1e6
    return new_state, new_maint, record


def reconstruct_primal(inst: SdpInstance, state: DualState, A_stacked: np.ndarray | None = None) -> np.ndarray:
    """Primal matrix paired with a near-central dual iterate.

    ``X = (S^{-1} - S^{-1} D S^{-1}) / eta`` with ``D = sum_i d_i A_i`` and
    ``d = -H^{-1} g_eta(y)`` the exact Newton step; this satisfies the equality
    constraints exactly and is PSD whenever the Newton measure is below 1.
    """
    A = stack_constraints(inst) if A_stacked is None else A_stacked
    g = gradient(state, A, inst.b, state.eta)
    H = hessian.hessian_exact(A, state.S)
    d = -sla.cho_solve(sla.cho_factor(H, lower=True, check_finite=False), g, check_finite=False)
    D = np.tensordot(d, inst.A, axes=1)
    X = (state.S_inv - state.S_inv @ D @ state.S_inv) / state.eta
    return linalg.symmetrize(X)


class TraceWriter:
    """Line-delimited JSON trace; a no-op when ``path`` is None."""

    def __init__(self, path: str | None):
        self._fh = open(path, "w") if path else None

    @property
    def active(self) -> bool:
        return self._fh is not None

    def write(self, obj: dict) -> None:
        if self._fh is not None:
            self._fh.write(json.dumps(obj, default=_json_default) + "\n")

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


class BarrierMethod:
    """Iteration driver over an instance with a known strictly feasible dual point."""

    def __init__(
        self,
        inst: SdpInstance,
        cfg: SolverConfig | None = None,
        observers: Sequence[Callable[[StepContext], None]] = (),
    ):
        self.inst = inst
        self.cfg = cfg or SolverConfig()
        self.observers = list(observers)
        self.A = stack_constraints(inst)
        self.records: list[IterationRecord] = []
        self.state: DualState | None = None
        self.maint: Maintainers | None = None
        self.initial_newton_measure: float | None = None

    def start(self, y0: np.ndarray, eta0: float | None = None) -> None:
        eta0 = self.cfg.eta0 if eta0 is None else eta0
        self.state = DualState.at(self.inst, y0, eta0)
        self.maint = init_maintainers(self.A, self.state.S)
        self.records = []
        if self.cfg.check_level == "full":
            self.initial_newton_measure = newton_measure(self.state, self.A, self.inst.b)

    @property
    def t(self) -> int:
        return len(self.records)

    def step(self) -> IterationRecord:
        self.state, self.maint, rec = step(
            self.state, self.maint, self.inst, self.cfg, self.t + 1, self.A, self.observers
        )
        self.records.append(rec)
        return rec

    def run(self, steps: int, trace: TraceWriter | None = None) -> list[IterationRecord]:
        for _ in range(steps):
            rec = self.step()
            if trace is not None and trace.active:
                trace.write(rec.to_json())
        return self.records

    def run_to_target(self, trace: TraceWriter | None = None) -> bool:
        """Iterate until ``eta`` reaches the gap target or the iteration cap; True if converged."""
        n = self.inst.n
        target = self.cfg.eta_target(n)
        cap = self.cfg.iteration_cap(n)
        while self.state.eta < target and self.t < cap:
            rec = self.step()
            if trace is not None and trace.active:
                trace.write(rec.to_json())
        return self.state.eta >= target


@dataclass
class SolveRun:
    problem: InitializedProblem
    config: SolverConfig
    records: list[IterationRecord]
    final_state: DualState
    converged: bool
    modified_solution: Solution | None
    solution: Solution | None
    initial_newton_measure: float | None = None
    verification: dict | None = None
    wall_time_s: float = 0.0

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def ranks(self) -> list[int]:
        return [r.r_t for r in self.records]

    def summary(self) -> dict:
        flops: dict[str, int] = {}
        for r in self.records:
            for k, v in r.flop_counters.items():
                flops[k] = flops.get(k, 0) + int(v)

        def worst(attr, fn):
            vals = [getattr(r, attr) for r in self.records if getattr(r, attr) is not None]
            return fn(vals) if vals else None

        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "final_eta": self.final_state.eta,
            "max_rank": max(self.ranks, default=0),
            "total_rank": int(sum(self.ranks)),
            "slack_fallbacks": sum(r.slack_fallback for r in self.records),
            "hessian_fallbacks": sum(r.hessian_fallback for r in self.records),
            "max_newton_measure": worst("newton_measure", max),
            "initial_newton_measure": self.initial_newton_measure,
            "max_slack_drift_fro": worst("slack_drift_fro", max),
            "min_sandwich": worst("sandwich_min", min),
            "max_sandwich": worst("sandwich_max", max),
            "max_g_fidelity": worst("g_fidelity", max),
            "flop_counters": flops,
        }


def run_solver(
    inst: SdpInstance,
    R: float,
    L: float | None = None,
    cfg: SolverConfig | None = None,
    observers: Sequence[Callable[[StepContext], None]] = (),
    monitor=None,
) -> SolveRun:
    """Reduce, iterate and extract. Never raises :class:`NotConverged`; inspect ``converged``.

    With ``check_level == "full"`` a :class:`~lazysdp.diagnostics.LemmaMonitor` is
    attached unless one is passed in.
    """
    cfg = cfg or SolverConfig()
    report = validate(inst)
    if not report.ok:
        raise ValidationError(report)
    tic = time.perf_counter()
    problem = build_modified(inst, R, L, delta=cfg.eps)
    observers = list(observers)
    if monitor is None and cfg.check_level == "full":
        from .diagnostics import LemmaMonitor

        monitor = LemmaMonitor()
    if monitor is not None:
        observers.append(monitor)

    method = BarrierMethod(problem.modified, cfg, observers)
    trace = TraceWriter(cfg.trace_path)
    try:
        method.start(problem.y0)
        converged = method.run_to_target(trace)
        state = method.state
        mod_sol = Solution.evaluate(
            problem.modified, reconstruct_primal(problem.modified, state, method.A), state.y,
            eta=state.eta, iterations=method.t,
        )
        solution = None
        if converged and mod_sol.duality_gap <= cfg.eps**2:
            solution = extract_solution(mod_sol, inst, problem.R, problem.delta, problem.L)
        else:
            converged = False
        verification = monitor.summary() if monitor is not None else None
        run = SolveRun(
            problem, cfg, method.records, state, converged, mod_sol, solution,
            method.initial_newton_measure, verification, time.perf_counter() - tic,
        )
        summary = run.summary()
        if solution is not None:
            solution.info.update(iterations=run.iterations, max_rank=summary["max_rank"])
        if verification is not None:
            trace.write(verification)
        trace.write({"record": "summary", **summary})
    finally:
        trace.close()
    return run


def solve(inst: SdpInstance, R: float, L: float | None = None, cfg: SolverConfig | None = None) -> Solution:
    """Solve ``max <C, X>`` s.t. ``<A_i, X> = b_i``, ``X >= 0`` to accuracy ``cfg.eps``."""
    run = run_solver(inst, R, L, cfg)
    if not run.converged:
        raise NotConverged(
            f"stopped after {run.iterations} iterations at eta={run.final_state.eta:.3e} "
            f"(target {run.config.eta_target(run.problem.modified.n):.3e})",
            best=run,
        )
    return run.solution
