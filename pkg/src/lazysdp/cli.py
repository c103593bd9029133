"""Command-line front end: ``lazysdp solve --input FILE --R FLOAT [...]``.

Exit codes: 0 converged, 2 not converged, 3 bad input or usage, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass

from . import __version__
from .errors import InputError, NotConverged, NumericError
from .sdpa import read_sdpa
from .solver import CHECK_LEVELS, VARIANTS, SolveRun, SolverConfig, run_solver

EXIT_OK = 0
EXIT_NOT_CONVERGED = 2
EXIT_INPUT = 3
EXIT_NUMERIC = 4


class UsageError(Exception):
    def __init__(self, message: str, usage: str):
        self.usage = usage
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags, which would collide with "not converged"
    def error(self, message):
        raise UsageError(message, self.format_usage())


@dataclass
class RunConfig:
    input: str
    R: float
    L: float | None
    eps: float
    eps_newton: float
    variant: str
    trace: str | None
    check: str
    max_iters: int | None
    format: str
    seed: int

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            eps=self.eps,
            eps_newton=self.eps_newton,
            max_iters=self.max_iters,
            variant=self.variant,
            trace_path=self.trace,
            check_level=self.check,
        )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lazysdp", description="Dense SDP solver with lazily maintained slack and Hessian inverse.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    p = sub.add_parser("solve", help="solve an SDPA-format instance (maximization form)")
    p.add_argument("--input", required=True, metavar="PATH", help="SDPA sparse file (.dat-s)")
    p.add_argument("--R", type=float, required=True, help="bound on ||X||_2 over the feasible set")
    p.add_argument("--L", type=float, default=None, help="bound on ||C||_2 (default: ||C||_2)")
    p.add_argument("--eps", type=float, default=1e-4, help="target accuracy (default 1e-4)")
    p.add_argument("--eps-newton", type=float, default=0.1, help="Newton step size (default 0.1)")
    p.add_argument("--variant", choices=VARIANTS, default="maintained")
    p.add_argument("--trace", metavar="PATH", default=None, help="write a JSONL per-iteration trace")
    p.add_argument("--check", choices=CHECK_LEVELS, default="cheap")
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--format", choices=("text", "structured"), default="text")
    p.add_argument("--seed", type=int, default=0, help="recorded in the output; the solver is deterministic")
    return parser


def _structured(cfg: RunConfig, run: SolveRun) -> dict:
    summary = run.summary()
    sol = run.solution
    doc = {
        "status": "converged" if run.converged else "not_converged",
        "config": asdict(cfg),
        "solution": sol.to_dict() if sol is not None else None,
        "modified_solution": {
            "objective": run.modified_solution.objective,
            "duality_gap": run.modified_solution.duality_gap,
            "primal_residual": run.modified_solution.primal_residual,
        },
        "summary": summary,
        "timings": {
            "wall_time_s": run.wall_time_s,
            "iteration_wall_time_us": sum(r.wall_time_us for r in run.records),
        },
    }
    if run.verification is not None:
        doc["verification"] = {k: v for k, v in run.verification.items() if k != "per_iteration"}
    return doc


def _text(run: SolveRun) -> str:
    s = run.summary()
    lines = ["status      : " + ("converged" if run.converged else "NOT converged")]
    sol = run.solution
    if sol is not None:
        lines += [
            f"objective   : {sol.objective:.10g}",
            f"duality gap : {sol.duality_gap:.3e}",
            f"residual    : {sol.primal_residual:.3e}",
            f"psd viol.   : {sol.psd_violation:.3e}",
        ]
    else:
        mod = run.modified_solution
        lines.append(f"modified gap: {mod.duality_gap:.3e}")
    lines += [
        f"iterations  : {s['iterations']}",
        f"final eta   : {s['final_eta']:.3e}",
        f"max rank r_t: {s['max_rank']}",
        f"wall time   : {run.wall_time_s:.2f} s",
    ]
    if run.verification is not None:
        lines.append(f"lemma checks: {'all passed' if run.verification['all_passed'] else 'FAILURES'}")
    return "\n".join(lines)


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(exc.usage + f"lazysdp: error: {exc}\n")
        return EXIT_INPUT
    cfg = RunConfig(
        ns.input, ns.R, ns.L, ns.eps, ns.eps_newton, ns.variant, ns.trace, ns.check,
        ns.max_iters, ns.format, ns.seed,
    )
    try:
        if not cfg.R > 0:
            raise InputError(f"--R must be positive, got {cfg.R}")
        try:
            solver_cfg = cfg.solver_config()
        except ValueError as exc:
            raise InputError(str(exc)) from None
        try:
            inst = read_sdpa(cfg.input)
        except OSError as exc:
            raise InputError(f"cannot read {cfg.input}: {exc.strerror or exc}") from None
        try:
            result = run_solver(inst, cfg.R, cfg.L, solver_cfg)
        except ValueError as exc:
            raise InputError(str(exc)) from None
    except InputError as exc:
        sys.stderr.write(f"lazysdp: input error: {exc}\n")
        return EXIT_INPUT
    except NumericError as exc:
        sys.stderr.write(f"lazysdp: numerical failure: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC
    except NotConverged as exc:  # raised by extraction only in unusual cases
        sys.stderr.write(f"lazysdp: not converged: {exc}\n")
        return EXIT_NOT_CONVERGED

    if cfg.format == "structured":
        sys.stdout.write(json.dumps(_structured(cfg, result), indent=2, sort_keys=True, default=float) + "\n")
    else:
        sys.stdout.write(_text(result) + "\n")
    if not result.converged:
        sys.stderr.write(
            f"lazysdp: not converged after {result.iterations} iterations (eta={result.final_state.eta:.3e})\n"
        )
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
