"""Dense SDP interior point solver with lazily maintained approximate slack and Hessian inverse."""
from __future__ import annotations

__version__ = "0.1.0"

from .diagnostics import LemmaMonitor, PotentialWeights, amortization_report, potential
from .errors import (
    EigenFailure,
    InfeasibleInitialization,
    InputError,
    NotConverged,
    NotPositiveDefinite,
    NumericError,
    ParseError,
    RankDeficient,
    SdpError,
    SingularUpdate,
    StepOutOfCone,
    ValidationError,
)
from .initializer import InitializedProblem, build_modified, extract_solution
from .model import SdpInstance, Solution, validate
from .sdpa import emit_sdpa, parse_sdpa, read_sdpa, write_sdpa
from .solver import BarrierMethod, SolverConfig, SolveRun, run_solver, solve

__all__ = [
    "BarrierMethod",
    "EigenFailure",
    "InfeasibleInitialization",
    "InitializedProblem",
    "InputError",
    "LemmaMonitor",
    "NotConverged",
    "NotPositiveDefinite",
    "NumericError",
    "ParseError",
    "PotentialWeights",
    "RankDeficient",
    "SdpError",
    "SdpInstance",
    "SingularUpdate",
    "Solution",
    "SolveRun",
    "SolverConfig",
    "StepOutOfCone",
    "ValidationError",
    "amortization_report",
    "build_modified",
    "emit_sdpa",
    "extract_solution",
    "parse_sdpa",
    "potential",
    "read_sdpa",
    "run_solver",
    "solve",
    "validate",
    "write_sdpa",
]
