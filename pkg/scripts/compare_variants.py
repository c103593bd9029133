"""Run the maintained and naive solvers side by side on random instances.

Both variants apply the same slack-correction rule, so their iterates should
agree to rounding; the maintained one should be cheaper per iteration once
``m`` is large relative to ``n``. Prints the largest iterate gap, the objective
gap at exit and the per-iteration wall time of each variant.

    python scripts/compare_variants.py --n 6 --m 10 --instances 5
"""
from __future__ import annotations

import argparse

import numpy as np

from lazysdp.instances import random_instance
from lazysdp.solver import SolverConfig, run_solver


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--m", type=int, default=10)
    ap.add_argument("--instances", type=int, default=5)
    ap.add_argument("--eps", type=float, default=9.9e-3)
    args = ap.parse_args()

    print(f"{'seed':>4} {'T':>6} {'max |dy|':>10} {'|d obj|':>10} {'maint us':>9} {'naive us':>9}")
    for seed in range(args.instances):
        inst, R = random_instance(args.n, args.m, seed)
        runs = {}
        for variant in ("maintained", "naive"):
            cfg = SolverConfig(eps=args.eps, variant=variant, check_level="off", keep_iterates=True)
            runs[variant] = run_solver(inst, R, cfg=cfg)
        a, b = runs["maintained"], runs["naive"]
        T = min(a.iterations, b.iterations)
        dy = max(float(np.abs(ra.y - rb.y).max()) for ra, rb in zip(a.records[:T], b.records[:T]))
        dobj = abs(a.final_state.y @ a.problem.modified.b - b.final_state.y @ b.problem.modified.b)
        us = [sum(r.wall_time_us for r in run.records) / run.iterations for run in (a, b)]
        print(f"{seed:>4} {T:>6} {dy:>10.2e} {dobj:>10.2e} {us[0]:>9.0f} {us[1]:>9.0f}")


if __name__ == "__main__":
    main()
