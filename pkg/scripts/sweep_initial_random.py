#!/usr/bin/env python3
"""How the number of random initial evaluations shifts GP search convergence."""

import argparse
from pathlib import Path

from _common import landscape_args, load_landscape

from gpsearch.harness import ExperimentPlan, convergence, convergence_rows, run_experiment
from gpsearch.objective import write_rows
from gpsearch.search import SearchConfig, Strategy


def main():
    p = argparse.ArgumentParser(description=__doc__)
    landscape_args(p)
    p.add_argument("--r", default="1,5,10,20,50", help="comma-separated initial random counts")
    p.add_argument("--kernel", default="abs-exp")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--budget", type=int, default=150)
    p.add_argument("--out", default="results/init_random.csv")
    args = p.parse_args()

    rs = [int(x) for x in args.r.split(",")]
    l = load_landscape(args)
    plan = ExperimentPlan(
        l,
        tuple((f"r={r}", SearchConfig(Strategy.GP, kernel=args.kernel, initial_random=r, budget=args.budget))
              for r in rs),
        runs_per_config=args.runs,
    )
    traces = run_experiment(plan)
    curves = [convergence(traces[name], name=name) for name, _ in plan.configs]
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_rows(args.out, convergence_rows(curves))

    marks = [b for b in (25, 50, 100, args.budget) if b <= args.budget]
    print("config  " + "".join(f"{'@' + str(b):>11}" for b in marks))
    for c in curves:
        print(f"{c.name:<8}" + "".join(f"{c.mean[b - 1]:>11.5g}" for b in marks))


if __name__ == "__main__":
    main()
