#!/usr/bin/env python3
"""Fraction of runs that have evaluated a top-k combination by each checkpoint."""

import argparse
from pathlib import Path

from _common import landscape_args, load_landscape

from gpsearch.harness import ExperimentPlan, hit_rate_rows, hit_rates, run_experiment
from gpsearch.objective import write_rows
from gpsearch.search import SearchConfig, Strategy


def main():
    p = argparse.ArgumentParser(description=__doc__)
    landscape_args(p)
    p.add_argument("--ks", default="1,3,5")
    p.add_argument("--checkpoints", default="50,100,200")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--out", default="results/hit_rates.csv")
    args = p.parse_args()

    ks = [int(x) for x in args.ks.split(",")]
    cps = [int(x) for x in args.checkpoints.split(",")]
    budget = max(cps)
    l = load_landscape(args)
    plan = ExperimentPlan(
        l,
        (
            ("gp:abs-exp", SearchConfig(Strategy.GP, initial_random=10, budget=budget)),
            ("random", SearchConfig(Strategy.RANDOM, budget=budget)),
        ),
        runs_per_config=args.runs,
    )
    traces = run_experiment(plan)
    reports = [hit_rates(traces[n], l, ks, cps, name=n) for n, _ in plan.configs]
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_rows(args.out, hit_rate_rows(reports))

    for rep in reports:
        print(rep.name)
        for i, k in enumerate(rep.ks):
            bars = "  ".join(f"@{b}: {rep.rates[i, j]:.2f}" for j, b in enumerate(rep.checkpoints))
            print(f"  top-{k:<3} {bars}")


if __name__ == "__main__":
    main()
