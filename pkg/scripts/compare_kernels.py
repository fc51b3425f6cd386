#!/usr/bin/env python3
"""Average best-so-far curves for GP search under each kernel, next to random search."""

import argparse
from pathlib import Path

from _common import landscape_args, load_landscape

from gpsearch.harness import ExperimentPlan, analyze, run_experiment, write_stats
from gpsearch.kernels import Kernel
from gpsearch.search import SearchConfig, Strategy


def main():
    p = argparse.ArgumentParser(description=__doc__)
    landscape_args(p)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--init-random", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", default="results/kernels")
    args = p.parse_args()

    l = load_landscape(args)
    configs = [(f"gp:{k.value}", SearchConfig(Strategy.GP, kernel=k, initial_random=args.init_random, budget=args.budget))
               for k in Kernel]
    configs.append(("random", SearchConfig(Strategy.RANDOM, budget=args.budget)))
    plan = ExperimentPlan(l, tuple(configs), runs_per_config=args.runs)
    stats = analyze(plan, run_experiment(plan, workers=args.workers), checkpoints=(25, 50, 100, args.budget))
    write_stats(Path(args.out_dir), stats)

    print(f"{'config':<12} {'best@' + str(args.budget):>12} {'evals-to-opt':>13} {'reached':>8}")
    for curve, ev in zip(stats.curves, stats.evals):
        print(f"{curve.name:<12} {curve.mean[-1]:>12.5g} {ev.mean:>13.1f} {ev.reach_fraction:>8.2f}")
    print(f"optimum {l.scores.max():.5g}; tables in {args.out_dir}")


if __name__ == "__main__":
    main()
