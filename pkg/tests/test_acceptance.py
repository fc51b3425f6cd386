"""Acceptance gate.

Each test checks one criterion at its stated tolerance and runtime limit,
prints a single PASS/FAIL line and records it for the terminal summary.
"""

import time
from pathlib import Path

import numpy as np
import pytest

from gpsearch import gp
from gpsearch.cli import main
from gpsearch.harness import (
    ExperimentPlan,
    convergence,
    evals_to_target,
    hit_rates,
    marginal_heatmap,
    run_experiment,
    summarize_evals,
)
from gpsearch.kernels import Kernel, gram_matrix
from gpsearch.objective import Landscape, prior_landscape
from gpsearch.search import SearchConfig, Strategy, run_search
from gpsearch.space import TABLE1, Axis, SearchSpace

from oracles import brute_heatmap, dense_condition, gram_ref, random_instance

SPACE_FILE = Path(__file__).resolve().parents[1] / "tables" / "dstc4.space"


def grid(*sizes):
    return SearchSpace(tuple(Axis(f"a{i}", tuple(float(v) for v in range(n))) for i, n in enumerate(sizes)))


@pytest.fixture
def report(record_property):
    def _report(number, title, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}"
        print(line)
        record_property("acceptance", line)
        assert ok, line

    return _report


def test_01_gp_oracle_equivalence(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for kernel in Kernel:
        for _ in range(50):
            X, f, Xs, j = random_instance(rng, kernel.value)
            post = gp.posterior(gp.fit(kernel, X, f, jitter=j), Xs, want_covariance=True)
            mean, cov, _ = dense_condition(kernel.value, X, f, Xs, j)
            worst = max(
                worst,
                np.max(np.abs(post.mean - mean)) / max(1.0, np.max(np.abs(mean))),
                np.max(np.abs(post.covariance - cov)) / max(1.0, np.max(np.abs(cov))),
            )
    dt = time.perf_counter() - t0
    report(1, "GP oracle equivalence", worst <= 1e-8 and dt < 10,
           f"200 instances, worst rel err {worst:.2e} (tol 1e-8), {dt:.2f}s (limit 10s)")


def test_02_interpolation(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst, done = 0.0, 0
    while done < 100:
        kernel = list(Kernel)[done % 4]
        X, f, _, _ = random_instance(rng, kernel.value)
        if np.linalg.cond(gram_ref(kernel.value, X, X)) > 1e6:
            continue
        done += 1
        post = gp.posterior(gp.fit(kernel, X, f, jitter=1e-12), X)
        worst = max(worst, float(np.max(np.abs(post.mean - f))))
    dt = time.perf_counter() - t0
    report(2, "Interpolation", worst <= 1e-6 and dt < 5,
           f"100 instances, worst abs err {worst:.2e} (tol 1e-6), {dt:.2f}s (limit 5s)")


def test_03_kernel_psd(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    lowest = np.inf
    for _ in range(100):
        n = int(rng.integers(2, 31))
        d = int(rng.integers(1, 6))
        A = rng.uniform(0, 1, size=(n, d))
        assert len(np.unique(A, axis=0)) == n
        for kernel in (Kernel.SQ_EXP, Kernel.ABS_EXP):
            lowest = min(lowest, float(np.linalg.eigvalsh(gram_matrix(kernel, A)).min()))
    dt = time.perf_counter() - t0
    report(3, "Kernel PSD", lowest >= -1e-8 and dt < 10,
           f"100 sets x 2 kernels, min eigenvalue {lowest:.2e} (floor -1e-8), {dt:.2f}s (limit 10s)")


def test_04_exhaustive_correctness(report):
    t0 = time.perf_counter()
    l = prior_landscape(grid(3, 4, 5), "sq-exp", seed=11)
    best = l.scores.max()
    cfgs = [SearchConfig(Strategy.RANDOM, budget=60), SearchConfig(Strategy.GRID, budget=60)]
    cfgs += [SearchConfig(Strategy.GP, kernel=k, initial_random=5, budget=60) for k in Kernel]
    misses = 0
    for cfg in cfgs:
        for seed in range(20):
            tr = run_search(l, cfg, seed=seed)
            misses += tr.terminal_best[1] != best or tr.terminal_best[0] != l.argmax()
    dt = time.perf_counter() - t0
    runs = len(cfgs) * 20
    report(4, "Exhaustive correctness", misses == 0 and dt < 30,
           f"{runs - misses}/{runs} runs found the optimum, {dt:.2f}s (limit 30s)")


def test_05_random_search_analytic(report):
    t0 = time.perf_counter()
    l = Landscape(grid(10), np.random.default_rng(5).permutation(10).astype(float))
    traces = [run_search(l, SearchConfig(Strategy.RANDOM, budget=10), seed=s) for s in range(10_000)]
    rates = hit_rates(traces, l, ks=[1], checkpoints=range(1, 11)).rates[0]
    dev = float(np.max(np.abs(rates - np.arange(1, 11) / 10)))
    mean = float(evals_to_target(traces, l, 1).mean())
    dt = time.perf_counter() - t0
    report(5, "Random-search analytic oracle", dev <= 0.02 and abs(mean - 5.5) <= 0.1 and dt < 30,
           f"max |rate - b/10| {dev:.4f} (tol 0.02), mean evals {mean:.3f} (5.5 +/- 0.1), {dt:.2f}s (limit 30s)")


@pytest.fixture(scope="module")
def landscape_suite():
    """20 sq-exp prior landscapes on the 1215-point space, 100 runs per strategy."""
    t0 = time.perf_counter()
    out = []
    for seed in range(20):
        l = prior_landscape(TABLE1, "sq-exp", seed=seed)
        plan = ExperimentPlan(
            l,
            (
                ("gp-r10", SearchConfig(Strategy.GP, kernel="abs-exp", initial_random=10, budget=150)),
                ("gp-r50", SearchConfig(Strategy.GP, kernel="abs-exp", initial_random=50, budget=100)),
                ("random", SearchConfig(Strategy.RANDOM, budget=150)),
            ),
            runs_per_config=100,
        )
        traces = run_experiment(plan)
        evals = {n: summarize_evals(evals_to_target(traces[n], l, 5), 5) for n in ("gp-r10", "random")}
        at100 = {n: convergence(traces[n], t=100).mean[99] for n in ("gp-r10", "gp-r50")}
        out.append((evals, at100))
    return out, time.perf_counter() - t0


@pytest.mark.slow
def test_06_gp_beats_random(report, landscape_suite):
    suite, dt = landscape_suite
    ratios = [e["gp-r10"].mean / e["random"].mean for e, _ in suite]
    wins = sum(r <= 0.6 for r in ratios)
    report(6, "GP beats random", wins >= 16 and dt < 900,
           f"{wins}/20 landscapes with GP/random evals-to-top-5 <= 0.6 (need 16), "
           f"median ratio {np.median(ratios):.3f}, suite {dt:.0f}s (limit 900s)")


@pytest.mark.slow
def test_07_initial_random_effect(report, landscape_suite):
    suite, dt = landscape_suite
    wins = sum(c["gp-r10"] >= c["gp-r50"] for _, c in suite)
    report(7, "Initial-random-points effect", wins >= 15 and dt < 900,
           f"{wins}/20 landscapes with r=10 best-so-far at 100 >= r=50 (need 15), suite {dt:.0f}s (limit 900s)")


def test_08_determinism(report, tmp_path):
    land = tmp_path / "land.csv"
    assert main(["landscape", "--space", str(SPACE_FILE), "--kind", "prior", "--seed", "3", "--out", str(land)]) == 0
    first = tmp_path / "first"
    assert main(["experiment", "--space", str(SPACE_FILE), "--landscape", str(land), "--runs", "10",
                 "--budget", "100", "--out-dir", str(first)]) == 0
    manifest = first / "manifest.json"
    names = ["convergence.csv", "hit_rates.csv", "evals_to_target.csv"]
    reruns = []
    for tag in ("a", "b"):
        d = tmp_path / tag
        assert main(["experiment", "--manifest", str(manifest), "--out-dir", str(d)]) == 0
        reruns.append(d)
    same = all((first / n).read_bytes() == (r / n).read_bytes() for r in reruns for n in names)
    report(8, "Determinism", same, f"2 reruns from one manifest, {len(names)} statistics files byte-identical: {same}")


def test_09_heatmap_oracle(report):
    s = grid(4, 5, 6)
    l = Landscape(s, np.random.default_rng(9).normal(68, 4, size=s.size))
    cells = mismatched = 0
    for a in s.names:
        for b in s.names:
            if a == b:
                continue
            h = marginal_heatmap(l, a, b)
            ref = brute_heatmap(s, l.scores, a, b)
            cells += ref.size
            mismatched += int(np.sum(h.values != ref))
    report(9, "Marginal heatmap oracle", mismatched == 0, f"{cells - mismatched}/{cells} cells exactly equal")
