"""Repeated-run experiments and their statistics.

Run ``i`` of every configuration uses seed ``base_seed + i``. All
statistics count every evaluation, including the initial random ones, so
iteration ``b`` means "after ``b`` evaluations of the objective".
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .objective import Landscape, format_score, rank_order, tabulated_rows, top_set, write_rows
from .search import SearchConfig, SearchError, SearchTrace, Strategy, run_search

NOT_REACHED = -1


class ExperimentError(RuntimeError):
    def __init__(self, message: str, config_name: str, seed: int):
        super().__init__(f"[{config_name} seed={seed}] {message}")
        self.config_name = config_name
        self.seed = seed


def fmt(x: float) -> str:
    """Fixed 6-significant-digit text used by every statistics file."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{x:.6g}"


@dataclass(frozen=True)
class ExperimentPlan:
    landscape: Landscape
    configs: tuple[tuple[str, SearchConfig], ...]
    runs_per_config: int = 100
    base_seed: int = 0

    def __post_init__(self):
        configs = tuple((str(n), c) for n, c in self.configs)
        names = [n for n, _ in configs]
        if not configs:
            raise ValueError("plan has no configurations")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate config names in {names}")
        if self.runs_per_config < 1:
            raise ValueError("runs_per_config must be >= 1")
        for name, cfg in configs:
            cfg.validate(self.landscape.space.size)
        object.__setattr__(self, "configs", configs)

    @property
    def seeds(self) -> range:
        return range(self.base_seed, self.base_seed + self.runs_per_config)


def _run_one(args) -> SearchTrace:
    landscape, name, cfg, seed = args
    try:
        return run_search(landscape, cfg, seed=seed)
    except SearchError as exc:
        raise ExperimentError(str(exc), name, seed) from exc


def run_experiment(plan: ExperimentPlan, workers: int = 1) -> dict[str, list[SearchTrace]]:
    """Traces grouped by config name, each list ordered by seed."""
    jobs = [(plan.landscape, name, cfg, seed) for name, cfg in plan.configs for seed in plan.seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        traces = [_run_one(j) for j in jobs]
    out: dict[str, list[SearchTrace]] = {}
    for (_, name, _, _), tr in zip(jobs, traces):
        out.setdefault(name, []).append(tr)
    return out


# -- statistics -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConvergenceCurve:
    name: str
    mean: np.ndarray
    std: np.ndarray

    @property
    def budget(self) -> int:
        return len(self.mean)


@dataclass(frozen=True, eq=False)
class HitRateReport:
    name: str
    ks: tuple[int, ...]
    checkpoints: tuple[int, ...]
    rates: np.ndarray  # shape (len(ks), len(checkpoints))

    def rate(self, k: int, checkpoint: int) -> float:
        return float(self.rates[self.ks.index(k), self.checkpoints.index(checkpoint)])


@dataclass(frozen=True)
class EvalsSummary:
    name: str
    k: int
    runs: int
    reached: int
    mean: float
    median: float

    @property
    def reach_fraction(self) -> float:
        return self.reached / self.runs


def _require(traces: Sequence[SearchTrace]) -> None:
    if not traces:
        raise ValueError("empty trace set")


def best_so_far_matrix(traces: Sequence[SearchTrace], t: int | None = None) -> np.ndarray:
    _require(traces)
    t = min(len(tr) for tr in traces) if t is None else t
    if any(len(tr) < t for tr in traces):
        raise ValueError(f"every trace needs at least {t} steps")
    return np.array([tr.best_so_far[:t] for tr in traces])


def convergence(traces: Sequence[SearchTrace], t: int | None = None, name: str = "") -> ConvergenceCurve:
    """Pointwise mean (and population std) of best-so-far over traces."""
    B = best_so_far_matrix(traces, t)
    # Row-wise accumulation keeps the reduction order fixed by seed.
    total = np.zeros(B.shape[1])
    for row in B:
        total += row
    mean = total / B.shape[0]
    std = np.sqrt(np.mean((B - mean) ** 2, axis=0))
    return ConvergenceCurve(name, mean, std)


def _first_hits(traces: Sequence[SearchTrace], l: Landscape, k: int) -> np.ndarray:
    """1-based iteration of the first evaluated top-k member per trace."""
    member = top_set(l, k).mask(l.space.size)
    out = np.full(len(traces), NOT_REACHED, dtype=int)
    for i, tr in enumerate(traces):
        hits = np.flatnonzero(member[tr.flat_ids])
        if hits.size:
            out[i] = hits[0] + 1
    return out


def hit_rates(
    traces: Sequence[SearchTrace],
    l: Landscape,
    ks: Sequence[int] = (1, 3, 5),
    checkpoints: Sequence[int] = (50, 100, 200),
    name: str = "",
) -> HitRateReport:
    """Fraction of runs that evaluated a top-k combination within b steps."""
    _require(traces)
    ks = tuple(sorted(int(k) for k in ks))
    checkpoints = tuple(sorted(int(b) for b in checkpoints))
    shortest = min(len(tr) for tr in traces)
    if checkpoints and checkpoints[-1] > shortest:
        raise ValueError(f"checkpoint {checkpoints[-1]} exceeds the shortest trace ({shortest} steps)")
    rates = np.zeros((len(ks), len(checkpoints)))
    for i, k in enumerate(ks):
        first = _first_hits(traces, l, k)
        reached = first != NOT_REACHED
        for j, b in enumerate(checkpoints):
            rates[i, j] = np.count_nonzero(reached & (first <= b)) / len(traces)
    return HitRateReport(name, ks, checkpoints, rates)


def evals_to_target(traces: Sequence[SearchTrace], l: Landscape, k: int = 1) -> np.ndarray:
    """Per trace, the first iteration whose best-so-far is a top-k
    combination, or ``NOT_REACHED``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return _first_hits(traces, l, k)


def summarize_evals(evals: np.ndarray, k: int, name: str = "") -> EvalsSummary:
    evals = np.asarray(evals)
    reached = evals[evals != NOT_REACHED]
    mean = float(np.mean(reached)) if reached.size else math.nan
    median = float(np.median(reached)) if reached.size else math.nan
    return EvalsSummary(name, k, int(evals.size), int(reached.size), mean, median)


def speedup(baseline: EvalsSummary, candidate: EvalsSummary) -> float:
    """Mean evals-to-target of the baseline divided by the candidate's."""
    if candidate.reached == 0 or baseline.reached == 0:
        return math.nan
    return baseline.mean / candidate.mean


# -- landscape exports --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Heatmap:
    axis_a: str
    axis_b: str
    labels_a: tuple[str, ...]
    labels_b: tuple[str, ...]
    values: np.ndarray  # shape (|a|, |b|)
    count: int  # combinations averaged per cell


def marginal_heatmap(l: Landscape, axis_a: str, axis_b: str) -> Heatmap:
    """Mean score for every (a, b) level pair over all other axes."""
    space = l.space
    ia, ib = space.axis_position(axis_a), space.axis_position(axis_b)
    if ia == ib:
        raise ValueError("heatmap axes must be distinct")
    cube = np.moveaxis(l.scores.reshape(space.shape), (ia, ib), (0, 1))
    cells = cube.reshape(cube.shape[0], cube.shape[1], -1)
    # fsum is exactly rounded, so the cell value does not depend on order.
    values = np.array([[math.fsum(cells[i, j]) / cells.shape[2] for j in range(cells.shape[1])] for i in range(cells.shape[0])])
    return Heatmap(axis_a, axis_b, space.axis(axis_a).labels, space.axis(axis_b).labels, values, cells.shape[2])


def parallel_coordinates_rows(l: Landscape) -> list[list[str]]:
    """One polyline per combination: axis values plus score, flat_id order."""
    return tabulated_rows(l)


def topk_rows(l: Landscape, k: int) -> list[list[str]]:
    order = rank_order(l)[: max(1, k)]
    rows = [["rank", "flat_id", *l.space.names, "score"]]
    for r, fid in enumerate(order, 1):
        rows.append([str(r), str(int(fid)), *l.space.labels_of(int(fid)), format_score(l.scores[fid])])
    return rows


def heatmap_rows(h: Heatmap) -> list[list[str]]:
    rows = [[f"{h.axis_a}\\{h.axis_b}", *h.labels_b]]
    for la, vals in zip(h.labels_a, h.values):
        rows.append([la, *(fmt(v) for v in vals)])
    return rows


# -- statistics files ----------------------------------------------------------


def convergence_rows(curves: Sequence[ConvergenceCurve]) -> list[list[str]]:
    rows = [["config", "iteration", "mean_best", "std_best"]]
    for c in curves:
        for i, (m, s) in enumerate(zip(c.mean, c.std), 1):
            rows.append([c.name, str(i), fmt(m), fmt(s)])
    return rows


def hit_rate_rows(reports: Sequence[HitRateReport]) -> list[list[str]]:
    rows = [["config", "k", "checkpoint", "hit_rate"]]
    for r in reports:
        for i, k in enumerate(r.ks):
            for j, b in enumerate(r.checkpoints):
                rows.append([r.name, str(k), str(b), fmt(r.rates[i, j])])
    return rows


def evals_rows(summaries: Sequence[EvalsSummary], baseline: EvalsSummary | None = None) -> list[list[str]]:
    rows = [["config", "k", "runs", "reached", "reach_fraction", "mean_evals", "median_evals", "speedup_vs_random"]]
    for s in summaries:
        sp = speedup(baseline, s) if baseline is not None else math.nan
        rows.append([s.name, str(s.k), str(s.runs), str(s.reached), fmt(s.reach_fraction), fmt(s.mean), fmt(s.median), fmt(sp)])
    return rows


@dataclass
class ExperimentStats:
    curves: list[ConvergenceCurve]
    hits: list[HitRateReport]
    evals: list[EvalsSummary]
    baseline: EvalsSummary | None


def analyze(
    plan: ExperimentPlan,
    traces: dict[str, list[SearchTrace]],
    ks: Sequence[int] = (1, 3, 5),
    checkpoints: Sequence[int] = (50, 100, 200),
    target_k: int = 1,
) -> ExperimentStats:
    l = plan.landscape
    curves, hits, evals = [], [], []
    baseline = None
    for name, cfg in plan.configs:
        trs = traces[name]
        curves.append(convergence(trs, name=name))
        cps = [b for b in checkpoints if b <= cfg.budget]
        hits.append(hit_rates(trs, l, ks, cps, name=name))
        summary = summarize_evals(evals_to_target(trs, l, target_k), target_k, name)
        evals.append(summary)
        if baseline is None and cfg.strategy is Strategy.RANDOM:
            baseline = summary
    return ExperimentStats(curves, hits, evals, baseline)


STAT_FILES = ("convergence.csv", "hit_rates.csv", "evals_to_target.csv")


def write_stats(out_dir: str | Path, stats: ExperimentStats) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / f for f in STAT_FILES]
    write_rows(paths[0], convergence_rows(stats.curves))
    write_rows(paths[1], hit_rate_rows(stats.hits))
    write_rows(paths[2], evals_rows(stats.evals, stats.baseline))
    return paths


def write_manifest(path: str | Path, manifest: dict) -> None:
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def plan_configs_from_dicts(items: Sequence[dict]) -> tuple[tuple[str, SearchConfig], ...]:
    out = []
    for d in items:
        d = dict(d)
        name = d.pop("name")
        out.append((name, SearchConfig.from_dict(d)))
    return tuple(out)


def plan_configs_to_dicts(plan: ExperimentPlan) -> list[dict]:
    return [{"name": n, **c.to_dict()} for n, c in plan.configs]
