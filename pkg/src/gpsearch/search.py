"""GP search, random search and grid search over a landscape.

GP search evaluates ``initial_random`` combinations drawn uniformly
without replacement, then repeatedly fits an exact GP to everything
evaluated so far and evaluates the remaining combination with the
highest posterior mean. There is no exploration bonus; ties go to the
lowest ``flat_id``.

Random search and the initial phase of GP search take prefixes of the
same seeded permutation, so GP search with ``initial_random == budget``
is identical to random search with the same seed.
"""

from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import gp
from .kernels import Kernel, gram_matrix, parse_kernel
from .objective import Landscape
from .space import Encoding, SearchSpace


class Strategy(str, enum.Enum):
    GP = "gp"
    RANDOM = "random"
    GRID = "grid"

    def __str__(self) -> str:
        return self.value


class Phase(str, enum.Enum):
    RANDOM_INIT = "random-init"
    MODEL_GUIDED = "model-guided"
    EXHAUSTIVE = "exhaustive"

    def __str__(self) -> str:
        return self.value


class ConfigError(ValueError):
    def __init__(self, message: str, flag: str | None = None):
        super().__init__(message)
        self.flag = flag


class SearchError(RuntimeError):
    """GP search aborted; ``trace`` holds the steps completed so far."""

    def __init__(self, message: str, trace: "SearchTrace"):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class SearchConfig:
    strategy: Strategy = Strategy.GP
    kernel: Kernel = Kernel.ABS_EXP
    initial_random: int = 10
    budget: int = 100
    encoding: Encoding = Encoding.UNIT
    seed: int = 0
    jitter: float = gp.DEFAULT_JITTER
    max_jitter: float = gp.MAX_JITTER

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        object.__setattr__(self, "kernel", parse_kernel(self.kernel))
        object.__setattr__(self, "encoding", Encoding(self.encoding))

    def validate(self, space_size: int) -> None:
        if not 1 <= self.budget <= space_size:
            raise ConfigError(f"budget must be in [1, {space_size}], got {self.budget}", "budget")
        if self.strategy is Strategy.GP and not 1 <= self.initial_random <= self.budget:
            raise ConfigError(
                f"initial_random must be in [1, budget={self.budget}], got {self.initial_random}", "init-random"
            )
        if not 0 <= self.jitter <= self.max_jitter:
            raise ConfigError("jitter must satisfy 0 <= jitter <= max_jitter", "jitter")

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("strategy", "kernel", "encoding"):
            d[k] = d[k].value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SearchConfig":
        return cls(**d)


@dataclass(frozen=True)
class Step:
    iteration: int
    flat_id: int
    score: float
    best_so_far: float
    phase: Phase
    jitter: float | None = None


@dataclass(frozen=True, eq=False)
class SearchTrace:
    config: SearchConfig
    steps: tuple[Step, ...] = field(default_factory=tuple)

    @property
    def flat_ids(self) -> np.ndarray:
        return np.array([s.flat_id for s in self.steps], dtype=int)

    @property
    def scores(self) -> np.ndarray:
        return np.array([s.score for s in self.steps])

    @property
    def best_so_far(self) -> np.ndarray:
        return np.array([s.best_so_far for s in self.steps])

    @property
    def terminal_best(self) -> tuple[int, float]:
        """(flat_id, score) of the best evaluation; earliest wins ties."""
        i = int(np.argmax(self.scores))
        return self.steps[i].flat_id, self.steps[i].score

    def __len__(self) -> int:
        return len(self.steps)


class _TraceBuilder:
    def __init__(self, config: SearchConfig, landscape: Landscape):
        self.config = config
        self.landscape = landscape
        self.steps: list[Step] = []
        self.best = -np.inf

    def add(self, flat_id: int, phase: Phase, jitter: float | None = None) -> float:
        score = self.landscape(flat_id)
        self.best = max(self.best, score)
        self.steps.append(Step(len(self.steps) + 1, int(flat_id), score, self.best, phase, jitter))
        return score

    def build(self) -> SearchTrace:
        return SearchTrace(self.config, tuple(self.steps))


def permutation(size: int, seed: int) -> np.ndarray:
    """Seeded uniform permutation of ``range(size)`` (Fisher-Yates)."""
    return np.random.default_rng(seed).permutation(size)


MAX_CACHED_GRAM = 5000


@lru_cache(maxsize=8)
def candidate_gram(space: SearchSpace, kernel: Kernel, encoding: Encoding) -> np.ndarray:
    """Kernel matrix between all combinations of ``space``, read-only.

    Entries are bit-identical to ``gram_matrix`` on any subset, so slicing
    this matrix is equivalent to recomputing per fit.
    """
    K = gram_matrix(kernel, space.encode_all(encoding))
    K.setflags(write=False)
    return K


def run_gp_search(l: Landscape, cfg: SearchConfig) -> SearchTrace:
    if cfg.strategy is not Strategy.GP:
        raise ConfigError(f"run_gp_search needs strategy gp, got {cfg.strategy}", "strategy")
    cfg.validate(l.space.size)
    tb = _TraceBuilder(cfg, l)
    perm = permutation(l.space.size, cfg.seed)
    for fid in perm[: cfg.initial_random]:
        tb.add(fid, Phase.RANDOM_INIT)
    if cfg.budget == cfg.initial_random:
        return tb.build()

    X_all = l.space.encode_all(cfg.encoding)
    K = candidate_gram(l.space, cfg.kernel, cfg.encoding) if l.space.size <= MAX_CACHED_GRAM else None
    observed = [int(f) for f in perm[: cfg.initial_random]]
    remaining = np.ones(l.space.size, dtype=bool)
    remaining[observed] = False
    y = [s.score for s in tb.steps]
    # cross[:, j] = k(x, X[j]) for every candidate x; grows one column per pick.
    cross = np.empty((l.space.size, cfg.budget))
    for j, fid in enumerate(observed):
        cross[:, j] = K[:, fid] if K is not None else gram_matrix(cfg.kernel, X_all, X_all[fid])[:, 0]
    for _ in range(cfg.initial_random, cfg.budget):
        q = len(observed)
        try:
            model = gp.fit_escalating(cfg.kernel, X_all[observed], y, cfg.jitter, cfg.max_jitter, gram=cross[observed, :q])
        except gp.FactorizationError as exc:
            raise SearchError(f"GP fit failed at iteration {len(tb.steps) + 1}: {exc}", tb.build()) from exc
        mu = gp.posterior_mean(model, cross[:, :q])
        mu[~remaining] = -np.inf
        # np.argmax returns the first maximum, i.e. the lowest flat_id.
        pick = int(np.argmax(mu))
        remaining[pick] = False
        observed.append(pick)
        y.append(tb.add(pick, Phase.MODEL_GUIDED, model.jitter))
        if len(observed) < cfg.budget:
            cross[:, q] = K[:, pick] if K is not None else gram_matrix(cfg.kernel, X_all, X_all[pick])[:, 0]
    return tb.build()


def run_random_search(l: Landscape, cfg: SearchConfig) -> SearchTrace:
    if cfg.strategy is not Strategy.RANDOM:
        raise ConfigError(f"run_random_search needs strategy random, got {cfg.strategy}", "strategy")
    cfg.validate(l.space.size)
    tb = _TraceBuilder(cfg, l)
    for fid in permutation(l.space.size, cfg.seed)[: cfg.budget]:
        tb.add(fid, Phase.RANDOM_INIT)
    return tb.build()


def run_grid_search(l: Landscape, cfg: SearchConfig) -> SearchTrace:
    if cfg.strategy is not Strategy.GRID:
        raise ConfigError(f"run_grid_search needs strategy grid, got {cfg.strategy}", "strategy")
    cfg.validate(l.space.size)
    tb = _TraceBuilder(cfg, l)
    for fid in range(cfg.budget):
        tb.add(fid, Phase.EXHAUSTIVE)
    return tb.build()


_RUNNERS = {Strategy.GP: run_gp_search, Strategy.RANDOM: run_random_search, Strategy.GRID: run_grid_search}


def run_search(l: Landscape, cfg: SearchConfig, seed: int | None = None) -> SearchTrace:
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    return _RUNNERS[cfg.strategy](l, cfg)


# -- serialization ---------------------------------------------------------


def trace_records(trace: SearchTrace, space: SearchSpace) -> list[dict]:
    records = [{"type": "config", **trace.config.to_dict(), "axes": list(space.names)}]
    for s in trace.steps:
        rec = {
            "type": "step",
            "iteration": s.iteration,
            "flat_id": s.flat_id,
            "values": dict(zip(space.names, space.values_of(s.flat_id))),
            "score": s.score,
            "best_so_far": s.best_so_far,
            "phase": s.phase.value,
        }
        if s.jitter is not None:
            rec["jitter"] = s.jitter
        records.append(rec)
    return records


def write_trace(path: str | Path, trace: SearchTrace, space: SearchSpace) -> None:
    with open(path, "w") as fh:
        for rec in trace_records(trace, space):
            fh.write(json.dumps(rec, sort_keys=False) + "\n")


def read_trace(path: str | Path) -> SearchTrace:
    config = None
    steps = []
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec.get("type") == "config":
                d = {k: v for k, v in rec.items() if k not in ("type", "axes")}
                config = SearchConfig.from_dict(d)
            else:
                steps.append(
                    Step(rec["iteration"], rec["flat_id"], rec["score"], rec["best_so_far"], Phase(rec["phase"]), rec.get("jitter"))
                )
    if config is None:
        raise ValueError(f"{path}: no config header record")
    return SearchTrace(config, tuple(steps))
