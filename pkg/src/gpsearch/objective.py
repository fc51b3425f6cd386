"""Score landscapes: total maps from combinations to scores.

A landscape stands in for an expensive black-box objective (for example
the F1-score of a model trained with a given hyperparameter combination).
Coverage of every ``flat_id`` is checked once at construction.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import gp
from .kernels import Kernel, parse_kernel
from .space import Encoding, SearchSpace, SpaceError

MAX_PRIOR_POINTS = 5000


class LandscapeError(ValueError):
    pass


class SynthKind(str, enum.Enum):
    QUADRATIC = "quadratic"
    INTERACTION = "interaction"


@dataclass(frozen=True, eq=False)
class Landscape:
    space: SearchSpace
    scores: np.ndarray
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.array(self.scores, dtype=float).ravel()
        if s.shape[0] != self.space.size:
            raise LandscapeError(f"{s.shape[0]} scores for a space of size {self.space.size}")
        if not np.all(np.isfinite(s)):
            raise LandscapeError(f"non-finite score at flat_id {int(np.argmin(np.isfinite(s)))}")
        s.setflags(write=False)
        object.__setattr__(self, "scores", s)

    def __call__(self, flat_id: int) -> float:
        return float(self.scores[flat_id])

    def __len__(self) -> int:
        return self.space.size

    def argmax(self) -> int:
        # np.argmax returns the first maximum, i.e. the lowest flat_id.
        return int(np.argmax(self.scores))


@dataclass(frozen=True)
class TopSet:
    k: int
    flat_ids: tuple[int, ...]

    def __contains__(self, flat_id) -> bool:
        return int(flat_id) in self.flat_ids

    def mask(self, size: int) -> np.ndarray:
        m = np.zeros(size, dtype=bool)
        m[list(self.flat_ids)] = True
        return m


def rank_order(l: Landscape) -> np.ndarray:
    """flat_ids sorted by score descending, ties by lower flat_id."""
    return np.argsort(-l.scores, kind="stable")


def top_set(l: Landscape, k: int) -> TopSet:
    if k < 1:
        raise ValueError("k must be >= 1")
    return TopSet(int(k), tuple(int(i) for i in rank_order(l)[:k]))


# -- tabulated files -------------------------------------------------------


def load_tabulated(space: SearchSpace, rows: Iterable[Sequence[str]], source: dict | None = None) -> Landscape:
    """Build a landscape from a header row followed by data rows.

    The header names every axis of ``space`` plus a ``score`` column;
    column order is free.
    """
    it = iter(rows)
    try:
        header = [h.strip() for h in next(it)]
    except StopIteration:
        raise LandscapeError("empty landscape table") from None
    if "score" not in header:
        raise LandscapeError("header has no 'score' column")
    missing = [n for n in space.names if n not in header]
    if missing:
        raise LandscapeError(f"header lacks axis column(s): {', '.join(missing)}")
    cols = [header.index(n) for n in space.names]
    score_col = header.index("score")

    scores = np.full(space.size, np.nan)
    seen = np.zeros(space.size, dtype=bool)
    for lineno, row in enumerate(it, 2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise LandscapeError(f"row {lineno}: {len(row)} fields, expected {len(header)}")
        try:
            c = space.from_values(float(row[i]) for i in cols)
            score = float(row[score_col])
        except (SpaceError, ValueError) as exc:
            raise LandscapeError(f"row {lineno}: {exc}") from None
        if seen[c.flat_id]:
            raise LandscapeError(f"row {lineno}: duplicate row for combination {space.labels_of(c)}")
        seen[c.flat_id] = True
        scores[c.flat_id] = score
    if not seen.all():
        first = int(np.argmin(seen))
        raise LandscapeError(
            f"missing combination flat_id={first} "
            f"({', '.join(f'{n}={v}' for n, v in zip(space.names, space.labels_of(first)))})"
        )
    return Landscape(space, scores, source or {"kind": "table"})


def format_score(x: float) -> str:
    # Shortest text that parses back to the same double.
    return repr(float(x))


def tabulated_rows(l: Landscape) -> list[list[str]]:
    """Header plus one row per combination in flat_id order."""
    rows = [list(l.space.names) + ["score"]]
    for fid in range(l.space.size):
        rows.append(list(l.space.labels_of(fid)) + [format_score(l.scores[fid])])
    return rows


def _sniff_delimiter(text: str) -> str:
    first = text.split("\n", 1)[0]
    for d in (",", "\t", ";"):
        if d in first:
            return d
    return ","


def read_landscape(path: str | Path, space: SearchSpace) -> Landscape:
    text = Path(path).read_text()
    rows = csv.reader(io.StringIO(text), delimiter=_sniff_delimiter(text))
    return load_tabulated(space, rows, {"kind": "table", "path": str(path)})


def write_rows(path: str | Path, rows: Iterable[Sequence], delimiter: str = ",") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerows(rows)


def write_landscape(path: str | Path, l: Landscape) -> None:
    write_rows(path, tabulated_rows(l), "\t" if str(path).endswith(".tsv") else ",")


# -- synthetic landscapes --------------------------------------------------


def synth_landscape(
    space: SearchSpace,
    kind: SynthKind | str,
    params: Sequence[float],
    pair: tuple[int, int] = (0, 1),
) -> Landscape:
    """Analytic landscape over unit-normalized coordinates ``u``.

    ``quadratic``: ``-sum_i (u_i - c_i)^2`` with ``params = c``.

    ``interaction``: the quadratic plus ``-lam * (u_a + u_b - 1)^2`` for
    the axis positions ``pair = (a, b)``, with ``params = c + [lam]``.
    The coupling puts a ridge along ``u_a + u_b = 1``, so high values on
    one axis pair best with low values on the other.
    """
    kind = SynthKind(kind)
    params = [float(p) for p in params]
    d = space.ndim
    want = d if kind is SynthKind.QUADRATIC else d + 1
    if len(params) != want:
        raise LandscapeError(f"{kind.value} landscape needs {want} params, got {len(params)}")
    u = space.encode_all(Encoding.UNIT)
    c = np.array(params[:d])
    scores = -np.sum((u - c) ** 2, axis=1)
    source = {"kind": kind.value, "params": params}
    if kind is SynthKind.INTERACTION:
        a, b = pair
        if a == b or not (0 <= a < d and 0 <= b < d):
            raise LandscapeError(f"invalid interaction pair {pair} for {d} axes")
        scores = scores - params[d] * (u[:, a] + u[:, b] - 1.0) ** 2
        source["pair"] = [space.names[a], space.names[b]]
    return Landscape(space, scores, source)


def prior_landscape(
    space: SearchSpace,
    kernel: Kernel | str,
    seed: int,
    scale: float = 1.0,
    offset: float = 0.0,
    jitter: float = gp.DEFAULT_JITTER,
) -> Landscape:
    """``offset + scale * draw`` with the draw taken from the GP prior.

    The draw lives on the unit-normalized grid. Jitter escalates by
    factors of 10 up to ``gp.MAX_JITTER`` if the Gram matrix will not
    factor.
    """
    kernel = parse_kernel(kernel)
    if space.size > MAX_PRIOR_POINTS:
        raise LandscapeError(f"space of size {space.size} exceeds the prior-sampling limit {MAX_PRIOR_POINTS}")
    X = space.encode_all(Encoding.UNIT)
    for j in gp.jitter_ladder(jitter, gp.MAX_JITTER):
        try:
            draw = gp.sample_prior(kernel, X, j, seed)
            break
        except gp.FactorizationError as exc:
            last = exc
    else:
        raise last
    source = {"kind": "prior", "kernel": kernel.value, "seed": int(seed), "scale": scale, "offset": offset, "jitter": j}
    return Landscape(space, offset + scale * draw, source)
