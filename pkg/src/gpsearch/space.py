"""Finite ordinal search spaces.

A space is an ordered tuple of axes, each a strictly increasing list of
numeric levels. Combinations are identified by a row-major ``flat_id``
over the axes in declaration order; every file format and trace uses that
id as the canonical identity of a combination.

Space files have one axis per line::

    # comment
    h: 3, 4, 5
    n: 50, 100, 250, 500, 1000
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np


class Encoding(str, enum.Enum):
    RAW = "raw"
    UNIT = "unit"

    def __str__(self) -> str:
        return self.value


class SpaceError(ValueError):
    pass


def format_level(v: float) -> str:
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple[float, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.name or not self.name.replace("_", "a").replace("-", "a").isalnum():
            raise SpaceError(f"invalid axis name {self.name!r}")
        values = tuple(float(v) for v in self.values)
        if not values:
            raise SpaceError(f"axis {self.name!r} has no values")
        if not all(math.isfinite(v) for v in values):
            raise SpaceError(f"axis {self.name!r} has non-finite values")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise SpaceError(f"axis {self.name!r}: values must be strictly increasing")
        labels = tuple(self.labels) or tuple(format_level(v) for v in values)
        if len(labels) != len(values):
            raise SpaceError(f"axis {self.name!r}: {len(labels)} labels for {len(values)} values")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.values)

    def index(self, value: float) -> int:
        try:
            return self._lookup[float(value)]
        except KeyError:
            raise SpaceError(f"axis {self.name!r} has no value {value!r}") from None

    @cached_property
    def _lookup(self) -> dict[float, int]:
        return {v: i for i, v in enumerate(self.values)}

    def normalized(self) -> np.ndarray:
        v = np.asarray(self.values)
        if len(v) == 1:
            return np.array([0.5])
        return (v - v[0]) / (v[-1] - v[0])


@dataclass(frozen=True)
class Combination:
    indices: tuple[int, ...]
    flat_id: int


@dataclass(frozen=True)
class SearchSpace:
    axes: tuple[Axis, ...]

    def __post_init__(self):
        axes = tuple(self.axes)
        if not axes:
            raise SpaceError("empty space: no axes")
        names = [a.name for a in axes]
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            raise SpaceError(f"duplicate axis name(s): {', '.join(sorted(dup))}")
        object.__setattr__(self, "axes", axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.axes)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.axes)

    @property
    def ndim(self) -> int:
        return len(self.axes)

    def axis(self, name: str) -> Axis:
        for a in self.axes:
            if a.name == name:
                return a
        raise SpaceError(f"unknown axis {name!r} (have {', '.join(self.names)})")

    def axis_position(self, name: str) -> int:
        return self.names.index(self.axis(name).name)

    def combination(self, flat_id: int) -> Combination:
        flat_id = int(flat_id)
        if not 0 <= flat_id < self.size:
            raise SpaceError(f"flat_id {flat_id} outside [0, {self.size})")
        idx = np.unravel_index(flat_id, self.shape)
        return Combination(tuple(int(i) for i in idx), flat_id)

    def from_indices(self, indices) -> Combination:
        indices = tuple(int(i) for i in indices)
        if len(indices) != self.ndim or any(not 0 <= i < n for i, n in zip(indices, self.shape)):
            raise SpaceError(f"indices {indices} do not fit shape {self.shape}")
        return Combination(indices, int(np.ravel_multi_index(indices, self.shape)))

    def from_values(self, values) -> Combination:
        values = list(values)
        if len(values) != self.ndim:
            raise SpaceError(f"expected {self.ndim} values, got {len(values)}")
        return self.from_indices(a.index(v) for a, v in zip(self.axes, values))

    def values_of(self, c: Combination | int) -> tuple[float, ...]:
        c = self._coerce(c)
        return tuple(a.values[i] for a, i in zip(self.axes, c.indices))

    def labels_of(self, c: Combination | int) -> tuple[str, ...]:
        c = self._coerce(c)
        return tuple(a.labels[i] for a, i in zip(self.axes, c.indices))

    def enumerate(self) -> list[Combination]:
        return enumerate_space(self)

    def _coerce(self, c: Combination | int) -> Combination:
        if isinstance(c, Combination):
            if len(c.indices) != self.ndim or self.from_indices(c.indices).flat_id != c.flat_id:
                raise SpaceError(f"combination {c} does not belong to this space")
            return c
        return self.combination(c)

    def encode_all(self, scheme: Encoding | str = Encoding.UNIT) -> np.ndarray:
        """Encoded vectors of every combination, shape (size, ndim), flat_id order."""
        scheme = Encoding(scheme)
        cols = [a.normalized() if scheme is Encoding.UNIT else np.asarray(a.values) for a in self.axes]
        grids = np.meshgrid(*cols, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def index_grid(self) -> np.ndarray:
        """Per-axis indices of every combination, shape (size, ndim)."""
        return np.stack(np.unravel_index(np.arange(self.size), self.shape), axis=1)


def enumerate_space(space: SearchSpace) -> list[Combination]:
    """All combinations in row-major ``flat_id`` order."""
    return [Combination(tuple(int(i) for i in row), k) for k, row in enumerate(space.index_grid())]


def encode(space: SearchSpace, c: Combination | int, scheme: Encoding | str = Encoding.UNIT) -> np.ndarray:
    c = space._coerce(c)
    scheme = Encoding(scheme)
    if scheme is Encoding.RAW:
        return np.array(space.values_of(c))
    return np.array([a.normalized()[i] for a, i in zip(space.axes, c.indices)])


def parse_space(text: str) -> SearchSpace:
    axes = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, rest = line.partition(":")
        if not sep:
            raise SpaceError(f"line {lineno}: expected '<name>: v1, v2, ...'")
        labels = [t.strip() for t in rest.split(",")]
        if not rest.strip() or any(not t for t in labels):
            raise SpaceError(f"line {lineno}: axis {name.strip()!r} has an empty value list")
        try:
            values = [float(t) for t in labels]
        except ValueError as exc:
            raise SpaceError(f"line {lineno}: {exc}") from None
        axes.append(Axis(name.strip(), tuple(values), tuple(labels)))
    return SearchSpace(tuple(axes))


def load_space(path: str | Path) -> SearchSpace:
    return parse_space(Path(path).read_text())


def format_space(space: SearchSpace) -> str:
    return "".join(f"{a.name}: {', '.join(a.labels)}\n" for a in space.axes)


# Filter size, number of filters, dropout rate, and two history sizes of
# the dialog-act classifier: 3 * 5 * 9 * 3 * 3 = 1215 combinations.
TABLE1 = parse_space(
    """
    h: 3, 4, 5
    n: 50, 100, 250, 500, 1000
    p: 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9
    d1: 1, 2, 3
    d2: 1, 2, 3
    """
)
