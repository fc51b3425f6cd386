"""Parameter-free covariance functions and Gram matrices.

Four kernels are provided: linear, cubic, absolute exponential
(Ornstein-Uhlenbeck) and squared exponential. None of them carries a
length scale or signal variance; inputs are expected to be rescaled by
the caller (see :mod:`gpsearch.space`).

The absolute exponential kernel is ``exp(-||x - y||)``. A form with a
positive exponent grows with distance and is not a covariance, so it is
not offered.
"""

from __future__ import annotations

import enum

import numpy as np


class Kernel(str, enum.Enum):
    LINEAR = "linear"
    CUBIC = "cubic"
    ABS_EXP = "abs-exp"
    SQ_EXP = "sq-exp"

    @property
    def stationary(self) -> bool:
        return self in (Kernel.ABS_EXP, Kernel.SQ_EXP)

    def __str__(self) -> str:
        return self.value


def parse_kernel(name: str | Kernel) -> Kernel:
    """Look up a kernel by its CLI name (case-insensitive)."""
    if isinstance(name, Kernel):
        return name
    try:
        return Kernel(name.strip().lower())
    except ValueError:
        choices = ", ".join(k.value for k in Kernel)
        raise ValueError(f"unknown kernel {name!r} (choose from {choices})") from None


def _as_points(A, name: str) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[None, :]
    if A.ndim != 2 or A.shape[0] == 0 or A.shape[1] == 0:
        raise ValueError(f"{name} must be a non-empty list of vectors")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite entries")
    return A


def _from_dot(kernel: Kernel, s: np.ndarray) -> np.ndarray:
    if kernel is Kernel.LINEAR:
        return s
    s2 = s * s
    return 3.0 * (s2 + 2.0 * (s2 * s))


def _from_sqdist(kernel: Kernel, d2: np.ndarray) -> np.ndarray:
    if kernel is Kernel.SQ_EXP:
        return np.exp(-0.5 * d2)
    return np.exp(-np.sqrt(d2))


def eval_kernel(kernel: Kernel | str, x, y) -> float:
    kernel = parse_kernel(kernel)
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size == 0 or x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.size} vs {y.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("kernel inputs must be finite")
    if kernel.stationary:
        d = x - y
        return float(_from_sqdist(kernel, np.sum(d * d)))
    return float(_from_dot(kernel, np.sum(x * y)))


def gram_matrix(kernel: Kernel | str, A, B=None) -> np.ndarray:
    """Matrix of ``k(A[i], B[j])``; ``B`` defaults to ``A``.

    Every entry is computed by the same elementwise reduction as
    :func:`eval_kernel`, so ``gram_matrix(k, A, B).T`` equals
    ``gram_matrix(k, B, A)`` bit for bit and square Gram matrices are
    exactly symmetric. No ``|a|^2 + |b|^2 - 2ab`` expansion is used.
    """
    kernel = parse_kernel(kernel)
    A = _as_points(A, "A")
    B = A if B is None else _as_points(B, "B")
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    out = np.empty((A.shape[0], B.shape[0]))
    # Row blocks bound the (rows, |B|, d) temporary to a few tens of MB.
    step = max(1, 2_000_000 // max(1, B.shape[0] * A.shape[1]))
    for start in range(0, A.shape[0], step):
        a = A[start : start + step, None, :]
        if kernel.stationary:
            d = a - B[None, :, :]
            out[start : start + step] = _from_sqdist(kernel, np.sum(d * d, axis=-1))
        else:
            out[start : start + step] = _from_dot(kernel, np.sum(a * B[None, :, :], axis=-1))
    return out
