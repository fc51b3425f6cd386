"""Exact Gaussian-process regression over finite point sets.

The prior mean is a constant equal to the average of the training
outputs, recomputed at every fit. Conditioning uses the textbook identity

    mu    = m + K(X*, X) [K(X, X) + jitter I]^-1 (f - m)
    Sigma = K(X*, X*) - K(X*, X) [K(X, X) + jitter I]^-1 K(X, X*)

applied through one Cholesky factor; no matrix is ever inverted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .kernels import Kernel, gram_matrix, parse_kernel

DEFAULT_JITTER = 1e-8
MAX_JITTER = 1e-2


class FactorizationError(np.linalg.LinAlgError):
    """K(X, X) + jitter*I could not be Cholesky-factored."""

    def __init__(self, jitter: float, detail: str = ""):
        self.jitter = jitter
        msg = f"Gram matrix not positive definite with jitter={jitter:g}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def cholesky(K: np.ndarray, jitter: float) -> np.ndarray:
    """Lower Cholesky factor of ``K + jitter*I`` or :class:`FactorizationError`."""
    A = K + jitter * np.eye(K.shape[0])
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(jitter, str(exc)) from None
    if not np.all(np.isfinite(L)):
        raise FactorizationError(jitter, "non-finite factor")
    return L


@dataclass(frozen=True, eq=False)
class GPModel:
    kernel: Kernel
    train_inputs: np.ndarray
    train_outputs: np.ndarray
    jitter: float
    mean_offset: float
    factor: np.ndarray
    weights: np.ndarray  # [K + jitter I]^-1 (f - m)

    @property
    def n_train(self) -> int:
        return self.train_inputs.shape[0]


@dataclass(frozen=True, eq=False)
class Posterior:
    mean: np.ndarray
    covariance: np.ndarray | None = None

    @property
    def variance(self) -> np.ndarray:
        if self.covariance is None:
            raise ValueError("posterior was computed in mean-only mode")
        return np.clip(np.diag(self.covariance), 0.0, None)


def _check_training(X, f):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    f = np.asarray(f, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("need at least one training point")
    if X.shape[0] != f.shape[0]:
        raise ValueError(f"{X.shape[0]} inputs but {f.shape[0]} outputs")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(f))):
        raise ValueError("training data must be finite")
    return X, f


def fit(kernel: Kernel | str, X, f, jitter: float = 0.0, gram: np.ndarray | None = None) -> GPModel:
    """Fit with a single jitter value.

    ``gram`` may carry a precomputed ``K(X, X)``; it must agree with
    ``gram_matrix(kernel, X)``.
    """
    kernel = parse_kernel(kernel)
    if jitter < 0:
        raise ValueError("jitter must be nonnegative")
    X, f = _check_training(X, f)
    K = gram_matrix(kernel, X) if gram is None else np.asarray(gram, dtype=float)
    L = cholesky(K, jitter)
    # Shifted mean: exact when f is constant, so the residual vanishes.
    m = float(f[0] + np.mean(f - f[0]))
    alpha = cho_solve((L, True), f - m, check_finite=False)
    return GPModel(kernel, _readonly(X), _readonly(f), float(jitter), m, _readonly(L), _readonly(alpha))


def fit_escalating(
    kernel: Kernel | str,
    X,
    f,
    jitter: float = DEFAULT_JITTER,
    max_jitter: float = MAX_JITTER,
    gram: np.ndarray | None = None,
) -> GPModel:
    """Fit, multiplying the jitter by 10 after each failed factorization.

    Raises the last :class:`FactorizationError` once ``max_jitter`` has
    been tried.
    """
    kernel = parse_kernel(kernel)
    X, f = _check_training(X, f)
    if gram is None:
        gram = gram_matrix(kernel, X)
    for j in jitter_ladder(jitter, max_jitter):
        try:
            return fit(kernel, X, f, j, gram=gram)
        except FactorizationError as exc:
            last = exc
    raise last


def jitter_ladder(start: float = DEFAULT_JITTER, stop: float = MAX_JITTER) -> list[float]:
    if start <= 0:
        ladder = [0.0]
        start = DEFAULT_JITTER
    else:
        ladder = []
    j = start
    while j <= stop * (1 + 1e-9):
        ladder.append(j)
        j *= 10.0
    return ladder or [start]


def posterior(
    model: GPModel,
    Xstar,
    want_covariance: bool = False,
    cross: np.ndarray | None = None,
    prior_cov: np.ndarray | None = None,
) -> Posterior:
    """Posterior over ``Xstar`` given the fitted model.

    ``cross`` may carry a precomputed ``K(X*, X)`` and ``prior_cov`` a
    precomputed ``K(X*, X*)``.
    """
    Xs = np.asarray(Xstar, dtype=float)
    if Xs.ndim == 1:
        Xs = Xs[:, None] if model.train_inputs.shape[1] == 1 else Xs[None, :]
    if Xs.shape[0] == 0:
        raise ValueError("no query points")
    if Xs.shape[1] != model.train_inputs.shape[1]:
        raise ValueError(f"query dimension {Xs.shape[1]} != training dimension {model.train_inputs.shape[1]}")
    Ks = gram_matrix(model.kernel, Xs, model.train_inputs) if cross is None else np.asarray(cross)
    mean = model.mean_offset + Ks @ model.weights
    if not want_covariance:
        return Posterior(mean)
    V = solve_triangular(model.factor, Ks.T, lower=True, check_finite=False)
    Kss = gram_matrix(model.kernel, Xs) if prior_cov is None else np.asarray(prior_cov)
    cov = Kss - V.T @ V
    cov = 0.5 * (cov + cov.T)
    return Posterior(mean, cov)


def posterior_mean(model: GPModel, cross: np.ndarray) -> np.ndarray:
    """Mean-only fast path from a precomputed ``K(X*, X)``."""
    return model.mean_offset + cross @ model.weights


def sample_prior(kernel: Kernel | str, X, jitter: float = DEFAULT_JITTER, seed: int = 0) -> np.ndarray:
    """One draw from N(0, K(X, X) + jitter*I), deterministic in ``seed``."""
    kernel = parse_kernel(kernel)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    L = cholesky(gram_matrix(kernel, X), jitter)
    z = np.random.default_rng(seed).standard_normal(X.shape[0])
    return L @ z
