"""Gaussian-process surrogate on an integer grid.

The kernel is Matern 5/2 evaluated on integer-rounded inputs, so every point
inside one integer cell shares identical covariance with the rest of the
space. After an observation, the posterior variance anywhere in its cell
collapses to the noise floor, which keeps acquisition from re-proposing the
cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.spatial.distance import cdist

SQRT5 = math.sqrt(5.0)
JITTER_LADDER = (0.0, 1e-7, 1e-6, 1e-5, 1e-4)


class DuplicateObservationError(ValueError):
    """Two observations fell into the same integer cell."""


class FactorizationError(RuntimeError):
    """Kernel matrix stayed indefinite after the full jitter ladder."""


@dataclass(frozen=True)
class KernelParams:
    signal_variance: float
    lengthscales: tuple[float, ...]
    noise_variance: float = 1e-8

    def __post_init__(self):
        if self.signal_variance <= 0:
            raise ValueError("signal_variance must be positive")
        if any(l <= 0 for l in self.lengthscales):
            raise ValueError("lengthscales must be positive")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be non-negative")


def round_half_away(x) -> np.ndarray:
    """Component-wise nearest integer, halves rounding away from zero."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def matern52(a, b, params: KernelParams) -> float:
    """Matern 5/2 covariance between two points with per-dimension scaling."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    ell = np.asarray(params.lengthscales, dtype=float)
    r = math.sqrt(float(np.sum(((a - b) / ell) ** 2)))
    return params.signal_variance * (1.0 + SQRT5 * r + 5.0 * r * r / 3.0) * math.exp(-SQRT5 * r)


def rounded_kernel(a, b, params: KernelParams) -> float:
    """Matern 5/2 on integer-rounded inputs; identical inside one cell."""
    return matern52(round_half_away(a), round_half_away(b), params)


def _kernel_matrix(A: np.ndarray, B: np.ndarray, params: KernelParams) -> np.ndarray:
    """Vectorized rounded-Matern matrix between two already-rounded sets."""
    ell = np.asarray(params.lengthscales, dtype=float)
    r = cdist(A / ell, B / ell)
    return params.signal_variance * (1.0 + SQRT5 * r + 5.0 * r * r / 3.0) * np.exp(-SQRT5 * r)


@dataclass(frozen=True, eq=False)
class GPState:
    """Immutable fitted surrogate: inputs, values, and Cholesky factor of
    the noisy kernel matrix."""

    inputs: np.ndarray  # rounded, shape (n, d)
    values: np.ndarray  # shape (n,)
    chol: np.ndarray  # lower-triangular factor of K + diag(noise)
    alpha: np.ndarray  # (K + diag(noise))^-1 (values - mean_offset)
    params: KernelParams
    mean_offset: float
    obs_noise: np.ndarray  # per-observation noise variances actually used
    jitter: float  # extra diagonal needed to factorize

    @property
    def n_obs(self) -> int:
        return len(self.values)


def fit(
    inputs: Sequence,
    values: Sequence[float],
    params: KernelParams,
    mean_offset: float = 0.0,
    obs_noise: Optional[Sequence[float]] = None,
) -> GPState:
    """Fit the surrogate on observed (input, value) pairs.

    Inputs are rounded component-wise first; two observations in the same
    integer cell are an error. `obs_noise` overrides the scalar noise with a
    per-observation noise variance (used to down-weight estimated values).
    Factorization retries the jitter ladder up to 1e-4 before giving up.
    """
    X = round_half_away(np.atleast_2d(np.asarray(inputs, dtype=float)))
    y = np.asarray(values, dtype=float)
    if len(X) != len(y):
        raise ValueError("inputs and values must have equal length")
    if len(y) == 0:
        raise ValueError("need at least one observation")
    cells = {tuple(row) for row in X}
    if len(cells) != len(X):
        raise DuplicateObservationError("two observations share a rounded cell")

    if obs_noise is None:
        noise = np.full(len(y), params.noise_variance)
    else:
        noise = np.asarray(obs_noise, dtype=float)
        if noise.shape != y.shape:
            raise ValueError("obs_noise length must match values")

    K = _kernel_matrix(X, X, params)
    L = None
    used_jitter = 0.0
    for jitter in JITTER_LADDER:
        try:
            L = np.linalg.cholesky(K + np.diag(noise) + jitter * np.eye(len(y)))
            used_jitter = jitter
            break
        except np.linalg.LinAlgError:
            continue
    if L is None:
        raise FactorizationError("kernel matrix not positive definite with jitter <= 1e-4")

    alpha = cho_solve((L, True), y - mean_offset)
    return GPState(
        inputs=X,
        values=y,
        chol=L,
        alpha=alpha,
        params=params,
        mean_offset=mean_offset,
        obs_noise=noise,
        jitter=used_jitter,
    )


def posterior_batch(state: GPState, points) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance at many points at once."""
    P = round_half_away(np.atleast_2d(np.asarray(points, dtype=float)))
    k_star = _kernel_matrix(state.inputs, P, state.params)  # (n_obs, n_pts)
    mean = state.mean_offset + k_star.T @ state.alpha
    v = solve_triangular(state.chol, k_star, lower=True)
    var = state.params.signal_variance - np.sum(v * v, axis=0)
    return mean, np.maximum(var, 0.0)


def posterior(state: GPState, x) -> tuple[float, float]:
    """Posterior mean and variance at one point (variance clamped to >= 0)."""
    mean, var = posterior_batch(state, [np.asarray(x, dtype=float)])
    return float(mean[0]), float(var[0])


def log_marginal_likelihood(state: GPState) -> float:
    y = state.values - state.mean_offset
    n = state.n_obs
    return float(
        -0.5 * y @ state.alpha
        - np.sum(np.log(np.diag(state.chol)))
        - 0.5 * n * math.log(2.0 * math.pi)
    )


def default_params(
    values: Sequence[float],
    upper_bounds: Sequence[int],
    noise_variance: float = 1e-8,
) -> KernelParams:
    """Heuristic hyperparameters: lengthscale 20% of each dimension's range,
    signal variance matching the observed spread (floored)."""
    var = float(np.var(np.asarray(values, dtype=float)))
    return KernelParams(
        signal_variance=max(var, 1e-4),
        lengthscales=tuple(0.2 * m for m in upper_bounds),
        noise_variance=noise_variance,
    )


def refit_lengthscales(
    inputs: Sequence,
    values: Sequence[float],
    base: KernelParams,
    mean_offset: float = 0.0,
    obs_noise: Optional[Sequence[float]] = None,
    multipliers: tuple[float, ...] = (0.5, 1.0, 2.0),
) -> KernelParams:
    """One greedy coordinate pass over lengthscale multipliers, keeping the
    marginal-likelihood maximizer per dimension."""
    ell = list(base.lengthscales)
    for d in range(len(ell)):
        best_mult, best_lml = None, -math.inf
        for mult in multipliers:
            trial = list(ell)
            trial[d] = base.lengthscales[d] * mult
            try:
                state = fit(
                    inputs,
                    values,
                    KernelParams(base.signal_variance, tuple(trial), base.noise_variance),
                    mean_offset=mean_offset,
                    obs_noise=obs_noise,
                )
            except FactorizationError:
                continue
            lml = log_marginal_likelihood(state)
            if lml > best_lml:
                best_mult, best_lml = mult, lml
        if best_mult is not None:
            ell[d] = base.lengthscales[d] * best_mult
    return KernelParams(base.signal_variance, tuple(ell), base.noise_variance)
