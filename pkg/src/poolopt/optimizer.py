"""Surrogate-driven search over the integer grid of pool configurations.

Each iteration fits the GP on every objective value observed so far, scores
all unexplored, unpruned grid points by Expected Improvement, and evaluates
the best one on the shared query trace. Configurations observed to violate
the QoS target by more than a threshold prune their entire coordinate-wise
dominated cone from future acquisition.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import norm, qmc

from . import gp
from .catalog import Catalog, PoolConfig, enumerate_grid
from .simulator import EvaluationRecord, evaluate
from .workload import QoSTarget, QueryTrace, WorkloadSpec, generate_stream


@dataclass
class PruneSet:
    """Configurations dominated by an observed strong QoS violator.

    A candidate is pruned when some stored violator is >= it in every
    coordinate. Stored members form an antichain: adding a dominating
    violator drops the members it covers.
    """

    theta: float = 0.01
    dominating_violators: list[PoolConfig] = field(default_factory=list)

    def add(self, config: PoolConfig) -> None:
        kept = [c for c in self.dominating_violators if not _le(c, config)]
        if not any(_le(config, c) for c in kept):
            kept.append(tuple(config))
        self.dominating_violators = kept

    def is_pruned(self, config: PoolConfig) -> bool:
        return any(_le(config, c) for c in self.dominating_violators)

    def pruned_mask(self, grid_array: np.ndarray) -> np.ndarray:
        """Boolean mask over a (G, d) array of grid configs."""
        if not self.dominating_violators:
            return np.zeros(len(grid_array), dtype=bool)
        V = np.asarray(self.dominating_violators)
        return (grid_array[:, None, :] <= V[None, :, :]).all(axis=2).any(axis=1)


def _le(a: Sequence[int], b: Sequence[int]) -> bool:
    return all(x <= y for x, y in zip(a, b))


def update_prune_set(prune: PruneSet, record: EvaluationRecord, t_qos: float) -> bool:
    """Add the record's config to the prune set if it violates the QoS
    target by more than theta. Returns True if it was added."""
    if t_qos - record.r_sat > prune.theta:
        prune.add(record.config)
        return True
    return False


def expected_improvement(mean, variance, f_best: float, xi: float = 0.0):
    """Expected improvement of a Gaussian belief over the incumbent.

    Zero-variance points score zero; results are clamped to >= 0. Accepts
    scalars or arrays.
    """
    mean = np.asarray(mean, dtype=float)
    variance = np.asarray(variance, dtype=float)
    sigma = np.sqrt(np.maximum(variance, 0.0))
    imp = mean - f_best - xi
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sigma > 0, imp / np.where(sigma > 0, sigma, 1.0), 0.0)
        ei = imp * norm.cdf(z) + sigma * norm.pdf(z)
    ei = np.where(sigma > 0, np.maximum(ei, 0.0), 0.0)
    return float(ei) if ei.ndim == 0 else ei


@dataclass
class SearchState:
    """Bookkeeping of a running search."""

    budget: int
    history: list[EvaluationRecord] = field(default_factory=list)
    gp_state: Optional[gp.GPState] = None
    prune: PruneSet = field(default_factory=PruneSet)
    best: Optional[EvaluationRecord] = None
    low_ei_streak: int = 0
    # pseudo-observations from a warm start: config -> (objective value, noise scale)
    pseudo: dict[PoolConfig, tuple[float, float]] = field(default_factory=dict)

    def record(self, rec: EvaluationRecord) -> None:
        if any(h.config == rec.config for h in self.history):
            raise ValueError(f"config {rec.config} evaluated twice")
        self.history.append(rec)
        self.pseudo.pop(rec.config, None)
        if self.best is None or _better(rec, self.best):
            self.best = rec


def _better(a: EvaluationRecord, b: EvaluationRecord) -> bool:
    """Objective first, then cheaper, then lexicographically smaller config."""
    return (a.objective, -a.cost, tuple(-c for c in a.config)) > (
        b.objective,
        -b.cost,
        tuple(-c for c in b.config),
    )


@dataclass(frozen=True)
class IterationStats:
    """Per-evaluation diagnostics aligned with SearchResult.history."""

    iteration: int
    ei_max: Optional[float]  # None for design/warm-start evaluations
    pruned_total: int  # grid configs excluded by the prune set at this point


@dataclass(frozen=True)
class SearchResult:
    best: EvaluationRecord
    history: tuple[EvaluationRecord, ...]
    samples_used: int
    exploration_cost: float
    pruned_count: int
    iteration_stats: tuple[IterationStats, ...] = ()

    def first_hit(self, config: PoolConfig) -> Optional[int]:
        """1-based sample index at which `config` was first evaluated."""
        for i, rec in enumerate(self.history):
            if rec.config == tuple(config):
                return i + 1
        return None


def next_config(
    state: SearchState,
    grid: Sequence[PoolConfig],
    xi: float = 0.01,
) -> tuple[Optional[PoolConfig], float]:
    """Highest-EI grid point that is neither sampled nor pruned.

    Returns (None, 0.0) when every point is exhausted. Ties go to the
    lexicographically smallest config (the grid is enumerated in ascending
    order per dimension).
    """
    if state.gp_state is None:
        raise ValueError("GP must be fitted before proposing")
    sampled = {rec.config for rec in state.history}
    grid_arr = np.asarray(grid, dtype=float)
    mask = ~state.prune.pruned_mask(grid_arr)
    candidates = [
        i for i, cfg in enumerate(grid) if mask[i] and cfg not in sampled
    ]
    if not candidates:
        return None, 0.0
    mean, var = gp.posterior_batch(state.gp_state, grid_arr[candidates])
    f_best = state.best.objective if state.best is not None else 0.0
    ei = expected_improvement(mean, var, f_best, xi)
    k = int(np.argmax(ei))  # first max = lexicographically smallest
    return grid[candidates[k]], float(ei[k])


def _fit_surrogate(state: SearchState, bounds, refit_every: int, prior_center: str):
    """Fit the GP on true history plus surviving pseudo-observations.

    `prior_center` picks what the posterior reverts to far from data: "min"
    (pessimistic, keeps acquisition focused near observed good regions) or
    "mean" (neutral). On grids of ~1000 points the objective is bimodal, so
    a mean-reverting prior overvalues the entire unexplored plateau and the
    acquisition never contracts; the pessimistic prior avoids that.
    """
    inputs = [rec.config for rec in state.history]
    values = [rec.objective for rec in state.history]
    noise_scales = [1.0] * len(values)
    for cfg, (val, scale) in state.pseudo.items():
        inputs.append(cfg)
        values.append(val)
        noise_scales.append(scale)
    params = gp.default_params(values, bounds)
    obs_noise = np.array([params.noise_variance * s for s in noise_scales])
    if prior_center == "min":
        mean_offset = float(np.min(values))
    elif prior_center == "mean":
        mean_offset = float(np.mean(values))
    else:
        raise ValueError(f"unknown prior_center {prior_center!r}")
    if refit_every and len(state.history) >= refit_every and len(state.history) % refit_every == 0:
        params = gp.refit_lengthscales(
            inputs, values, params, mean_offset=mean_offset, obs_noise=obs_noise
        )
    state.gp_state = gp.fit(inputs, values, params, mean_offset=mean_offset, obs_noise=obs_noise)


def _initial_design(bounds: tuple[int, ...], seed: int, grid: Sequence[PoolConfig]) -> list[PoolConfig]:
    """The all-max corner plus 2n distinct quasi-random in-bounds configs."""
    n = len(bounds)
    corner = tuple(bounds)
    configs = [corner]
    want = 2 * n
    n_draws = 2 ** max(4, math.ceil(math.log2(8 * want)))  # power of 2 keeps Sobol balanced
    for u in qmc.Sobol(d=n, scramble=True, seed=seed).random(n_draws):
        cfg = tuple(min(int(u_d * (m + 1)), m) for u_d, m in zip(u, bounds))
        if cfg not in configs:
            configs.append(cfg)
        if len(configs) == want + 1:
            return configs
    for cfg in grid:  # tiny grid: fill deterministically
        if cfg not in configs:
            configs.append(cfg)
        if len(configs) == want + 1:
            break
    return configs


@dataclass(frozen=True)
class WarmStart:
    """Transferred knowledge for a re-optimization after a load change."""

    record: EvaluationRecord  # the old optimum truly measured on the new load
    pseudo: tuple[tuple[PoolConfig, float], ...]  # (config, estimated objective)
    prune: PruneSet
    noise_inflation: float = 100.0


def run(
    catalog: Catalog,
    workload: WorkloadSpec,
    qos: QoSTarget,
    budget: int,
    seed: int,
    trace: Optional[QueryTrace] = None,
    theta: float = 0.01,
    xi: float = 0.01,
    ei_tol: float = 1e-4,
    ei_patience: int = 3,
    refit_every: int = 5,
    eval_duration_hours: float = 1.0,
    warm: Optional[WarmStart] = None,
    sim_seed: int = 0,
    prior_center: str = "min",
) -> SearchResult:
    """Run the full search and return its best configuration and history.

    One trace is generated per run (or passed in) and reused for every
    evaluation, so satisfaction rates are directly comparable across
    configurations. Stops at the budget, on grid exhaustion, or after
    `ei_patience` consecutive iterations with max EI below `ei_tol`.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    bounds = catalog.require_bounds()
    if trace is None:
        trace = generate_stream(workload, seed)
    grid = enumerate_grid(catalog)
    t_qos = qos.satisfaction_quantile

    state = SearchState(budget=budget, prune=PruneSet(theta=theta))
    stats: list[IterationStats] = []
    grid_arr = np.asarray(grid, dtype=float)

    def pruned_total() -> int:
        return int(np.count_nonzero(state.prune.pruned_mask(grid_arr)))

    def take(rec: EvaluationRecord, ei: Optional[float]) -> None:
        state.record(rec)
        update_prune_set(state.prune, rec, t_qos)
        stats.append(IterationStats(len(state.history), ei, pruned_total()))

    if warm is None:
        for cfg in _initial_design(bounds, seed, grid):
            if len(state.history) >= budget:
                break
            take(evaluate(cfg, trace, catalog, qos, sim_seed=sim_seed), None)
    else:
        state.prune = copy.deepcopy(warm.prune)
        state.pseudo = {tuple(cfg): (val, warm.noise_inflation) for cfg, val in warm.pseudo}
        take(warm.record, None)

    while len(state.history) < budget:
        _fit_surrogate(state, bounds, refit_every, prior_center)
        cfg, ei_max = next_config(state, grid, xi=xi)
        if cfg is None:
            break
        if ei_max < ei_tol:
            state.low_ei_streak += 1
            if state.low_ei_streak >= ei_patience:
                break
        else:
            state.low_ei_streak = 0
        take(evaluate(cfg, trace, catalog, qos, sim_seed=sim_seed), ei_max)

    assert state.best is not None
    return SearchResult(
        best=state.best,
        history=tuple(state.history),
        samples_used=len(state.history),
        exploration_cost=sum(r.cost for r in state.history) * eval_duration_hours,
        pruned_count=pruned_total(),
        iteration_stats=tuple(stats),
    )
