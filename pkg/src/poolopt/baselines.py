"""Competing searchers: random sampling, hill climbing, and a response-surface
design, all sharing the evaluator and result shape of the main optimizer."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .catalog import PoolConfig
from .optimizer import IterationStats, SearchResult, _better
from .simulator import EvaluationRecord


@dataclass(frozen=True)
class BaselineSpec:
    kind: str  # one of {"random", "hill_climb", "rsm"}
    budget: int
    seed: int
    start: Optional[PoolConfig] = None  # hill_climb only

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.kind not in ("random", "hill_climb", "rsm"):
            raise ValueError(f"unknown baseline kind {self.kind!r}")


Evaluator = Callable[[PoolConfig], EvaluationRecord]


class _Run:
    """Shared budget/history bookkeeping for the baseline searchers."""

    def __init__(self, budget: int, evaluator: Evaluator, duration: float):
        self.budget = budget
        self.evaluator = evaluator
        self.duration = duration
        self.history: list[EvaluationRecord] = []
        self.records: dict[PoolConfig, EvaluationRecord] = {}

    def exhausted(self) -> bool:
        return len(self.history) >= self.budget

    def evaluate(self, config: PoolConfig) -> EvaluationRecord:
        assert config not in self.records, f"config {config} evaluated twice"
        rec = self.evaluator(config)
        self.history.append(rec)
        self.records[config] = rec
        return rec

    def result(self) -> SearchResult:
        best = self.history[0]
        for rec in self.history[1:]:
            if _better(rec, best):
                best = rec
        stats = tuple(
            IterationStats(iteration=i + 1, ei_max=None, pruned_total=0)
            for i in range(len(self.history))
        )
        return SearchResult(
            best=best,
            history=tuple(self.history),
            samples_used=len(self.history),
            exploration_cost=sum(r.cost for r in self.history) * self.duration,
            pruned_count=0,
            iteration_stats=stats,
        )


def _le(a: Sequence[int], b: Sequence[int]) -> bool:
    return all(x <= y for x, y in zip(a, b))


def random_search(
    spec: BaselineSpec,
    grid: Sequence[PoolConfig],
    evaluator: Evaluator,
    t_qos: float,
    eval_duration_hours: float = 1.0,
) -> SearchResult:
    """Uniform sampling without replacement, with two free skip rules: a
    candidate dominated by an observed violator, or dominating an observed
    satisfier of lower-or-equal cost, is discarded without spending budget."""
    if not grid:
        raise ValueError("grid is empty")
    run = _Run(spec.budget, evaluator, eval_duration_hours)
    rng = np.random.default_rng(spec.seed)
    violators: list[PoolConfig] = []
    satisfiers: list[tuple[PoolConfig, float]] = []
    for idx in rng.permutation(len(grid)):
        if run.exhausted():
            break
        cfg = grid[int(idx)]
        if any(_le(cfg, v) for v in violators):
            continue
        if any(_le(s, cfg) for s, _cost in satisfiers):
            # dominating a satisfier implies >= its cost at positive prices
            continue
        rec = run.evaluate(cfg)
        if rec.r_sat < t_qos:
            violators.append(cfg)
        else:
            satisfiers.append((cfg, rec.cost))
    return run.result()


def _neighbors(config: PoolConfig, bounds: tuple[int, ...]):
    for d in range(len(config)):
        for delta in (1, -1):
            v = config[d] + delta
            if 0 <= v <= bounds[d]:
                yield config[:d] + (v,) + config[d + 1 :]


def _climb(
    run: _Run,
    start: PoolConfig,
    grid: Sequence[PoolConfig],
    bounds: tuple[int, ...],
    rng: np.random.Generator,
) -> None:
    """Best-improvement local search with uniform random restarts."""
    current = start
    while not run.exhausted():
        for nb in _neighbors(current, bounds):
            if run.exhausted():
                return
            if nb not in run.records:
                run.evaluate(nb)
        known = [
            run.records[nb] for nb in _neighbors(current, bounds) if nb in run.records
        ]
        improving = [
            rec for rec in known if rec.objective > run.records[current].objective
        ]
        if improving:
            current = max(improving, key=lambda r: r.objective).config
            continue
        unexplored = [cfg for cfg in grid if cfg not in run.records]
        if not unexplored:
            return
        current = unexplored[int(rng.integers(len(unexplored)))]
        run.evaluate(current)


def hill_climb(
    spec: BaselineSpec,
    grid: Sequence[PoolConfig],
    evaluator: Evaluator,
    t_qos: float,
    eval_duration_hours: float = 1.0,
) -> SearchResult:
    """Greedy walk over +-1 neighborhoods, restarting at a random unexplored
    config when no neighbor improves."""
    bounds = tuple(max(cfg[d] for cfg in grid) for d in range(len(grid[0])))
    start = tuple(spec.start) if spec.start is not None else bounds
    run = _Run(spec.budget, evaluator, eval_duration_hours)
    rng = np.random.default_rng(spec.seed)
    run.evaluate(start)
    _climb(run, start, grid, bounds, rng)
    return run.result()


def ccd_design(bounds: tuple[int, ...]) -> list[PoolConfig]:
    """Face-centered central composite design on levels {0, mid, max} per
    dimension: factorial corners, face centers, and the center point, with
    coincident points deduplicated."""
    n = len(bounds)
    mid = tuple(int(np.floor(m / 2 + 0.5)) for m in bounds)
    points: list[PoolConfig] = []

    def push(cfg: PoolConfig):
        if cfg not in points:
            points.append(cfg)

    for corner in itertools.product(*((0, m) for m in bounds)):
        push(tuple(corner))
    for d in range(n):
        for level in (0, bounds[d]):
            push(mid[:d] + (level,) + mid[d + 1 :])
    push(mid)
    return points


def rsm_search(
    spec: BaselineSpec,
    grid: Sequence[PoolConfig],
    evaluator: Evaluator,
    t_qos: float,
    eval_duration_hours: float = 1.0,
) -> SearchResult:
    """Evaluate the face-centered composite design, then hill-climb from its
    best point with the remaining budget."""
    bounds = tuple(max(cfg[d] for cfg in grid) for d in range(len(grid[0])))
    if len(bounds) < 2:
        raise ValueError("rsm_search needs at least two dimensions")
    run = _Run(spec.budget, evaluator, eval_duration_hours)
    rng = np.random.default_rng(spec.seed)
    for cfg in ccd_design(bounds):
        if run.exhausted():
            break
        run.evaluate(cfg)
    best = max(run.history, key=lambda r: r.objective).config
    _climb(run, best, grid, bounds, rng)
    return run.result()


def run_baseline(
    spec: BaselineSpec,
    grid: Sequence[PoolConfig],
    evaluator: Evaluator,
    t_qos: float,
    eval_duration_hours: float = 1.0,
) -> SearchResult:
    fn = {"random": random_search, "hill_climb": hill_climb, "rsm": rsm_search}[spec.kind]
    return fn(spec, grid, evaluator, t_qos, eval_duration_hours)
