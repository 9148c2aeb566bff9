"""Ground-truth brute force: evaluate every in-bounds configuration."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

from .catalog import Catalog, PoolConfig, enumerate_grid
from .simulator import EvaluationRecord, evaluate
from .workload import QoSTarget, QueryTrace


class GridTooLarge(ValueError):
    """The bounded grid exceeds the exhaustive-evaluation cap."""


@dataclass(frozen=True)
class Landscape:
    """Every in-bounds configuration evaluated on one shared trace."""

    entries: dict[PoolConfig, EvaluationRecord]
    exploration_cost: float  # total cost of evaluating the full grid
    trace_seed: int


def exhaustive(
    catalog: Catalog,
    trace: QueryTrace,
    qos: QoSTarget,
    cap: int = 100_000,
    sim_seed: int = 0,
    eval_duration_hours: float = 1.0,
) -> Landscape:
    """Evaluate the full grid and return the complete landscape."""
    grid = enumerate_grid(catalog)
    if len(grid) > cap:
        raise GridTooLarge(f"grid has {len(grid)} configs, cap is {cap}")
    entries = {
        cfg: evaluate(cfg, trace, catalog, qos, sim_seed=sim_seed) for cfg in grid
    }
    total = sum(rec.cost for rec in entries.values()) * eval_duration_hours
    return Landscape(entries=entries, exploration_cost=total, trace_seed=trace.seed)


def true_optimum(landscape: Landscape, t_qos: float) -> Optional[EvaluationRecord]:
    """Cheapest configuration meeting the QoS quantile, ties broken by
    lexicographically smallest config; None when nothing satisfies."""
    feasible = [rec for rec in landscape.entries.values() if rec.r_sat >= t_qos]
    if not feasible:
        return None
    return min(feasible, key=lambda rec: (rec.cost, rec.config))


def landscape_to_csv(landscape: Landscape, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["config", "r_sat", "cost", "objective"])
        for cfg in sorted(landscape.entries):
            rec = landscape.entries[cfg]
            writer.writerow(
                [
                    ";".join(str(c) for c in cfg),
                    repr(rec.r_sat),
                    repr(rec.cost),
                    repr(rec.objective),
                ]
            )
