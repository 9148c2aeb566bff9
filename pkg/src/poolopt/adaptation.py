"""Load-change detection and warm-started re-optimization.

When the serving load shifts, the previous search history is recycled: every
explored configuration that performed no better than the old optimum cannot
satisfy the new, heavier load either. Their satisfaction rates on the new
load are estimated by proportional scaling, fed to the surrogate as
low-confidence pseudo-observations, and the clear violators among them prune
their dominated cones outright.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .catalog import PoolConfig
from .objective import ObjectiveContext, objective
from .optimizer import PruneSet, SearchResult, WarmStart
from .simulator import EvaluationRecord


@dataclass(frozen=True)
class LoadMonitor:
    """Thresholds for deciding that the offered load has shifted."""

    window: int = 500  # recent queries considered
    queue_growth_threshold: int = 50  # queued-query increase across the window
    qos_drop_threshold: float = 0.05  # rate slack below the target quantile

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.queue_growth_threshold <= 0 or self.qos_drop_threshold <= 0:
            raise ValueError("thresholds must be positive")


def detect_load_change(
    monitor: LoadMonitor,
    queue_sizes: Sequence[int],
    satisfied: Sequence[bool],
    t_qos: float,
) -> bool:
    """True when the queue grew past the threshold across the window AND the
    windowed satisfaction rate fell below t_qos minus the drop threshold.

    Either signal alone (a latency blip, a transient queue spike) is not
    enough; the conjunction is what separates a load shift from noise.
    """
    if len(queue_sizes) != len(satisfied):
        raise ValueError("queue_sizes and satisfied must be aligned")
    if len(queue_sizes) < monitor.window:
        raise ValueError(
            f"need at least {monitor.window} observations, got {len(queue_sizes)}"
        )
    w = monitor.window
    growth = queue_sizes[-1] - queue_sizes[-w]
    rate = float(np.mean(np.asarray(satisfied[-w:], dtype=float)))
    return growth > monitor.queue_growth_threshold and rate < t_qos - monitor.qos_drop_threshold


@dataclass(frozen=True)
class TransferSet:
    """Previously explored configs that performed no better than the old
    optimum, with the old optimum's rates on both loads as anchors."""

    members: tuple[tuple[PoolConfig, float], ...]  # (config, rate on old load)
    anchor_old: float  # old optimum's rate on the old load
    anchor_new: float  # old optimum's rate on the new load

    def __post_init__(self):
        if any(old > self.anchor_old for _, old in self.members):
            raise ValueError("transfer member outperforms the old optimum")


def build_transfer_set(
    previous: SearchResult, new_record_of_old_best: EvaluationRecord
) -> TransferSet:
    """Collect history entries whose old-load rate did not beat the old
    optimum's. The old optimum itself is excluded: its new-load behavior is
    measured, not estimated."""
    anchor_old = previous.best.r_sat
    members = tuple(
        (rec.config, rec.r_sat)
        for rec in previous.history
        if rec.r_sat <= anchor_old and rec.config != previous.best.config
    )
    return TransferSet(
        members=members,
        anchor_old=anchor_old,
        anchor_new=new_record_of_old_best.r_sat,
    )


def estimate_transfer_rates(s: TransferSet) -> list[tuple[PoolConfig, float]]:
    """Proportional estimate of each member's rate on the new load:
    old rate scaled by the anchors' new/old ratio, clamped to [0, 1]."""
    if s.anchor_old <= 0:
        raise ValueError("anchor_old must be positive to scale rates")
    ratio = s.anchor_new / s.anchor_old
    return [(cfg, min(max(old * ratio, 0.0), 1.0)) for cfg, old in s.members]


def warm_start(
    previous: SearchResult,
    new_load_record_of_old_best: EvaluationRecord,
    ctx: ObjectiveContext,
    theta: float = 0.01,
    noise_inflation: float = 100.0,
) -> Optional[WarmStart]:
    """Turn the old search history into a head start for the new load.

    Returns None (no transfer) when the old optimum still satisfies the QoS
    on the new load. Otherwise each transfer-set member contributes a
    high-noise pseudo-observation at its estimated objective, members whose
    estimated rate violates by more than theta enter the prune set, and the
    old optimum's true new-load record becomes the first real observation.
    """
    if new_load_record_of_old_best.r_sat >= ctx.t_qos:
        return None
    prune = PruneSet(theta=theta)
    pseudo: list[tuple[PoolConfig, float]] = []
    if previous.best.r_sat > 0:
        s = build_transfer_set(previous, new_load_record_of_old_best)
        for cfg, est in estimate_transfer_rates(s):
            pseudo.append((cfg, objective(cfg, est, ctx)))
            if ctx.t_qos - est > theta:
                prune.add(cfg)
    return WarmStart(
        record=new_load_record_of_old_best,
        pseudo=tuple(pseudo),
        prune=prune,
        noise_inflation=noise_inflation,
    )
