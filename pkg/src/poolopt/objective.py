"""Scalar search objective balancing QoS satisfaction against pool cost.

The objective maps every configuration into [0, 1]: configurations that miss
the QoS target score below 1/2 proportionally to their satisfaction rate,
configurations that meet it score above 1/2 with cheaper pools scoring
higher. Any satisfying pool therefore beats any violating one, and both
regions stay smooth for surrogate modeling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class ObjectiveContext:
    """Constants of the objective: prices, count upper bounds, QoS quantile."""

    prices: tuple[float, ...]
    upper_bounds: tuple[int, ...]
    t_qos: float

    def __post_init__(self):
        if len(self.prices) != len(self.upper_bounds):
            raise ValueError("prices and upper_bounds must have equal length")
        if any(p <= 0 for p in self.prices):
            raise ValueError("all prices must be positive")
        if any(m < 1 for m in self.upper_bounds):
            raise ValueError("all upper bounds must be >= 1")
        if not 0.0 < self.t_qos < 1.0:
            raise ValueError("t_qos must be in (0, 1)")

    @classmethod
    def from_catalog(cls, catalog, qos) -> "ObjectiveContext":
        return cls(
            prices=catalog.prices,
            upper_bounds=catalog.require_bounds(),
            t_qos=qos.satisfaction_quantile,
        )


def objective(x: Sequence[int], r_sat: float, ctx: ObjectiveContext) -> float:
    """Score a configuration given its measured QoS satisfaction rate.

    Below the target rate (strictly): half of r_sat / t_qos. At or above it:
    1/2 plus half of the pool's cost headroom relative to the most expensive
    in-bounds pool.
    """
    if len(x) != len(ctx.prices):
        raise ValueError("config dimension does not match context")
    if any(xi < 0 or xi > m for xi, m in zip(x, ctx.upper_bounds)):
        raise ValueError(f"config {tuple(x)} outside bounds {ctx.upper_bounds}")
    if not 0.0 <= r_sat <= 1.0:
        raise ValueError("r_sat must be in [0, 1]")
    if r_sat < ctx.t_qos:
        return 0.5 * r_sat / ctx.t_qos
    cost = sum(p * xi for p, xi in zip(ctx.prices, x))
    max_cost = sum(p * m for p, m in zip(ctx.prices, ctx.upper_bounds))
    return 0.5 + 0.5 * (1.0 - cost / max_cost)


def cost_effectiveness(perf_qps: float, price_per_hour: float) -> float:
    """Queries served per currency unit: 3600 * throughput / hourly price."""
    if price_per_hour <= 0:
        raise ValueError("price must be positive")
    if perf_qps < 0:
        raise ValueError("throughput must be non-negative")
    return 3600.0 * perf_qps / price_per_hour
