"""Instance catalogs, pool configurations, and pool-building heuristics.

A pool configuration is a plain tuple of per-type instance counts, in the
catalog's declared type order. That order is also the dispatch order used by
the serving simulation.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .objective import cost_effectiveness
from .workload import QoSTarget, WorkloadSpec, generate_stream

PoolConfig = tuple[int, ...]


class CatalogError(ValueError):
    """Raised when a catalog file or definition violates the schema."""


@dataclass(frozen=True)
class InstanceType:
    """A priced instance family with a batch-size -> service-latency table.

    The table is interpolated linearly between anchors and extrapolated flat
    beyond the first/last anchor. `noise_sigma` > 0 turns on multiplicative
    lognormal service-time noise.
    """

    name: str
    price: float  # currency units per hour
    latency_profile: tuple[tuple[int, float], ...]  # (batch, mean ms), batches increasing
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.price <= 0:
            raise CatalogError(f"type {self.name!r}: non-positive price")
        if not self.latency_profile:
            raise CatalogError(f"type {self.name!r}: empty latency profile")
        batches = [b for b, _ in self.latency_profile]
        if any(b <= 0 for b in batches):
            raise CatalogError(f"type {self.name!r}: batch anchors must be positive")
        if any(b2 <= b1 for b1, b2 in zip(batches, batches[1:])):
            raise CatalogError(f"type {self.name!r}: anchors not increasing")
        if any(ms <= 0 for _, ms in self.latency_profile):
            raise CatalogError(f"type {self.name!r}: non-positive service time")
        if self.noise_sigma < 0:
            raise CatalogError(f"type {self.name!r}: negative noise sigma")

    def profile_ms(self, batch):
        """Mean service time (ms) for a batch size or array of batch sizes."""
        anchors = np.array([b for b, _ in self.latency_profile], dtype=float)
        times = np.array([ms for _, ms in self.latency_profile], dtype=float)
        return np.interp(batch, anchors, times)


@dataclass(frozen=True)
class Catalog:
    """Ordered instance types plus per-type count upper bounds."""

    types: tuple[InstanceType, ...]
    upper_bounds: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        names = [t.name for t in self.types]
        if len(set(names)) != len(names):
            raise CatalogError("duplicate type name in catalog")
        if self.upper_bounds is not None:
            if len(self.upper_bounds) != len(self.types):
                raise CatalogError("upper_bounds length does not match types")
            if any(m < 1 for m in self.upper_bounds):
                raise CatalogError("every upper bound must be >= 1")

    @property
    def n_types(self) -> int:
        return len(self.types)

    @property
    def prices(self) -> tuple[float, ...]:
        return tuple(t.price for t in self.types)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.types)

    def type_index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise CatalogError(f"unknown type name {name!r}") from None

    def require_bounds(self) -> tuple[int, ...]:
        if self.upper_bounds is None:
            raise CatalogError("catalog has no upper bounds; compute or declare them first")
        return self.upper_bounds


def load_catalog(path) -> Catalog:
    """Load a catalog JSON file.

    Schema: {"types": [{"name", "price_per_hour", "latency_profile": [[batch, ms], ...],
    "service_noise": {"kind": "none"|"lognormal", "sigma": number}}, ...],
    "upper_bounds": [int, ...]}  (upper_bounds optional).
    """
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CatalogError(f"cannot load catalog {path}: {exc}") from exc
    return catalog_from_json(raw)


def catalog_from_json(raw: dict) -> Catalog:
    if not isinstance(raw, dict) or "types" not in raw:
        raise CatalogError("catalog JSON must be an object with a 'types' list")
    types = []
    for entry in raw["types"]:
        noise = entry.get("service_noise") or {"kind": "none"}
        if noise.get("kind") == "none":
            sigma = 0.0
        elif noise.get("kind") == "lognormal":
            sigma = float(noise["sigma"])
        else:
            raise CatalogError(f"unknown service_noise kind: {noise.get('kind')!r}")
        types.append(
            InstanceType(
                name=entry["name"],
                price=float(entry["price_per_hour"]),
                latency_profile=tuple((int(b), float(ms)) for b, ms in entry["latency_profile"]),
                noise_sigma=sigma,
            )
        )
    bounds = raw.get("upper_bounds")
    if bounds is not None:
        bounds = tuple(int(m) for m in bounds)
    return Catalog(types=tuple(types), upper_bounds=bounds)


def pool_cost(config: Sequence[int], catalog: Catalog) -> float:
    """Hourly cost of a pool: sum of per-type price times count."""
    if len(config) != catalog.n_types:
        raise CatalogError(
            f"config has {len(config)} dimensions, catalog has {catalog.n_types}"
        )
    return float(sum(p * x for p, x in zip(catalog.prices, config)))


def enumerate_grid(catalog: Catalog) -> list[PoolConfig]:
    """All in-bounds pool configurations in lexicographic order, each
    dimension enumerated with increasing instance count."""
    bounds = catalog.require_bounds()
    return [tuple(c) for c in itertools.product(*(range(m + 1) for m in bounds))]


def homogeneous(type_index: int, count: int, n_types: int) -> PoolConfig:
    counts = [0] * n_types
    counts[type_index] = count
    return tuple(counts)


def compute_upper_bound(
    type_index: int,
    catalog: Catalog,
    evaluator: Callable,
    epsilon: float = 1e-3,
    cap: int = 32,
) -> int:
    """Smallest count past which one more instance of this type stops
    improving the satisfaction rate by more than epsilon; `cap` if the rate is
    still improving at the cap.

    `evaluator` maps a PoolConfig to an EvaluationRecord and must be
    deterministic for a fixed trace so successive counts are comparable.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    n = catalog.n_types
    prev = evaluator(homogeneous(type_index, 1, n)).r_sat
    for u in range(1, cap):
        nxt = evaluator(homogeneous(type_index, u + 1, n)).r_sat
        if nxt <= prev + epsilon:
            return u
        prev = nxt
    return cap


def resolve_upper_bounds(
    catalog: Catalog,
    evaluator: Callable,
    epsilon: float = 1e-3,
    cap: int = 32,
) -> Catalog:
    """Return a catalog with upper bounds filled in by plateau detection.

    `evaluator` is called with provisional bounds of `cap` on every type, so
    it must accept any homogeneous config up to that count.
    """
    bounds = tuple(
        compute_upper_bound(i, catalog, evaluator, epsilon=epsilon, cap=cap)
        for i in range(catalog.n_types)
    )
    return Catalog(types=catalog.types, upper_bounds=bounds)


def suggest_pool(
    catalog: Catalog,
    base_type: str,
    workload: WorkloadSpec,
    evaluator: Callable,
    relaxation_factor: float = 1.3,
    probe_seed: int = 0,
) -> list[str]:
    """Pick the instance types worth mixing with `base_type`.

    A candidate type joins the pool when, run alone at its upper bound, it
    meets the latency target relaxed by `relaxation_factor` (same quantile),
    and it serves strictly more queries per currency unit than the base type.
    `evaluator` maps (PoolConfig, QoSTarget) to an EvaluationRecord. Returns
    type names in catalog order; always contains `base_type`.
    """
    if relaxation_factor < 1:
        raise ValueError("relaxation_factor must be >= 1")
    base_idx = catalog.type_index(base_type)
    bounds = catalog.require_bounds()
    relaxed = QoSTarget(
        latency_target_ms=workload.qos.latency_target_ms * relaxation_factor,
        satisfaction_quantile=workload.qos.satisfaction_quantile,
    )

    # Per-type throughput over the workload's batch mix: 1 / mean service time.
    probe = generate_stream(workload, probe_seed)
    def ce(idx):
        mean_ms = float(np.mean(catalog.types[idx].profile_ms(probe.batches)))
        return cost_effectiveness(1000.0 / mean_ms, catalog.types[idx].price)

    base_ce = ce(base_idx)
    picked = []
    for i, itype in enumerate(catalog.types):
        if i == base_idx:
            picked.append(itype.name)
            continue
        if ce(i) <= base_ce:
            continue
        rec = evaluator(homogeneous(i, bounds[i], catalog.n_types), relaxed)
        if rec.r_sat >= relaxed.satisfaction_quantile:
            picked.append(itype.name)
    return picked
