"""Reproducible stochastic query streams: Poisson arrivals, random batch sizes."""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass
from typing import Union

import numpy as np


@dataclass(frozen=True)
class QoSTarget:
    """Latency target that a given quantile of queries must meet."""

    latency_target_ms: float
    satisfaction_quantile: float = 0.99

    def __post_init__(self):
        if self.latency_target_ms <= 0:
            raise ValueError("latency_target_ms must be positive")
        if not 0.0 < self.satisfaction_quantile < 1.0:
            raise ValueError("satisfaction_quantile must be in (0, 1)")


@dataclass(frozen=True)
class LogNormalBatches:
    """Heavy-tailed batch sizes: exp(N(mu, sigma^2))."""

    mu: float
    sigma: float

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.lognormal(self.mu, self.sigma, size)


@dataclass(frozen=True)
class GaussianBatches:
    mean: float
    std: float

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.normal(self.mean, self.std, size)


BatchDist = Union[LogNormalBatches, GaussianBatches]

# Fixture default: median 16 with a fat tail, clamped to [1, 256].
DEFAULT_BATCH_DIST = LogNormalBatches(mu=math.log(16.0), sigma=1.0)


@dataclass(frozen=True)
class WorkloadSpec:
    """Parameters of a stochastic query stream."""

    arrival_rate: float  # queries per second
    batch_dist: BatchDist
    qos: QoSTarget
    batch_min: int = 1
    batch_max: int = 256
    num_queries: int = 10_000

    def __post_init__(self):
        if self.arrival_rate <= 0:
            raise ValueError("arrival_rate must be positive")
        if self.batch_min < 1 or self.batch_min > self.batch_max:
            raise ValueError("need 1 <= batch_min <= batch_max")
        if self.num_queries < 1:
            raise ValueError("num_queries must be >= 1")


@dataclass(frozen=True, eq=False)
class QueryTrace:
    """A realized stream: per-query arrival times (seconds) and batch sizes."""

    arrival_s: np.ndarray
    batches: np.ndarray
    seed: int

    def __len__(self) -> int:
        return len(self.arrival_s)


def generate_stream(spec: WorkloadSpec, seed: int) -> QueryTrace:
    """Draw a query trace: exponential inter-arrivals at the spec rate, batch
    sizes from the spec distribution rounded to nearest integer and clamped.

    The same (spec, seed) pair always yields a bit-identical trace.
    """
    rng = np.random.default_rng(seed)
    gaps = rng.exponential(1.0 / spec.arrival_rate, spec.num_queries)
    arrival = np.cumsum(gaps)
    raw = spec.batch_dist.sample(rng, spec.num_queries)
    batches = np.floor(raw + 0.5)  # nearest integer, half rounds up
    batches = np.clip(batches, spec.batch_min, spec.batch_max).astype(np.int64)
    return QueryTrace(arrival_s=arrival, batches=batches, seed=seed)


def scale_load(spec: WorkloadSpec, factor: float) -> WorkloadSpec:
    """Return a copy of the spec with the arrival rate scaled by `factor`."""
    if factor <= 0:
        raise ValueError("scale factor must be positive")
    return dataclasses.replace(spec, arrival_rate=spec.arrival_rate * factor)


def trace_to_csv(trace: QueryTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["arrival_time_s", "batch_size"])
        for t, b in zip(trace.arrival_s, trace.batches):
            writer.writerow([repr(float(t)), int(b)])


def batch_dist_from_json(obj: dict) -> BatchDist:
    """Parse {"kind": "lognormal", "mu": .., "sigma": ..} or
    {"kind": "gaussian", "mean": .., "std": ..}."""
    kind = obj.get("kind")
    if kind == "lognormal":
        return LogNormalBatches(mu=float(obj["mu"]), sigma=float(obj["sigma"]))
    if kind == "gaussian":
        return GaussianBatches(mean=float(obj["mean"]), std=float(obj["std"]))
    raise ValueError(f"unknown batch_dist kind: {kind!r}")
