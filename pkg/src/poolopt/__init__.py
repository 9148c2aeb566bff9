"""Cost-aware sizing of heterogeneous instance pools for latency-bound
query serving: a queueing simulator, a surrogate-driven searcher over
integer pool configurations, competing baseline searchers, and a
brute-force oracle for validating all of them."""

from .adaptation import LoadMonitor, TransferSet, detect_load_change, estimate_transfer_rates, warm_start
from .baselines import BaselineSpec, ccd_design, hill_climb, random_search, rsm_search
from .catalog import (
    Catalog,
    CatalogError,
    InstanceType,
    PoolConfig,
    compute_upper_bound,
    enumerate_grid,
    load_catalog,
    pool_cost,
    resolve_upper_bounds,
    suggest_pool,
)
from .gp import GPState, KernelParams, fit, matern52, posterior, rounded_kernel
from .objective import ObjectiveContext, cost_effectiveness, objective
from .optimizer import (
    PruneSet,
    SearchResult,
    SearchState,
    WarmStart,
    expected_improvement,
    next_config,
    run,
    update_prune_set,
)
from .oracle import Landscape, exhaustive, true_optimum
from .simulator import EvaluationRecord, SimResult, evaluate, percentile, service_time, simulate
from .workload import (
    GaussianBatches,
    LogNormalBatches,
    QoSTarget,
    QueryTrace,
    WorkloadSpec,
    generate_stream,
    scale_load,
)

__version__ = "0.1.0"

__all__ = [
    "BaselineSpec",
    "Catalog",
    "CatalogError",
    "EvaluationRecord",
    "GPState",
    "GaussianBatches",
    "InstanceType",
    "KernelParams",
    "Landscape",
    "LoadMonitor",
    "LogNormalBatches",
    "ObjectiveContext",
    "PoolConfig",
    "PruneSet",
    "QoSTarget",
    "QueryTrace",
    "SearchResult",
    "SearchState",
    "SimResult",
    "TransferSet",
    "WarmStart",
    "WorkloadSpec",
    "ccd_design",
    "compute_upper_bound",
    "cost_effectiveness",
    "detect_load_change",
    "enumerate_grid",
    "estimate_transfer_rates",
    "evaluate",
    "exhaustive",
    "expected_improvement",
    "fit",
    "generate_stream",
    "hill_climb",
    "load_catalog",
    "matern52",
    "next_config",
    "objective",
    "percentile",
    "pool_cost",
    "posterior",
    "random_search",
    "resolve_upper_bounds",
    "rounded_kernel",
    "rsm_search",
    "run",
    "scale_load",
    "service_time",
    "simulate",
    "suggest_pool",
    "true_optimum",
    "update_prune_set",
    "warm_start",
]
