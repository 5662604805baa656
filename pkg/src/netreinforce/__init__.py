"""Replicate synchronous networks so that routing survives random node faults."""

from .errors import DanglingReferenceError, GraphFormatError, NetReinforceError, SizeLimitError
from .graph import Network, build_hypercube, build_path, load_network, parse_graphml
from .partition import (
    CutStats,
    Partition,
    cut_stats,
    partition_auto,
    partition_brute_force,
    partition_hypercube,
    partition_spectral,
    singleton_partition,
    whole_partition,
)
from .reinforce import (
    FaultKind,
    FaultModel,
    Overheads,
    ReinforcedNetwork,
    copies_for,
    overheads,
    reinforce_partitioned,
    reinforce_strong,
    replicate,
)
from .reliability import (
    analyze,
    failure,
    failure_byz,
    failure_om,
    max_tolerable_p,
    naive_replication_p,
    pareto_sweep,
)
from .simulate import (
    Estimate,
    FaultScenario,
    SimOutcome,
    check_lemma_condition,
    exhaustive_success,
    monte_carlo,
    run_byz,
    run_om,
    run_reference,
    sample_faults,
)

__version__ = "0.1.0"

__all__ = [
    "CutStats",
    "DanglingReferenceError",
    "Estimate",
    "FaultKind",
    "FaultModel",
    "FaultScenario",
    "GraphFormatError",
    "NetReinforceError",
    "Network",
    "Overheads",
    "Partition",
    "ReinforcedNetwork",
    "SimOutcome",
    "SizeLimitError",
    "analyze",
    "build_hypercube",
    "build_path",
    "check_lemma_condition",
    "copies_for",
    "cut_stats",
    "exhaustive_success",
    "failure",
    "failure_byz",
    "failure_om",
    "load_network",
    "max_tolerable_p",
    "monte_carlo",
    "naive_replication_p",
    "overheads",
    "pareto_sweep",
    "parse_graphml",
    "partition_auto",
    "partition_brute_force",
    "partition_hypercube",
    "partition_spectral",
    "reinforce_partitioned",
    "reinforce_strong",
    "replicate",
    "run_byz",
    "run_om",
    "run_reference",
    "sample_faults",
    "singleton_partition",
    "whole_partition",
]
