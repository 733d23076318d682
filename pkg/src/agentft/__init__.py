"""Agent-based proactive fault tolerance for parallel reduction, simulated."""

from .agents import Agent, MigrationRecord, Perception, Phase
from .config import CostModel, ExperimentConfig
from .engine import TrialOutcome, run_campaign, run_trial
from .metrics import MetricsTable, SampleMatrix, compute_metrics, dependency_sweep
from .taskgraph import TaskGraph, build_binary_reduction, build_fanin_reduction, reduce_reference
from .topology import GridTopology, build_grid, healthy_neighbors, neighbors

__version__ = "0.1.0"

__all__ = [
    "Agent",
    "CostModel",
    "ExperimentConfig",
    "GridTopology",
    "MetricsTable",
    "MigrationRecord",
    "Perception",
    "Phase",
    "SampleMatrix",
    "TaskGraph",
    "TrialOutcome",
    "build_binary_reduction",
    "build_fanin_reduction",
    "build_grid",
    "compute_metrics",
    "dependency_sweep",
    "healthy_neighbors",
    "neighbors",
    "reduce_reference",
    "run_campaign",
    "run_trial",
]
