"""Timing statistics over migration durations.

Per-node mean over trials, per-level mean of the node means, and the overall
mean computed two ways (over nodes, and over levels). The two overall values
differ whenever levels hold unequal node counts; the node-weighted one is
canonical.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .config import ExperimentConfig
from .engine import TrialOutcome, run_campaign
from .errors import IncompleteData, IncompleteRow, MissingEntries, MissingNodeMean, ParseError, UnknownNode
from .taskgraph import TaskGraph
from .topology import fit_grid

Levels = Union[TaskGraph, Mapping[int, Sequence[int]]]


@dataclass
class SampleMatrix:
    """Durations indexed [node, trial]; NaN marks a missing sample."""

    node_ids: list[int]
    samples: np.ndarray
    levels: dict[int, list[int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 2 or self.samples.shape[0] != len(self.node_ids):
            raise ValueError(f"samples shape {self.samples.shape} does not match {len(self.node_ids)} nodes")
        if np.any(self.samples[~np.isnan(self.samples)] < 0):
            raise ValueError("durations must be non-negative")

    @property
    def trials(self) -> int:
        return self.samples.shape[1]

    def row(self, node_id: int) -> np.ndarray:
        try:
            return self.samples[self.node_ids.index(node_id)]
        except ValueError:
            raise UnknownNode(f"node {node_id} not in sample matrix") from None

    def is_complete(self) -> bool:
        return self.samples.size > 0 and not np.isnan(self.samples).any()

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[int, int, int | None, float]]) -> SampleMatrix:
        """Build from (node_id, trial, level, duration) tuples."""
        cells: dict[tuple[int, int], float] = {}
        levels: dict[int, list[int]] = {}
        for node, trial, level, duration in rows:
            if (node, trial) in cells:
                raise ParseError(f"duplicate sample for node {node}, trial {trial}")
            cells[(node, trial)] = duration
            if level is not None:
                members = levels.setdefault(level, [])
                if node not in members:
                    members.append(node)
        if not cells:
            raise IncompleteData("no samples")
        nodes = sorted({n for n, _ in cells})
        trials = sorted({t for _, t in cells})
        matrix = np.full((len(nodes), len(trials)), np.nan)
        for (node, trial), value in cells.items():
            matrix[nodes.index(node), trials.index(trial)] = value
        return cls(nodes, matrix, {p: sorted(ids) for p, ids in sorted(levels.items())})

    @classmethod
    def from_outcomes(cls, outcomes: Iterable[TrialOutcome]) -> tuple[SampleMatrix, list[TrialOutcome]]:
        """Samples (seconds) from survived trials; failed trials come back separately."""
        rows, failed = [], []
        for o in outcomes:
            if not o.survived:
                failed.append(o)
                continue
            for rec in o.migration_records:
                rows.append((rec.task_id, o.trial_id, rec.level, rec.duration * 1e-3))
        return cls.from_rows(rows), failed

    @classmethod
    def from_csv(cls, path: str | Path, units: str = "ms") -> SampleMatrix:
        """Read a campaign CSV (t_start_ms/t_end_ms) or a plain samples CSV.

        Plain files need ``node_id``, ``trial_id`` and ``duration`` columns and
        may carry ``level``. Rows with ``survived`` = 0 are skipped. Durations
        are returned in seconds.
        """
        scale = {"ms": 1e-3, "s": 1.0}.get(units)
        if scale is None:
            raise ParseError(f"units must be 'ms' or 's', got {units!r}")
        try:
            with open(path, newline="", encoding="utf-8") as fh:
                reader = csv.DictReader(fh)
                header = reader.fieldnames or []
                rows = []
                for lineno, rec in enumerate(reader, start=2):
                    if rec.get("survived", "1").strip() in ("0", "false", "False"):
                        continue
                    try:
                        node = int(rec["node_id"])
                        trial = int(rec["trial_id"])
                        level = int(rec["level"]) if rec.get("level") not in (None, "") else None
                        if "duration" in header:
                            duration = float(rec["duration"])
                        else:
                            duration = float(rec["t_end_ms"]) - float(rec["t_start_ms"])
                    except (KeyError, TypeError, ValueError) as err:
                        raise ParseError(f"{path}:{lineno}: {err}") from err
                    if not math.isfinite(duration) or duration < 0:
                        raise ParseError(f"{path}:{lineno}: bad duration {duration}")
                    rows.append((node, trial, level, duration * scale))
        except OSError as err:
            raise ParseError(f"cannot read {path}: {err}") from err
        return cls.from_rows(rows)


@dataclass
class MetricsTable:
    per_node: dict[int, float]
    per_level: dict[int, float]
    overall_by_node: float
    overall_by_level: float


def _level_members(graph: Levels, level: int) -> list[int]:
    levels = graph.levels if isinstance(graph, TaskGraph) else graph
    if level not in levels:
        raise MissingNodeMean(f"no level {level}")
    return list(levels[level])


def mean_node_time(samples: SampleMatrix, node_id: int) -> float:
    row = samples.row(node_id)
    if row.size == 0 or np.isnan(row).any():
        raise IncompleteRow(f"node {node_id} is missing samples")
    return float(np.mean(row))


def mean_level_time(per_node: Mapping[int, float], graph: Levels, level: int) -> float:
    members = _level_members(graph, level)
    missing = [n for n in members if n not in per_node]
    if missing:
        raise MissingNodeMean(f"level {level} lacks means for nodes {missing}")
    return float(np.mean([per_node[n] for n in members]))


def overall_mean(
    per_node: Mapping[int, float], per_level: Mapping[int, float], graph: Levels | None = None
) -> tuple[float, float]:
    """Return (node-weighted mean, mean of level means)."""
    if not per_node or not per_level:
        raise MissingEntries("overall mean needs per-node and per-level values")
    if graph is not None:
        levels = graph.levels if isinstance(graph, TaskGraph) else graph
        expected = {n for p in per_level for n in levels.get(p, [])}
        if not expected <= set(per_node):
            raise MissingEntries(f"per-node means missing for {sorted(expected - set(per_node))}")
    return float(np.mean(list(per_node.values()))), float(np.mean(list(per_level.values())))


def computational_levels(graph: Levels) -> dict[int, list[int]]:
    levels = graph.levels if isinstance(graph, TaskGraph) else graph
    return {p: list(ids) for p, ids in sorted(levels.items()) if p >= 2}


def compute_metrics(samples: SampleMatrix, graph: Levels | None = None) -> MetricsTable:
    if not samples.is_complete():
        raise IncompleteData("sample matrix has missing cells (failed or absent trials)")
    per_node = {n: mean_node_time(samples, n) for n in samples.node_ids}
    levels = samples.levels if graph is None else computational_levels(graph)
    if not levels:
        raise MissingEntries("no level information for the sampled nodes")
    per_level = {p: mean_level_time(per_node, levels, p) for p in sorted(levels)}
    by_node, by_level = overall_mean(per_node, per_level, levels)
    return MetricsTable(per_node, per_level, by_node, by_level)


@dataclass(frozen=True)
class SweepPoint:
    fan_in: int
    total_dependencies: int
    mean_reinstatement_ms: float
    samples: int
    trials: int


def sweep_config(config: ExperimentConfig, fan_in: int, spares: int = 5) -> ExperimentConfig:
    """Three-level tree with the given fan-in on a grid sized to fit it."""
    leaves = fan_in**2
    nodes = leaves + fan_in + 1
    rows, cols = fit_grid(nodes + spares)
    return config.with_changes(leaves=leaves, fan_in=fan_in, rows=rows, cols=cols, schedule="auto", placement=None)


def dependency_sweep(
    config: ExperimentConfig, fan_in_range: Iterable[int], trials: int, base_seed: int
) -> list[SweepPoint]:
    """Mean migration duration per fan-in.

    Total dependencies are fan-in plus the single output dependency.
    """
    points = []
    for fan_in in fan_in_range:
        cfg = sweep_config(config, fan_in)
        outcomes = run_campaign(cfg, trials, base_seed, keep_traces=False)
        failed = [o for o in outcomes if not o.survived]
        if failed:
            raise IncompleteData(f"fan-in {fan_in}: {len(failed)} trials did not survive")
        durations = [r.duration for o in outcomes for r in o.migration_records]
        if not durations:
            raise IncompleteData(f"fan-in {fan_in}: no migrations recorded")
        points.append(SweepPoint(fan_in, fan_in + 1, float(np.mean(durations)), len(durations), trials))
    return points
