"""Experiment configuration shared by the engine, metrics and CLI."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Union

from .errors import ConfigInvalid
from .sensors import BASELINE, NOISE_SIGMA, RAMP_RATE, THRESHOLD, FaultSchedule
from .taskgraph import TaskGraph, build_fanin_reduction
from .topology import Coord, GridTopology, build_grid

Schedule = Union[str, FaultSchedule]  # "auto", "none" or explicit


@dataclass(frozen=True)
class CostModel:
    spawn_ms: float = 250.0
    transfer_ms_per_value: float = 2.0
    rebind_ms_per_dep: float = 8.0
    jitter_pct: float = 0.05
    hop_latency_ms: float = 1.0


@dataclass(frozen=True)
class ExperimentConfig:
    rows: int = 4
    cols: int = 5
    leaves: int = 8
    fan_in: int = 2
    rounds: int = 10
    round_period_ms: float = 100.0
    threshold: float = THRESHOLD
    baseline: float = BASELINE
    noise_sigma: float = NOISE_SIGMA
    ramp_rate: float = RAMP_RATE
    grace_window_ms: float = 1000.0
    sensor_period_ms: float = 10.0
    probe_timeout_ms: float = 10.0
    rebind_timeout_ms: float = 20.0
    cost: CostModel = field(default_factory=CostModel)
    trials: int = 30
    base_seed: int = 0
    schedule: Schedule = "auto"
    allow_concurrent_faults: bool = False
    # task id -> coord; default is row-major over non-prefailed cells
    placement: dict[int, Coord] | None = None

    def build_graph(self) -> TaskGraph:
        return build_fanin_reduction(self.leaves, self.fan_in)

    def build_grid(self) -> GridTopology:
        return build_grid(self.rows * self.cols, self.rows, self.cols)

    def with_changes(self, **changes: Any) -> ExperimentConfig:
        cost_keys = {f.name for f in dataclasses.fields(CostModel)}
        cost_changes = {k: changes.pop(k) for k in list(changes) if k in cost_keys}
        cfg = dataclasses.replace(self, **changes)
        if cost_changes:
            cfg = dataclasses.replace(cfg, cost=dataclasses.replace(cfg.cost, **cost_changes))
        return cfg

    def validate(self) -> ExperimentConfig:
        graph = self.build_graph()
        grid = self.build_grid()
        if len(grid) < len(graph):
            raise ConfigInvalid(f"{self.rows}x{self.cols} grid cannot host {len(graph)} task nodes")
        if self.trials < 1:
            raise ConfigInvalid("trials must be >= 1")
        if self.rounds < 1:
            raise ConfigInvalid("rounds must be >= 1")
        for name in (
            "round_period_ms", "grace_window_ms", "probe_timeout_ms", "rebind_timeout_ms", "noise_sigma",
        ):
            if getattr(self, name) < 0:
                raise ConfigInvalid(f"{name} must be >= 0")
        if self.sensor_period_ms <= 0:
            raise ConfigInvalid("sensor_period_ms must be > 0")
        if self.ramp_rate <= 0:
            raise ConfigInvalid("ramp_rate must be > 0")
        for f in dataclasses.fields(CostModel):
            if getattr(self.cost, f.name) < 0:
                raise ConfigInvalid(f"{f.name} must be >= 0")
        if self.cost.jitter_pct >= 1:
            raise ConfigInvalid("jitter_pct must be < 1")
        if isinstance(self.schedule, str) and self.schedule not in ("auto", "none"):
            raise ConfigInvalid(f"schedule must be 'auto', 'none' or a fault schedule, got {self.schedule!r}")
        if self.placement is not None:
            if set(self.placement) != set(graph.nodes):
                raise ConfigInvalid("placement must cover every task node exactly")
            for coord in self.placement.values():
                if coord not in grid:
                    raise ConfigInvalid(f"placement coord {coord} outside grid")
        if isinstance(self.schedule, FaultSchedule):
            self._validate_schedule(self.schedule, graph, grid)
        return self

    def _validate_schedule(self, schedule: FaultSchedule, graph: TaskGraph, grid: GridTopology) -> None:
        for entry in schedule.entries:
            if entry.task not in graph.nodes:
                raise ConfigInvalid(f"schedule targets unknown task {entry.task}")
            if entry.ramp_rate <= 0 or entry.ramp_start < 0:
                raise ConfigInvalid(f"bad ramp for task {entry.task}")
        for coord in list(schedule.prefailed) + [c for c, _ in schedule.hard_failures]:
            if coord not in grid:
                raise ConfigInvalid(f"schedule coord {coord} outside grid")
        if self.allow_concurrent_faults:
            return
        if schedule.hard_failures:
            raise ConfigInvalid("unpredicted hard failures need allow_concurrent_faults")
        # one fault at a time: next ramp may start only after the previous node hard-failed
        ordered = sorted(schedule.entries, key=lambda e: e.ramp_start)
        for prev, nxt in zip(ordered, ordered[1:]):
            busy_until = prev.ramp_start + (self.threshold - self.baseline) / prev.ramp_rate + self.grace_window_ms
            if nxt.ramp_start < busy_until:
                raise ConfigInvalid(
                    f"faults on tasks {prev.task} and {nxt.task} overlap; set allow_concurrent_faults to permit"
                )

    def auto_ramp_window(self) -> tuple[float, float]:
        """Interval from which auto-per-node schedules draw the ramp start."""
        lo = self.round_period_ms
        return lo, max(lo, self.round_period_ms * (self.rounds // 2))

    # -- serialisation ---------------------------------------------------
    def to_dict(self) -> dict:
        out: dict[str, Any] = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.name == "cost":
                value = dataclasses.asdict(value)
            elif f.name == "schedule" and isinstance(value, FaultSchedule):
                value = value.to_dict()
            elif f.name == "placement" and value is not None:
                value = {str(k): list(v) for k, v in sorted(value.items())}
            out[f.name] = value
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, raw: dict) -> ExperimentConfig:
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(raw)
        try:
            if "cost" in kwargs:
                kwargs["cost"] = CostModel(**{k: float(v) for k, v in kwargs["cost"].items()})
            if isinstance(kwargs.get("schedule"), dict):
                kwargs["schedule"] = FaultSchedule.from_dict(kwargs["schedule"])
            if kwargs.get("placement") is not None:
                kwargs["placement"] = {int(k): (int(v[0]), int(v[1])) for k, v in kwargs["placement"].items()}
            return cls(**kwargs)
        except (TypeError, KeyError, ValueError) as err:
            raise ConfigInvalid(f"malformed config: {err}") from err

    @classmethod
    def load(cls, path: str | Path) -> ExperimentConfig:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigInvalid(f"cannot read config {path}: {err}") from err
        return cls.from_dict(raw)


def load_schedule(path: str | Path) -> FaultSchedule:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return FaultSchedule.from_dict(raw)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as err:
        raise ConfigInvalid(f"cannot read schedule {path}: {err}") from err
