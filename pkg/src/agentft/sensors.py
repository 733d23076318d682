"""Simulated node temperatures, fault ramps and threshold prediction."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .topology import Coord

BASELINE = 40.0
NOISE_SIGMA = 1.5
THRESHOLD = 70.0
RAMP_RATE = 0.5


@dataclass(frozen=True)
class SensorReading:
    node: Coord
    temperature: float
    timestamp: float


@dataclass(frozen=True)
class FaultEntry:
    """A temperature ramp on the node hosting ``task`` at trial start.

    ``coord`` is filled in by the engine once placement is known.
    """

    task: int
    ramp_start: float
    ramp_rate: float = RAMP_RATE
    coord: Coord | None = None


@dataclass(frozen=True)
class FaultSchedule:
    entries: tuple[FaultEntry, ...] = ()
    # crafted scenarios: nodes already dead at t=0, and unpredicted hard failures
    prefailed: tuple[Coord, ...] = ()
    hard_failures: tuple[tuple[Coord, float], ...] = ()

    def resolve(self, placement: dict[int, Coord]) -> FaultSchedule:
        return replace(self, entries=tuple(replace(e, coord=placement[e.task]) for e in self.entries))

    def to_dict(self) -> dict:
        return {
            "entries": [{"task": e.task, "ramp_start": e.ramp_start, "ramp_rate": e.ramp_rate} for e in self.entries],
            "prefailed": [list(c) for c in self.prefailed],
            "hard_failures": [{"coord": list(c), "time": t} for c, t in self.hard_failures],
        }

    @classmethod
    def from_dict(cls, raw: dict) -> FaultSchedule:
        entries = tuple(
            FaultEntry(int(e["task"]), float(e["ramp_start"]), float(e.get("ramp_rate", RAMP_RATE)))
            for e in raw.get("entries", [])
        )
        prefailed = tuple((int(c[0]), int(c[1])) for c in raw.get("prefailed", []))
        hard = tuple(
            ((int(h["coord"][0]), int(h["coord"][1])), float(h["time"])) for h in raw.get("hard_failures", [])
        )
        return cls(entries, prefailed, hard)


def ramp_offset(node: Coord, time: float, schedule: FaultSchedule) -> float:
    return sum(
        e.ramp_rate * (time - e.ramp_start)
        for e in schedule.entries
        if e.coord == node and time >= e.ramp_start
    )


def sample_temperature(
    node: Coord,
    time: float,
    schedule: FaultSchedule,
    rng: np.random.Generator,
    baseline: float = BASELINE,
    sigma: float = NOISE_SIGMA,
) -> SensorReading:
    temperature = baseline + sigma * rng.standard_normal() + ramp_offset(node, time, schedule)
    return SensorReading(node, float(temperature), time)


def predict_failure(reading: SensorReading, threshold: float = THRESHOLD) -> bool:
    return reading.temperature > threshold
