from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pytest

from agentft.agents import ProbeReply
from agentft.config import ExperimentConfig
from agentft.topology import Coord, NodeStatus

_ACCEPTANCE: list[str] = []


def record_criterion(number: int, title: str, passed: bool, detail: str = "") -> None:
    verdict = "PASS" if passed else "FAIL"
    _ACCEPTANCE.append(f"[{verdict}] criterion {number}: {title}" + (f" ({detail})" if detail else ""))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


@dataclass
class Ready:
    value: Any = None
    error: BaseException | None = None


@dataclass
class FakeEnv:
    """Resolves every protocol step immediately, advancing a fake clock."""

    replies: list[ProbeReply] = field(default_factory=list)
    statuses: dict[Coord, NodeStatus] = field(default_factory=dict)
    silent: set = field(default_factory=set)  # dependencies that never acknowledge
    spawn_error: BaseException | None = None
    threshold: float = 70.0
    rebind_timeout: float = 20.0
    seed: int = 0
    now: float = 0.0
    rebinds: list = field(default_factory=list)
    commits: list = field(default_factory=list)

    def __post_init__(self) -> None:
        self.rng = np.random.default_rng(self.seed)

    def probe(self, agent):
        self.now += 10
        return Ready(list(self.replies))

    def reading(self, coord):
        return None

    def status(self, coord):
        return self.statuses.get(coord, NodeStatus.HEALTHY)

    def settle(self):
        return Ready()

    def spawn(self, agent, target):
        self.now += 100
        return Ready(error=self.spawn_error)

    def transfer(self, agent, target):
        self.now += 2 * len(agent.carried_data)
        return Ready()

    def commit(self, agent, source, target):
        self.commits.append((agent.task_id, source, target))

    def delay(self, ms):
        self.now += ms
        return Ready()

    def rebind_cost(self):
        return 8.0

    def rebind(self, agent, dep, new_location):
        self.rebinds.append(dep)
        return dep not in self.silent

    def gather(self, tickets, timeout):
        missing = [d for d, ok in tickets.items() if not ok]
        if missing:
            self.now += timeout
        return Ready(missing)


def drive(gen):
    """Run a protocol generator against FakeEnv awaitables to completion."""
    value, error = None, None
    while True:
        try:
            cmd = gen.throw(error) if error is not None else gen.send(value)
        except StopIteration as stop:
            return stop.value
        value, error = cmd.value, cmd.error


@pytest.fixture
def default_config() -> ExperimentConfig:
    return ExperimentConfig()
