"""Agents wrapping reduction sub-tasks, and their migration protocol.

An agent carries only state (the task's data and its dependency table); the
protocol steps are generators that yield pending operations to the
environment and are resumed with the result, so the same code runs inside
the discrete-event engine and under a hand-driven fake in tests::

    record = yield from respond_to_prediction(agent, env)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Generator, Mapping, Protocol, Union

import numpy as np

from .errors import AckTimeout, NoEscapeRoute, ProtocolError, UnknownDependency
from .sensors import SensorReading, predict_failure
from .taskgraph import DepId, ReductionNode
from .topology import Coord, NodeStatus

Step = Generator[Any, Any, Any]


class Phase(str, Enum):
    IDLE = "Idle"
    PERCEIVING = "Perceiving"
    DECIDING = "Deciding"
    MIGRATING = "Migrating"
    REBINDING = "Rebinding"


@dataclass
class Agent:
    agent_id: int
    task_id: int
    location: Coord
    dependency_table: dict[DepId, Coord | None]
    carried_data: list[float] = field(default_factory=list)
    phase: Phase = Phase.IDLE
    task: ReductionNode | None = field(default=None, repr=False, compare=False)

    @classmethod
    def wrap(cls, task: ReductionNode, placement: Mapping[int, Coord]) -> Agent:
        # external feeds live outside the grid and have no coordinate
        table = {dep: (placement[dep] if isinstance(dep, int) else None) for dep in task.dependencies()}
        return cls(task.id, task.id, placement[task.id], table, task=task)

    @property
    def dependency_count(self) -> int:
        return len(self.dependency_table)


@dataclass(frozen=True)
class ProbeReply:
    """Answer to an 'are you alive' probe from one neighbouring node."""

    coord: Coord
    status: NodeStatus
    agents: tuple[int, ...]
    reading: SensorReading | None = None


@dataclass(frozen=True)
class RebindMessage:
    sender: int
    new_location: Coord


@dataclass(frozen=True)
class Perception:
    alive_agents: frozenset[int]
    alive_nodes: frozenset[Coord]
    own_sensor: SensorReading | None
    neighbor_sensors: Mapping[Coord, SensorReading]
    healthy_nodes: frozenset[Coord] = frozenset()
    occupied_nodes: frozenset[Coord] = frozenset()
    imminent_failure: bool = False


@dataclass
class MigrationRecord:
    agent_id: int
    task_id: int
    level: int
    source: Coord
    target: Coord
    start_time: float
    end_time: float
    rebind_count: int
    predicted_at: float | None = None

    @property
    def duration(self) -> float:
        """Reinstatement interval: spawn start to last rebind acknowledgment."""
        return self.end_time - self.start_time

    def to_dict(self) -> dict:
        return {
            "agent_id": self.agent_id,
            "task_id": self.task_id,
            "level": self.level,
            "from": list(self.source),
            "to": list(self.target),
            "start_time": self.start_time,
            "end_time": self.end_time,
            "rebind_count": self.rebind_count,
            "predicted_at": self.predicted_at,
        }


class Environment(Protocol):
    """What the protocol needs from its host. Awaitables are opaque: yield them."""

    now: float
    threshold: float
    rng: np.random.Generator
    rebind_timeout: float

    def probe(self, agent: Agent) -> Any: ...  # -> list[ProbeReply]
    def reading(self, coord: Coord) -> SensorReading | None: ...
    def status(self, coord: Coord) -> NodeStatus: ...
    def settle(self) -> Any: ...
    def spawn(self, agent: Agent, target: Coord) -> Any: ...
    def transfer(self, agent: Agent, target: Coord) -> Any: ...
    def commit(self, agent: Agent, source: Coord, target: Coord) -> None: ...
    def delay(self, ms: float) -> Any: ...
    def rebind_cost(self) -> float: ...
    def rebind(self, agent: Agent, dep: DepId, new_location: Coord) -> Any: ...
    def gather(self, tickets: Mapping[DepId, Any], timeout: float) -> Any: ...  # -> list of unacked deps


def perceive(agent: Agent, env: Environment) -> Step:
    if agent.phase not in (Phase.IDLE, Phase.PERCEIVING):
        raise ProtocolError(f"agent {agent.agent_id} cannot perceive while {agent.phase.value}")
    agent.phase = Phase.PERCEIVING
    replies: list[ProbeReply] = yield env.probe(agent)
    for reply in replies:
        update_knowledge(agent, reply)
    own = env.reading(agent.location)
    imminent = (own is not None and predict_failure(own, env.threshold)) or (
        env.status(agent.location) is not NodeStatus.HEALTHY
    )
    return Perception(
        alive_agents=frozenset(a for r in replies for a in r.agents),
        alive_nodes=frozenset(r.coord for r in replies),
        own_sensor=own,
        neighbor_sensors={r.coord: r.reading for r in replies if r.reading is not None},
        healthy_nodes=frozenset(r.coord for r in replies if r.status is NodeStatus.HEALTHY),
        occupied_nodes=frozenset(r.coord for r in replies if r.agents),
        imminent_failure=imminent,
    )


def decide_target(agent: Agent, perception: Perception, rng: np.random.Generator) -> Coord:
    """Pick a random healthy neighbour, preferring ones that host no agent.

    Neighbour sensor data is recorded in the perception but not weighed:
    adjacent nodes are assumed not to fail in the next step.
    """
    if not perception.imminent_failure:
        raise ProtocolError(f"agent {agent.agent_id}: no failure predicted, nothing to decide")
    agent.phase = Phase.DECIDING
    healthy = perception.healthy_nodes & perception.alive_nodes
    if not healthy:
        raise NoEscapeRoute(f"agent {agent.agent_id} at {agent.location} has no healthy neighbour")
    pool = sorted(healthy - perception.occupied_nodes) or sorted(healthy)
    return pool[int(rng.integers(len(pool)))]


def migrate(agent: Agent, target: Coord, env: Environment) -> Step:
    if agent.phase is not Phase.DECIDING:
        raise ProtocolError(f"agent {agent.agent_id} must decide before migrating")
    agent.phase = Phase.MIGRATING
    source = agent.location
    start = env.now
    yield env.spawn(agent, target)
    agent.carried_data = list(agent.task.data) if agent.task is not None else list(agent.carried_data)
    yield env.transfer(agent, target)
    agent.location = target
    if agent.task is not None:
        agent.task.data = list(agent.carried_data)
    env.commit(agent, source, target)
    agent.phase = Phase.REBINDING
    acks = yield from notify_dependents(agent, target, env)
    agent.phase = Phase.IDLE
    level = agent.task.level if agent.task is not None else 0
    return MigrationRecord(agent.agent_id, agent.task_id, level, source, target, start, env.now, acks)


def notify_dependents(agent: Agent, new_location: Coord, env: Environment) -> Step:
    """Send a rebind to every dependency, then collect acknowledgments.

    Unacknowledged dependencies get exactly one resend.
    """
    tickets = {}
    for dep in agent.dependency_table:
        yield env.delay(env.rebind_cost())
        tickets[dep] = env.rebind(agent, dep, new_location)
    missing = yield env.gather(tickets, env.rebind_timeout)
    if missing:
        retry = {dep: env.rebind(agent, dep, new_location) for dep in missing}
        missing = yield env.gather(retry, env.rebind_timeout)
        if missing:
            raise AckTimeout(f"agent {agent.agent_id}: no rebind ack from {list(missing)}")
    return len(tickets)


def update_knowledge(agent: Agent, event: Union[RebindMessage, ProbeReply]) -> Agent:
    if isinstance(event, RebindMessage):
        if event.sender not in agent.dependency_table:
            raise UnknownDependency(f"agent {agent.agent_id} does not depend on {event.sender}")
        agent.dependency_table[event.sender] = event.new_location
    else:
        for other in event.agents:
            if other in agent.dependency_table:
                agent.dependency_table[other] = event.coord
    return agent


def respond_to_prediction(agent: Agent, env: Environment) -> Step:
    """Full reaction to a failure prediction: perceive, decide, migrate, notify."""
    predicted_at = env.now
    perception = yield from perceive(agent, env)
    target = decide_target(agent, perception, env.rng)
    yield env.settle()
    record = yield from migrate(agent, target, env)
    record.predicted_at = predicted_at
    return record
