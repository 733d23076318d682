"""Deterministic discrete-event core and trial orchestration.

A trial places one agent per task node on the grid, feeds the reduction
tree for a number of rounds and ramps the temperature of scheduled nodes.
When a node's sensor crosses the threshold, its agents run the migration
protocol; the node hard-fails ``grace_window_ms`` after the prediction.

Everything random is drawn from a single ``numpy`` generator in event order,
so the trace is a pure function of (config, seed, stream).
"""

from __future__ import annotations

import csv
import functools
import heapq
import itertools
import json
import logging
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping

import numpy as np

from . import agents as proto
from .agents import Agent, MigrationRecord, Phase, ProbeReply, RebindMessage
from .config import ExperimentConfig
from .errors import (
    ConfigInvalid,
    PolicyViolation,
    SimulationError,
    SpawnFailed,
    TransferIncomplete,
    TrialFailure,
)
from .sensors import FaultEntry, FaultSchedule, SensorReading, predict_failure, ramp_offset
from .taskgraph import DepId, TaskGraph, computational_nodes, reduce_reference
from .topology import Coord, GridTopology, NodeStatus, is_adjacent, neighbors, route

log = logging.getLogger(__name__)


class EventKind(str, Enum):
    SENSOR_TICK = "SensorTick"
    MESSAGE_DELIVER = "MessageDeliver"
    SPAWN_COMPLETE = "SpawnComplete"
    NODE_HARD_FAIL = "NodeHardFail"
    ROUND_START = "RoundStart"
    ROUND_END = "RoundEnd"
    TIMER = "Timer"


class MsgType(IntEnum):
    PROBE = 1
    PROBE_ACK = 2
    SPAWN = 3
    TRANSFER = 4
    REBIND = 5
    REBIND_ACK = 6
    DATA = 7


class CausalityError(SimulationError):
    pass


@dataclass(order=True)
class SimEvent:
    time: float
    seq: int
    kind: EventKind = field(compare=False)
    payload: dict = field(compare=False, default_factory=dict)
    action: Callable[[SimEvent], None] | None = field(compare=False, default=None, repr=False)
    cancelled: bool = field(compare=False, default=False)


class EventLoop:
    """Processes events in strict (time, insertion sequence) order."""

    def __init__(self) -> None:
        self.now = 0.0
        self._queue: list[SimEvent] = []
        self._seq = itertools.count()
        self.stopped = False

    def schedule(
        self, time: float, kind: EventKind, payload: dict | None = None, action: Callable[[SimEvent], None] | None = None
    ) -> SimEvent:
        if time < self.now:
            raise CausalityError(f"cannot schedule {kind.value} at {time} before now={self.now}")
        event = SimEvent(time, next(self._seq), kind, payload or {}, action)
        heapq.heappush(self._queue, event)
        return event

    def run(self, observer: Callable[[SimEvent], None] | None = None) -> None:
        while self._queue and not self.stopped:
            event = heapq.heappop(self._queue)
            if event.cancelled:
                continue
            self.now = event.time
            if event.action is not None:
                event.action(event)
            if observer is not None:
                observer(event)

    def __len__(self) -> int:
        return len(self._queue)


class Pending:
    """A value that an event will deliver later; processes yield these."""

    __slots__ = ("done", "value", "error", "waiter", "callbacks")

    def __init__(self) -> None:
        self.done = False
        self.value: Any = None
        self.error: BaseException | None = None
        self.waiter: Process | None = None
        self.callbacks: list[Callable[[Pending], None]] = []

    def resolve(self, value: Any = None) -> None:
        self._finish(value, None)

    def fail(self, error: BaseException) -> None:
        self._finish(None, error)

    def _finish(self, value: Any, error: BaseException | None) -> None:
        if self.done:
            return
        self.done, self.value, self.error = True, value, error
        for cb in self.callbacks:
            cb(self)
        waiter, self.waiter = self.waiter, None
        if waiter is not None:
            waiter.resume(value, error)


class Process:
    def __init__(
        self,
        gen,
        on_done: Callable[[Any], None],
        on_error: Callable[[TrialFailure], None],
    ) -> None:
        self._gen = gen
        self._on_done = on_done
        self._on_error = on_error
        self.waiting: Pending | None = None
        self.finished = False

    def start(self) -> None:
        self.resume(None, None)

    def interrupt(self, error: TrialFailure) -> None:
        pending, self.waiting = self.waiting, None
        if pending is not None:
            pending.waiter = None
        self.resume(None, error)

    def resume(self, value: Any, error: BaseException | None) -> None:
        if self.finished:
            return
        self.waiting = None
        while True:
            try:
                cmd = self._gen.throw(error) if error is not None else self._gen.send(value)
            except StopIteration as stop:
                self.finished = True
                self._on_done(stop.value)
                return
            except TrialFailure as err:
                self.finished = True
                self._on_error(err)
                return
            if cmd.done:
                value, error = cmd.value, cmd.error
                continue
            cmd.waiter = self
            self.waiting = cmd
            return


@dataclass
class TrialOutcome:
    trial_id: int
    seed: int
    survived: bool
    round_results: list[float]
    migration_records: list[MigrationRecord]
    trace_path: str | None = None
    target: int | None = None
    reason: str | None = None
    expected_results: list[float] = field(default_factory=list)
    trace: list[dict] = field(default_factory=list, repr=False)

    def summary(self) -> dict:
        return {
            "trial_id": self.trial_id,
            "seed": self.seed,
            "target": self.target,
            "survived": self.survived,
            "reason": self.reason,
            "round_results": self.round_results,
            "migrations": [r.to_dict() for r in self.migration_records],
        }


def default_placement(graph: TaskGraph, grid: GridTopology) -> dict[int, Coord]:
    """Task ids row-major over the grid cells that are not already failed."""
    free = [c for c in grid.coords() if grid.status(c) is not NodeStatus.FAILED]
    if len(free) < len(graph):
        raise ConfigInvalid(f"only {len(free)} usable cells for {len(graph)} task nodes")
    return {nid: free[i] for i, nid in enumerate(sorted(graph.nodes))}


def _coord_list(c: Coord | None) -> list[int] | None:
    return None if c is None else [int(c[0]), int(c[1])]


class Trial:
    """One simulated run; also the environment handed to agent protocols."""

    def __init__(
        self,
        config: ExperimentConfig,
        seed: int,
        *,
        trial_id: int = 0,
        target: int | None = None,
        stream: int | None = None,
    ) -> None:
        config.validate()
        self.config = config
        self.seed = seed
        self.trial_id = trial_id
        self.target = target
        self.rng = np.random.default_rng([seed] if stream is None else [seed, stream])
        self.loop = EventLoop()
        self.graph = config.build_graph()
        self.grid = config.build_grid()
        self.threshold = config.threshold
        self.rebind_timeout = config.rebind_timeout_ms
        self.trace: list[dict] = []
        self._coords = self.grid.coords()
        self._index = {c: i for i, c in enumerate(self._coords)}
        self._temps: np.ndarray | None = None
        self._temps_at = 0.0
        self._uniform = np.empty(0)
        self._uniform_pos = 0

        schedule = self._build_schedule(target)
        for coord in schedule.prefailed:
            self.grid.set_status(coord, NodeStatus.FAILED)
        placement = dict(config.placement) if config.placement else default_placement(self.graph, self.grid)
        for nid, coord in placement.items():
            if self.grid.status(coord) is NodeStatus.FAILED:
                raise ConfigInvalid(f"task {nid} placed on failed node {coord}")
        self.schedule = schedule.resolve(placement)
        self.agents = {nid: Agent.wrap(self.graph.nodes[nid], placement) for nid in sorted(self.graph.nodes)}
        self.owners: dict[Coord, set[int]] = {c: set() for c in self.grid.coords()}
        self.feeds = self.rng.integers(0, 1001, size=(config.rounds, self.graph.leaf_count)).tolist()

        self.records: list[MigrationRecord] = []
        self.round_results: list[float] = []
        self.expected = [reduce_reference(self.graph, f) for f in self.feeds]
        self.failed_reason: str | None = None
        self.failed_detail: str | None = None
        self._procs: dict[int, Process] = {}
        self._predicted_at: dict[Coord, float] = {}
        self._migrating = 0
        self._round_active = False
        self._rounds_due = 0
        self._next_round = 0
        self._inbox: dict[int, dict[DepId, float]] = {}
        self._settle_waiters: list[Pending] = []

    # -- setup -----------------------------------------------------------
    def _build_schedule(self, target: int | None) -> FaultSchedule:
        schedule = self.config.schedule
        if isinstance(schedule, FaultSchedule):
            return schedule
        if schedule == "auto" and target is not None:
            if target not in self.graph.nodes:
                raise ConfigInvalid(f"fault target {target} is not a task node")
            lo, hi = self.config.auto_ramp_window()
            start = float(self.rng.uniform(lo, hi)) if hi > lo else lo
            return FaultSchedule((FaultEntry(target, start, self.config.ramp_rate),))
        return FaultSchedule()

    # -- trace -----------------------------------------------------------
    def note(self, kind: str, **payload: Any) -> None:
        self.trace.append({"time": self.loop.now, "kind": kind, "payload": payload})

    def _observe(self, event: SimEvent) -> None:
        self.trace.append({"time": event.time, "kind": event.kind.value, "payload": event.payload})

    # -- environment surface used by agents.py ---------------------------
    @property
    def now(self) -> float:
        return self.loop.now

    def reading(self, coord: Coord) -> SensorReading | None:
        """Latest sensor value; failed nodes report nothing."""
        if self._temps is None or self.grid.status(coord) is NodeStatus.FAILED:
            return None
        return SensorReading(coord, float(self._temps[self._index[coord]]), self._temps_at)

    def status(self, coord: Coord) -> NodeStatus:
        return self.grid.status(coord)

    def jittered(self, base: float) -> float:
        j = self.config.cost.jitter_pct
        if j <= 0:
            return base
        return base * (1.0 + j * (2.0 * self._next_uniform() - 1.0))

    def _next_uniform(self) -> float:
        # batched draws; the stream stays a pure function of the seed
        if self._uniform_pos >= len(self._uniform):
            self._uniform = self.rng.random(256)
            self._uniform_pos = 0
        u = self._uniform[self._uniform_pos]
        self._uniform_pos += 1
        return float(u)

    def delay(self, ms: float) -> Pending:
        pending = Pending()
        self.loop.schedule(self.now + ms, EventKind.TIMER, {"timer": "delay"}, lambda ev: pending.resolve())
        return pending

    def rebind_cost(self) -> float:
        return self.jittered(self.config.cost.rebind_ms_per_dep)

    def settle(self) -> Pending:
        pending = Pending()
        if self._round_active:
            self._settle_waiters.append(pending)
        else:
            pending.resolve()
        return pending

    def probe(self, agent: Agent) -> Pending:
        replies: list[ProbeReply] = []
        pending = Pending()
        origin = agent.location

        def on_probe(coord: Coord) -> None:
            node = self.grid.status(coord)
            if node is NodeStatus.FAILED:
                return
            reply = ProbeReply(coord, node, tuple(sorted(self.owners[coord])), self.reading(coord))
            self.send(
                MsgType.PROBE_ACK, coord, origin,
                {"status": node.value, "agents": list(reply.agents)},
                lambda ev: replies.append(reply),
            )

        for coord in sorted(neighbors(self.grid, origin)):
            self.send(MsgType.PROBE, origin, coord, {"task": agent.task_id}, functools.partial(lambda c, ev: on_probe(c), coord))
        self.loop.schedule(
            self.now + self.config.probe_timeout_ms,
            EventKind.TIMER,
            {"timer": "probe", "task": agent.task_id},
            lambda ev: pending.resolve(sorted(replies, key=lambda r: r.coord)),
        )
        return pending

    def spawn(self, agent: Agent, target: Coord) -> Pending:
        pending = Pending()
        latency = self.send_direct(MsgType.SPAWN, agent.location, target)
        if latency is None:
            pending.fail(SpawnFailed(f"spawn from {agent.location} to {target} rejected by policy"))
            return pending

        def complete(ev: SimEvent) -> None:
            ok = self.grid.status(target) is NodeStatus.HEALTHY
            ev.payload["ok"] = ok
            if ok:
                pending.resolve()
            else:
                pending.fail(SpawnFailed(f"target {target} became {self.grid.status(target).value} before spawn"))

        self.loop.schedule(
            self.now + latency + self.jittered(self.config.cost.spawn_ms),
            EventKind.SPAWN_COMPLETE,
            {"task": agent.task_id, "at": _coord_list(target)},
            complete,
        )
        return pending

    def transfer(self, agent: Agent, target: Coord) -> Pending:
        pending = Pending()
        source = agent.location
        latency = self.send_direct(MsgType.TRANSFER, source, target)
        if latency is None:
            pending.fail(TransferIncomplete(f"transfer {source}->{target} rejected by policy"))
            return pending

        def arrive(ev: SimEvent) -> None:
            if self.grid.status(target) is NodeStatus.FAILED:
                pending.fail(TransferIncomplete(f"target {target} failed during transfer"))
            else:
                pending.resolve()

        cost = self.jittered(self.config.cost.transfer_ms_per_value * len(agent.carried_data))
        self.loop.schedule(
            self.now + latency + cost,
            EventKind.MESSAGE_DELIVER,
            {
                "tag": int(MsgType.TRANSFER),
                "task": agent.task_id,
                "src": _coord_list(source),
                "dst": _coord_list(target),
                "data": list(agent.carried_data),
                "deps": {str(k): _coord_list(v) for k, v in agent.dependency_table.items()},
            },
            arrive,
        )
        return pending

    def commit(self, agent: Agent, source: Coord, target: Coord) -> None:
        self.owners[source].discard(agent.task_id)
        self.owners[target].add(agent.task_id)
        self.note(
            "Ownership",
            task=agent.task_id,
            **{"from": _coord_list(source), "to": _coord_list(target)},
            carried=list(agent.carried_data),
            reinstated=list(agent.task.data) if agent.task is not None else None,
        )

    def rebind(self, agent: Agent, dep: DepId, new_location: Coord) -> Pending:
        ticket = Pending()
        if not isinstance(dep, int):
            self.note("FeedRebind", task=agent.task_id, feed=dep, at=_coord_list(new_location))
            ticket.resolve(True)
            return ticket
        dst = agent.dependency_table[dep]

        def deliver(ev: SimEvent) -> None:
            if not self._accepts(ev, dep, dst):
                return
            peer = self.agents[dep]
            proto.update_knowledge(peer, RebindMessage(agent.task_id, new_location))
            back = peer.dependency_table[agent.task_id]
            self.send(
                MsgType.REBIND_ACK, dst, back, {"task": dep, "to_task": agent.task_id},
                lambda ev2: ticket.resolve(True) if self._accepts(ev2, agent.task_id, back) else None,
            )

        self.send(
            MsgType.REBIND, new_location, dst,
            {"task": agent.task_id, "to_task": dep, "new": _coord_list(new_location)},
            deliver,
        )
        return ticket

    def gather(self, tickets: Mapping[DepId, Pending], timeout: float) -> Pending:
        result = Pending()
        tickets = dict(tickets)

        def check(_: Pending) -> None:
            if all(t.done for t in tickets.values()):
                result.resolve([])

        for ticket in tickets.values():
            ticket.callbacks.append(check)
        check(result)
        if not result.done:
            self.loop.schedule(
                self.now + timeout,
                EventKind.TIMER,
                {"timer": "rebind"},
                lambda ev: result.resolve([d for d, t in tickets.items() if not t.done]),
            )
        return result

    # -- network ---------------------------------------------------------
    def hop_latency(self) -> float:
        return self.jittered(self.config.cost.hop_latency_ms)

    def send_direct(self, tag: MsgType, src: Coord, dst: Coord) -> float | None:
        """Latency of a single-hop send, or None if the policy forbids it."""
        if not is_adjacent(src, dst):
            self.note("Fault", fault="PolicyViolation", tag=int(tag), src=_coord_list(src), dst=_coord_list(dst))
            return None
        return self.hop_latency()

    def send(
        self, tag: MsgType, src: Coord, dst: Coord, payload: dict, on_deliver: Callable[[SimEvent], None]
    ) -> SimEvent | None:
        """Route a message hop by hop; each hop must be Moore-adjacent."""
        path = route(src, dst)
        latency = 0.0
        for a, b in zip(path, path[1:]):
            hop = self.send_direct(tag, a, b)
            if hop is None:
                raise PolicyViolation(f"route {src}->{dst} has a non-adjacent hop {a}->{b}")
            latency += hop
        body = {"tag": int(tag), "src": _coord_list(src), "dst": _coord_list(dst), "hops": len(path) - 1, **payload}
        return self.loop.schedule(self.now + latency, EventKind.MESSAGE_DELIVER, body, on_deliver)

    def _accepts(self, ev: SimEvent, task: int, dst: Coord) -> bool:
        """Whether ``task``'s agent can take a message arriving at ``dst``."""
        if self.grid.status(dst) is NodeStatus.FAILED:
            ev.payload["dropped"] = "node failed"
            return False
        if self.agents[task].location != dst:
            ev.payload["dropped"] = "addressee not here"
            self.note("Fault", fault="StaleAddress", task=task, dst=_coord_list(dst))
            return False
        return True

    # -- rounds ----------------------------------------------------------
    def _round_due(self, ev: SimEvent) -> None:
        self._rounds_due += 1
        self._try_start_round()

    def _try_start_round(self) -> None:
        if self._round_active or self._migrating or self._rounds_due == 0 or self.loop.stopped:
            return
        self._rounds_due -= 1
        self._round_active = True
        r = self._next_round
        self._next_round += 1
        self._inbox = {}
        feed = self.feeds[r]
        self.note("RoundBegin", round=r, feed=feed)
        for i, leaf in enumerate(self.graph.levels[1]):
            self.graph.nodes[leaf].data = [feed[i]]
            self._emit(leaf, r, feed[i])

    def _emit(self, task: int, r: int, value: float) -> None:
        agent = self.agents[task]
        out = self.graph.nodes[task].output_dep
        if out is None:
            self.round_results.append(value)
            self.loop.schedule(
                self.now, EventKind.ROUND_END,
                {"round": r, "result": value, "expected": self.expected[r]},
                self._round_end,
            )
            return
        dst = agent.dependency_table[out]
        self.send(
            MsgType.DATA, agent.location, dst,
            {"round": r, "task": task, "to_task": out, "value": value},
            functools.partial(self._on_data, out, task, r, value, dst),
        )

    def _on_data(self, task: int, sender: int, r: int, value: float, dst: Coord, ev: SimEvent) -> None:
        if not self._accepts(ev, task, dst):
            return
        inbox = self._inbox.setdefault(task, {})
        inbox[sender] = value
        node = self.graph.nodes[task]
        if len(inbox) == len(node.input_deps):
            inputs = [inbox[d] for d in node.input_deps]
            result = functools.reduce(self.graph.operator, inputs)
            node.data = inputs + [result]
            self._emit(task, r, result)

    def _round_end(self, ev: SimEvent) -> None:
        self._round_active = False
        waiters, self._settle_waiters = self._settle_waiters, []
        for w in waiters:
            w.resolve()
        self._try_start_round()

    # -- sensors and faults ---------------------------------------------
    def _ticks_needed(self) -> bool:
        if self.loop.stopped:
            return False
        if self._next_round < self.config.rounds or self._round_active or self._migrating:
            return True
        return any(self.grid.status(e.coord) is NodeStatus.HEALTHY for e in self.schedule.entries)

    def _tick(self, ev: SimEvent) -> None:
        cfg = self.config
        temps = cfg.baseline + self.rng.standard_normal(len(self._coords)) * cfg.noise_sigma
        for coord in {e.coord for e in self.schedule.entries}:
            temps[self._index[coord]] += ramp_offset(coord, self.now, self.schedule)
        predicted = []
        for i in np.flatnonzero(temps > cfg.threshold):
            coord = self._coords[i]
            status = self.grid.status(coord)
            if status is NodeStatus.FAILED:
                continue
            if status is NodeStatus.HEALTHY and predict_failure(self._reading(i, temps), cfg.threshold):
                predicted.append(coord)
        self._temps, self._temps_at = temps, self.now
        ev.payload["predicted"] = [_coord_list(c) for c in predicted]
        for coord in predicted:
            self._on_prediction(coord)
        if self._ticks_needed():
            self.loop.schedule(self.now + cfg.sensor_period_ms, EventKind.SENSOR_TICK, {}, self._tick)

    def _reading(self, i: int, temps: np.ndarray) -> SensorReading:
        return SensorReading(self._coords[i], float(temps[i]), self.now)

    def _on_prediction(self, coord: Coord) -> None:
        self.grid.set_status(coord, NodeStatus.PREDICTED_FAILING)
        self._predicted_at[coord] = self.now
        self.note("Prediction", at=_coord_list(coord), temperature=self.reading(coord).temperature)
        self.loop.schedule(
            self.now + self.config.grace_window_ms, EventKind.NODE_HARD_FAIL,
            {"at": _coord_list(coord), "predicted": True}, self._hard_fail,
        )
        for task in sorted(self.owners[coord]):
            if task in self._procs and not self._procs[task].finished:
                continue
            self._start_protocol(self.agents[task])

    def _start_protocol(self, agent: Agent) -> None:
        self._migrating += 1
        predicted_at = self.now

        def done(record: MigrationRecord) -> None:
            self._migrating -= 1
            self.records.append(record)
            self.note("MigrationComplete", **record.to_dict(), data=list(agent.task.data))
            if record.end_time - predicted_at > self.config.grace_window_ms:
                self._fail("GraceWindowExceeded", f"task {agent.task_id} reinstated after the grace window")
                return
            self._try_start_round()

        def error(err: TrialFailure) -> None:
            self._migrating -= 1
            self._fail(err.reason, str(err))

        proc = Process(proto.respond_to_prediction(agent, self), done, error)
        self._procs[agent.task_id] = proc
        proc.start()

    def _hard_fail(self, ev: SimEvent) -> None:
        coord = tuple(ev.payload["at"])
        if self.grid.status(coord) is NodeStatus.FAILED:
            return
        self.grid.set_status(coord, NodeStatus.FAILED)
        for task in sorted(self.owners[coord]):
            proc = self._procs.get(task)
            if proc is not None and not proc.finished:
                proc.interrupt(TransferIncomplete(f"node {coord} failed before task {task} moved off it"))
            else:
                self._fail("AgentLost", f"task {task} lost with node {coord}")

    def _fail(self, reason: str, detail: str) -> None:
        if self.failed_reason is not None:
            return
        self.failed_reason, self.failed_detail = reason, detail
        self.note("TrialFailed", reason=reason, detail=detail)
        self.loop.stopped = True

    # -- driver ----------------------------------------------------------
    def run(self) -> TrialOutcome:
        cfg = self.config
        self.note(
            "TrialBegin",
            trial_id=self.trial_id,
            seed=self.seed,
            target=self.target,
            topology=self.grid.to_dict(),
            graph=self.graph.to_dict(),
            schedule=self.schedule.to_dict(),
        )
        for task, agent in self.agents.items():
            self.owners[agent.location].add(task)
            self.note("Ownership", task=task, **{"from": None, "to": _coord_list(agent.location)})
        for r in range(cfg.rounds):
            self.loop.schedule(r * cfg.round_period_ms, EventKind.ROUND_START, {"round": r}, self._round_due)
        for coord, when in self.schedule.hard_failures:
            self.loop.schedule(when, EventKind.NODE_HARD_FAIL, {"at": _coord_list(coord), "predicted": False}, self._hard_fail)
        self.loop.schedule(0.0, EventKind.SENSOR_TICK, {}, self._tick)
        self.loop.run(self._observe)

        if self.failed_reason is None and len(self.round_results) < cfg.rounds:
            self._fail("Stalled", f"only {len(self.round_results)} of {cfg.rounds} rounds completed")
        if self.failed_reason is None and self.round_results != self.expected:
            self._fail("WrongResult", "round results differ from the reference reduction")
        survived = self.failed_reason is None
        self.note("TrialEnd", survived=survived, reason=self.failed_reason, rounds=len(self.round_results))
        return TrialOutcome(
            trial_id=self.trial_id,
            seed=self.seed,
            survived=survived,
            round_results=list(self.round_results),
            migration_records=list(self.records),
            target=self.target,
            reason=self.failed_reason,
            expected_results=list(self.expected),
            trace=self.trace,
        )


def trace_lines(trace: Iterable[dict]) -> str:
    return "".join(json.dumps(entry, sort_keys=True, separators=(",", ":")) + "\n" for entry in trace)


def write_trace(outcome: TrialOutcome, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    suffix = f"_n{outcome.target}" if outcome.target is not None else ""
    path = directory / f"trial_{outcome.trial_id:04d}{suffix}.jsonl"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(trace_lines(outcome.trace))
    outcome.trace_path = str(path)
    return path


def run_trial(
    config: ExperimentConfig,
    seed: int,
    *,
    trial_id: int = 0,
    target: int | None = None,
    stream: int | None = None,
    trace_dir: str | Path | None = None,
) -> TrialOutcome:
    """Run one trial. ``target`` selects the node for an auto schedule."""
    outcome = Trial(config, seed, trial_id=trial_id, target=target, stream=stream).run()
    if trace_dir is not None:
        write_trace(outcome, trace_dir)
    return outcome


def run_campaign(
    config: ExperimentConfig,
    trials: int | None = None,
    base_seed: int | None = None,
    *,
    trace_dir: str | Path | None = None,
    keep_traces: bool = True,
) -> list[TrialOutcome]:
    """Run ``trials`` trials seeded ``base_seed + i``.

    With the auto schedule every trial index runs once per computational
    node, each run injecting a single fault on that node.
    """
    trials = config.trials if trials is None else trials
    base_seed = config.base_seed if base_seed is None else base_seed
    if trials < 1:
        raise ConfigInvalid("trials must be >= 1")
    config.validate()
    targets: list[int | None] = [None]
    if config.schedule == "auto":
        targets = list(computational_nodes(config.build_graph()))
    outcomes = []
    for i in range(trials):
        for target in targets:
            seed = base_seed + i
            try:
                outcome = run_trial(config, seed, trial_id=i, target=target, stream=target, trace_dir=trace_dir)
            except ConfigInvalid:
                raise
            except SimulationError as err:
                log.warning("trial %d (target %s) aborted: %s", i, target, err)
                outcome = TrialOutcome(i, seed, False, [], [], target=target, reason=type(err).__name__)
            if not keep_traces:
                outcome.trace = []
            outcomes.append(outcome)
    return outcomes


CAMPAIGN_COLUMNS = ["trial_id", "seed", "node_id", "level", "t_start_ms", "t_end_ms", "rebinds", "survived"]


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def campaign_rows(outcomes: Iterable[TrialOutcome], graph: TaskGraph | None = None) -> list[list[str]]:
    rows = []
    for o in outcomes:
        survived = "1" if o.survived else "0"
        for rec in o.migration_records:
            rows.append([
                str(o.trial_id), str(o.seed), str(rec.task_id), str(rec.level),
                _fmt(rec.start_time), _fmt(rec.end_time), str(rec.rebind_count), survived,
            ])
        if not o.survived and not any(r.task_id == o.target for r in o.migration_records) and o.target is not None:
            level = str(graph.level_of(o.target)) if graph is not None else ""
            rows.append([str(o.trial_id), str(o.seed), str(o.target), level, "", "", "", survived])
    return rows


def write_campaign_csv(outcomes: Iterable[TrialOutcome], path: str | Path, graph: TaskGraph | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CAMPAIGN_COLUMNS)
        writer.writerows(campaign_rows(outcomes, graph))
    return path
