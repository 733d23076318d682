"""Replay a trial trace and check the protocol invariants.

Works only from the serialised trace entries, never from engine objects, so
it is an independent check on the simulator.
"""

from __future__ import annotations

from typing import Iterable

FAILURE_REASONS = frozenset({"NoEscapeRoute", "GraceWindowExceeded", "TransferIncomplete", "AckTimeout"})
_ADDRESSED_TAGS = (5, 6, 7)  # rebind, rebind-ack, data


def _adjacent(a, b) -> bool:
    return tuple(a) != tuple(b) and abs(a[0] - b[0]) <= 1 and abs(a[1] - b[1]) <= 1


def validate_trace(trace: Iterable[dict], grace_window_ms: float) -> list[str]:
    """Return human-readable violations; an empty list means the trace is clean."""
    problems: list[str] = []
    owner: dict[int, tuple[int, int]] = {}
    vacated: dict[int, set[tuple[int, int]]] = {}
    carried: dict[int, list] = {}
    feeds: dict[int, list] = {}
    predicted_at: dict[tuple[int, int], float] = {}
    migrations: list[dict] = []
    faults: list[dict] = []
    last_time = float("-inf")
    survived = None
    reason = None
    task_count = None

    for entry in trace:
        t, kind, p = entry["time"], entry["kind"], entry["payload"]
        if t < last_time:
            problems.append(f"time went backwards at {kind} ({t} < {last_time})")
        last_time = max(last_time, t)

        if kind == "TrialBegin":
            task_count = len(p["graph"]["nodes"])
        elif kind == "Ownership":
            task = p["task"]
            to = tuple(p["to"])
            if p["from"] is None:
                if task in owner:
                    problems.append(f"task {task} acquired twice")
            else:
                src = tuple(p["from"])
                if owner.get(task) != src:
                    problems.append(f"task {task} released from {src} but owned at {owner.get(task)}")
                if not _adjacent(src, to):
                    problems.append(f"task {task} moved {src}->{to}, not Moore-adjacent")
                if p.get("carried") != p.get("reinstated"):
                    problems.append(f"task {task} data changed in transfer: {p.get('carried')} -> {p.get('reinstated')}")
                vacated.setdefault(task, set()).add(src)
                carried[task] = p.get("carried")
            owner[task] = to
            if task_count is not None and len(owner) > task_count:
                problems.append(f"more owners than tasks at t={t}")
        elif kind == "MessageDeliver" and p.get("tag") in _ADDRESSED_TAGS:
            task, dst = p["to_task"], tuple(p["dst"])
            if dst in vacated.get(task, ()):
                problems.append(f"tag {p['tag']} message at t={t} addressed to task {task}'s vacated node {dst}")
            elif owner.get(task) != dst and "dropped" not in p:
                problems.append(f"tag {p['tag']} message delivered to {dst} but task {task} owned at {owner.get(task)}")
        elif kind == "Prediction":
            predicted_at.setdefault(tuple(p["at"]), t)
        elif kind == "MigrationComplete":
            migrations.append(p)
            if not _adjacent(p["from"], p["to"]):
                problems.append(f"migration of task {p['task_id']} not adjacent")
            if p["task_id"] in carried and p["data"] != carried[p["task_id"]]:
                problems.append(f"task {p['task_id']} lost data during rebind")
        elif kind == "RoundBegin":
            feeds[p["round"]] = p["feed"]
        elif kind == "RoundEnd":
            expected = sum(feeds.get(p["round"], []))
            if p["result"] != expected:
                problems.append(f"round {p['round']} result {p['result']} != oracle {expected}")
        elif kind == "Fault":
            faults.append(p)
        elif kind == "TrialEnd":
            survived, reason = p["survived"], p["reason"]

    if task_count is not None and len(owner) != task_count:
        problems.append(f"{len(owner)} owned tasks, expected {task_count}")
    if survived is None:
        problems.append("trace has no TrialEnd entry")
        return problems

    late = [m for m in migrations if m["end_time"] - m["predicted_at"] > grace_window_ms]
    if survived:
        if late:
            problems.append(f"survived trial has {len(late)} migration(s) slower than the grace window")
        if faults:
            problems.append(f"survived trial recorded faults: {faults}")
        for coord in predicted_at:
            if any(tuple(owner[task]) == coord for task in owner):
                problems.append(f"task still on predicted node {coord} at trial end")
    else:
        if reason not in FAILURE_REASONS:
            problems.append(f"trial failed for unexpected reason {reason!r}")
        if reason == "GraceWindowExceeded" and not late:
            problems.append("GraceWindowExceeded without a late migration")
    return problems
