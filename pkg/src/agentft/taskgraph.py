"""Fan-in reduction trees (parallel summation and its k-ary generalisation)."""

from __future__ import annotations

import functools
import operator as _op
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

from .errors import FeedSizeMismatch, InvalidFanIn, InvalidLeafCount

DepId = Union[int, str]  # int: node id; str: external feed "I<k>"


def feed_id(k: int) -> str:
    return f"I{k}"


@dataclass
class ReductionNode:
    id: int
    level: int
    input_deps: list[DepId]
    output_dep: int | None
    data: list[float] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return self.level == 1

    @property
    def is_root(self) -> bool:
        return self.output_dep is None

    def dependencies(self) -> list[DepId]:
        """Input dependencies followed by the output dependency, if any."""
        return list(self.input_deps) + ([self.output_dep] if self.output_dep is not None else [])

    @property
    def total_dependencies(self) -> int:
        return len(self.dependencies())


@dataclass
class TaskGraph:
    nodes: dict[int, ReductionNode]
    levels: dict[int, list[int]]
    fan_in: int = 2
    operator: Callable[[float, float], float] = field(default=_op.add, repr=False)

    @property
    def leaf_count(self) -> int:
        return len(self.levels[1])

    @property
    def depth(self) -> int:
        return max(self.levels)

    @property
    def root(self) -> int:
        return self.levels[self.depth][0]

    def level_of(self, node_id: int) -> int:
        return self.nodes[node_id].level

    def __len__(self) -> int:
        return len(self.nodes)

    def to_dict(self) -> dict:
        return {
            "fan_in": self.fan_in,
            "levels": {str(p): ids for p, ids in sorted(self.levels.items())},
            "nodes": [
                {"id": n.id, "level": n.level, "input_deps": n.input_deps, "output_dep": n.output_dep}
                for n in (self.nodes[i] for i in sorted(self.nodes))
            ],
        }


def _exponent(leaf_count: int, fan_in: int) -> int | None:
    depth = 0
    while leaf_count > 1 and leaf_count % fan_in == 0:
        leaf_count //= fan_in
        depth += 1
    return depth if leaf_count == 1 and depth >= 1 else None


def build_fanin_reduction(
    leaf_count: int, fan_in: int, operator: Callable[[float, float], float] = _op.add
) -> TaskGraph:
    """Build a complete k-ary reduction tree, ids numbered level by level from 1.

    Node ``j`` of a level consumes the ``fan_in`` consecutive nodes
    ``j*fan_in .. j*fan_in + fan_in - 1`` of the level below.
    """
    if not isinstance(fan_in, int) or fan_in < 2:
        raise InvalidFanIn(f"fan-in must be an integer >= 2, got {fan_in!r}")
    if not isinstance(leaf_count, int) or _exponent(leaf_count, fan_in) is None:
        raise InvalidLeafCount(f"leaf count must be a positive power of {fan_in}, got {leaf_count!r}")

    nodes: dict[int, ReductionNode] = {}
    levels: dict[int, list[int]] = {}
    next_id = 1
    level = 1
    below: list[int] = []
    width = leaf_count
    while width >= 1:
        ids = list(range(next_id, next_id + width))
        next_id += width
        levels[level] = ids
        for j, nid in enumerate(ids):
            if level == 1:
                inputs: list[DepId] = [feed_id(j + 1)]
            else:
                inputs = below[j * fan_in : (j + 1) * fan_in]
                for child in inputs:
                    nodes[child].output_dep = nid
            nodes[nid] = ReductionNode(nid, level, inputs, None)
        if width == 1:
            break
        below = ids
        width //= fan_in
        level += 1
    return TaskGraph(nodes, levels, fan_in, operator)


def build_binary_reduction(leaf_count: int) -> TaskGraph:
    if not isinstance(leaf_count, int) or leaf_count < 2 or leaf_count & (leaf_count - 1):
        raise InvalidLeafCount(f"binary tree needs a power-of-two leaf count >= 2, got {leaf_count!r}")
    return build_fanin_reduction(leaf_count, 2)


def reduce_reference(graph: TaskGraph, feed: Sequence[float]) -> float:
    """Fold the whole feed with the graph's operator; the correctness oracle."""
    if len(feed) != graph.leaf_count:
        raise FeedSizeMismatch(f"feed has {len(feed)} values, tree has {graph.leaf_count} leaves")
    return functools.reduce(graph.operator, feed)


def computational_nodes(graph: TaskGraph) -> list[int]:
    return [nid for p in sorted(graph.levels) if p >= 2 for nid in graph.levels[p]]
