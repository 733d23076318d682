"""Logical grid over a fully connected set of physical nodes.

The physical cluster is a switched mesh; the grid exists only because the
communication policy restricts every process to its Moore neighbourhood.
Physical ids are assigned to coordinates row-major.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import DimensionMismatch, InvalidCoordinate

Coord = tuple[int, int]


class NodeStatus(str, Enum):
    HEALTHY = "Healthy"
    PREDICTED_FAILING = "PredictedFailing"
    FAILED = "Failed"


_TRANSITIONS = {
    NodeStatus.HEALTHY: {NodeStatus.PREDICTED_FAILING, NodeStatus.FAILED},
    NodeStatus.PREDICTED_FAILING: {NodeStatus.FAILED},
    NodeStatus.FAILED: set(),
}


@dataclass
class PhysicalNode:
    id: int
    status: NodeStatus = NodeStatus.HEALTHY

    def transition(self, status: NodeStatus) -> None:
        if status == self.status:
            return
        if status not in _TRANSITIONS[self.status]:
            raise ValueError(f"node {self.id}: illegal transition {self.status.value} -> {status.value}")
        self.status = status


@dataclass(frozen=True)
class LogicalNode:
    coord: Coord
    physical: int


@dataclass
class GridTopology:
    rows: int
    cols: int
    cells: dict[Coord, LogicalNode]
    nodes: list[PhysicalNode] = field(repr=False)

    def __contains__(self, coord: object) -> bool:
        return coord in self.cells

    def __len__(self) -> int:
        return len(self.cells)

    def coords(self) -> list[Coord]:
        """All coordinates in row-major order."""
        return [(r, c) for r in range(self.rows) for c in range(self.cols)]

    def check(self, coord: Coord) -> Coord:
        coord = (int(coord[0]), int(coord[1]))
        if coord not in self.cells:
            raise InvalidCoordinate(f"{coord} outside {self.rows}x{self.cols} grid")
        return coord

    def physical(self, coord: Coord) -> PhysicalNode:
        cell = self.cells.get(coord)
        if cell is None:
            cell = self.cells[self.check(coord)]
        return self.nodes[cell.physical]

    def coord_of(self, physical_id: int) -> Coord:
        if not 0 <= physical_id < len(self.nodes):
            raise InvalidCoordinate(f"no physical node {physical_id}")
        return divmod(physical_id, self.cols)

    def status(self, coord: Coord) -> NodeStatus:
        return self.physical(coord).status

    def set_status(self, coord: Coord, status: NodeStatus) -> None:
        self.physical(coord).transition(status)

    def to_dict(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "cells": [
                {"coord": list(coord), "physical": cell.physical, "status": self.nodes[cell.physical].status.value}
                for coord, cell in sorted(self.cells.items())
            ],
        }


def build_grid(node_count: int, rows: int, cols: int) -> GridTopology:
    if node_count < 1 or rows < 1 or cols < 1:
        raise DimensionMismatch(f"grid needs positive sizes, got {node_count} nodes as {rows}x{cols}")
    if rows * cols != node_count:
        raise DimensionMismatch(f"{rows}x{cols} grid cannot hold exactly {node_count} nodes")
    nodes = [PhysicalNode(i) for i in range(node_count)]
    cells = {divmod(i, cols): LogicalNode(divmod(i, cols), i) for i in range(node_count)}
    return GridTopology(rows, cols, cells, nodes)


def is_adjacent(a: Coord, b: Coord) -> bool:
    return a != b and abs(a[0] - b[0]) <= 1 and abs(a[1] - b[1]) <= 1


def neighbors(grid: GridTopology, at: Coord) -> set[Coord]:
    """Moore neighbourhood of ``at``, clipped at the borders (no wrap)."""
    r, c = grid.check(at)
    return {
        (r + dr, c + dc)
        for dr in (-1, 0, 1)
        for dc in (-1, 0, 1)
        if (dr or dc) and 0 <= r + dr < grid.rows and 0 <= c + dc < grid.cols
    }


def healthy_neighbors(grid: GridTopology, at: Coord) -> set[Coord]:
    return {n for n in neighbors(grid, at) if grid.status(n) is NodeStatus.HEALTHY}


def route(src: Coord, dst: Coord) -> list[Coord]:
    """Hop path from src to dst where every step is Moore-adjacent.

    Moves diagonally first, so the hop count equals the Chebyshev distance.
    """
    path = [src]
    r, c = src
    while (r, c) != tuple(dst):
        r += (dst[0] > r) - (dst[0] < r)
        c += (dst[1] > c) - (dst[1] < c)
        path.append((r, c))
    return path


def parse_grid(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", text)
    if not m:
        raise DimensionMismatch(f"grid must look like RxC, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def fit_grid(capacity: int) -> tuple[int, int]:
    """Smallest near-square rows x cols holding at least ``capacity`` cells."""
    rows = max(1, int(capacity**0.5))
    while rows * rows < capacity:
        rows += 1
    cols = -(-capacity // rows)
    return rows, cols
