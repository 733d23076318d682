"""Delimited report files: the summary table, per-level trial series, sweep.

All writers use LF line endings and '.' decimals so outputs diff cleanly.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable

import numpy as np

from .metrics import MetricsTable, SampleMatrix, SweepPoint


def _csv_text(header: list[str], rows: Iterable[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def format_table(table: MetricsTable, levels: dict[int, list[int]], digits: int = 4) -> str:
    """Render per-node, per-level and overall means (seconds) as a text grid."""
    order = [(p, n) for p in sorted(levels) for n in levels[p]]
    width = max(digits + 3, 6)
    cell = f"{{:>{width}}}"
    num = f"{{:>{width}.{digits}f}}"
    label = "{:<14}"

    lines = [
        label.format("p") + " ".join(cell.format(p) for p, _ in order),
        label.format("n") + " ".join(cell.format(n) for _, n in order),
        label.format("MT_Nn (sec)") + " ".join(num.format(table.per_node[n]) for _, n in order),
        label.format("MT_Lp (sec)") + " ".join(num.format(table.per_level[p]) for p, _ in order),
        label.format("MT_NN (sec)") + num.format(table.overall_by_node).strip() + "  (mean over nodes)",
        label.format("") + num.format(table.overall_by_level).strip() + "  (mean over levels)",
    ]
    return "\n".join(lines) + "\n"


def table_csv(table: MetricsTable, levels: dict[int, list[int]]) -> str:
    rows: list[list] = []
    for p in sorted(levels):
        for n in levels[p]:
            rows.append(["MT_Nn", p, n, f"{table.per_node[n]:.6f}"])
    for p in sorted(levels):
        rows.append(["MT_Lp", p, "", f"{table.per_level[p]:.6f}"])
    rows.append(["MT_NN_by_node", "", "", f"{table.overall_by_node:.6f}"])
    rows.append(["MT_NN_by_level", "", "", f"{table.overall_by_level:.6f}"])
    return _csv_text(["row", "level", "node", "value_s"], rows)


def level_series_csv(samples: SampleMatrix, table: MetricsTable, level: int, members: list[int]) -> str:
    """One row per trial: each node's duration plus the level mean as a constant column."""
    rows = []
    data = np.vstack([samples.row(n) for n in members])
    for t in range(samples.trials):
        rows.append([t + 1] + [f"{v:.6f}" for v in data[:, t]] + [f"{table.per_level[level]:.6f}"])
    return _csv_text(["trial"] + [f"N{n}" for n in members] + ["level_mean"], rows)


def write_report(samples: SampleMatrix, table: MetricsTable, levels: dict[int, list[int]], out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    written = [
        _write(out / "table1.txt", format_table(table, levels)),
        _write(out / "table1.csv", table_csv(table, levels)),
    ]
    for p in sorted(levels):
        written.append(_write(out / f"level_{p}.csv", level_series_csv(samples, table, p, levels[p])))
    return written


def sweep_csv(points: Iterable[SweepPoint]) -> str:
    rows = [[p.fan_in, p.total_dependencies, f"{p.mean_reinstatement_ms:.6f}", p.trials, p.samples] for p in points]
    return _csv_text(["fan_in", "total_dependencies", "mean_reinstatement_ms", "trials", "samples"], rows)


def write_sweep(points: Iterable[SweepPoint], path: str | Path) -> Path:
    return _write(Path(path), sweep_csv(points))
