"""Command-line entry point.

Exit codes: 0 success, 1 configuration or parse error, 2 a trial failed.
"""

from __future__ import annotations

import argparse
import logging
import re
import sys
from pathlib import Path
from typing import Sequence

from .config import ExperimentConfig, load_schedule
from .engine import run_campaign, write_campaign_csv
from .errors import ConfigInvalid, MetricsError
from .metrics import SampleMatrix, compute_metrics, dependency_sweep
from .report import format_table, sweep_csv, write_report, write_sweep
from .topology import parse_grid

EXIT_OK, EXIT_CONFIG, EXIT_TRIAL_FAILED = 0, 1, 2

# flag -> (config field, type)
_FLAGS = {
    "--leaves": ("leaves", int),
    "--fan-in": ("fan_in", int),
    "--rounds": ("rounds", int),
    "--threshold": ("threshold", float),
    "--grace-window": ("grace_window_ms", float),
    "--spawn-cost": ("spawn_ms", float),
    "--rebind-cost": ("rebind_ms_per_dep", float),
    "--transfer-cost": ("transfer_ms_per_value", float),
    "--jitter": ("jitter_pct", float),
    "--trials": ("trials", int),
    "--seed": ("base_seed", int),
}


def _add_config_flags(p: argparse.ArgumentParser, *, fan_in: bool = True) -> None:
    p.add_argument("--config", type=Path, help="JSON experiment config; flags override it")
    p.add_argument("--grid", help="logical grid as RxC, e.g. 4x5")
    p.add_argument("--schedule", help="'auto' (one fault per computational node), 'none', or a JSON file")
    p.add_argument("--allow-concurrent-faults", action="store_true", default=None)
    for flag, (_, typ) in _FLAGS.items():
        if flag == "--fan-in" and not fan_in:
            continue
        p.add_argument(flag, type=typ, default=None)


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    changes = {}
    for flag, (name, _) in _FLAGS.items():
        value = getattr(args, flag.lstrip("-").replace("-", "_"), None)
        if value is not None:
            changes[name] = value
    if args.grid:
        changes["rows"], changes["cols"] = parse_grid(args.grid)
    if args.schedule:
        changes["schedule"] = args.schedule if args.schedule in ("auto", "none") else load_schedule(args.schedule)
    if args.allow_concurrent_faults:
        changes["allow_concurrent_faults"] = True
    return cfg.with_changes(**changes).validate()


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = config_from_args(args)
    out = Path(args.out)
    trace_dir = None if args.no_traces else out / "traces"
    outcomes = run_campaign(cfg, trace_dir=trace_dir, keep_traces=False)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(cfg.to_json(), encoding="utf-8")
    write_campaign_csv(outcomes, out / "campaign.csv", cfg.build_graph())
    failed = [o for o in outcomes if not o.survived]
    migrations = sum(len(o.migration_records) for o in outcomes)
    print(f"{len(outcomes)} trials, {migrations} migrations, {len(failed)} failed -> {out / 'campaign.csv'}")
    for o in failed:
        print(f"  trial {o.trial_id} target {o.target}: {o.reason}", file=sys.stderr)
    return EXIT_TRIAL_FAILED if failed else EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    samples = SampleMatrix.from_csv(args.csv, units=args.units)
    table = compute_metrics(samples)
    levels = {p: ids for p, ids in samples.levels.items() if p >= 2} or samples.levels
    sys.stdout.write(format_table(table, levels))
    if args.out:
        for path in write_report(samples, table, levels, args.out):
            print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def _parse_range(text: str) -> range:
    m = re.fullmatch(r"\s*(\d+)\s*(?:\.\.|-)\s*(\d+)\s*", text)
    if m is None:
        if text.strip().isdigit():
            return range(int(text), int(text) + 1)
        raise ConfigInvalid(f"fan-in range must look like MIN..MAX, got {text!r}")
    lo, hi = int(m.group(1)), int(m.group(2))
    if lo < 2 or hi < lo:
        raise ConfigInvalid(f"bad fan-in range {text!r}")
    return range(lo, hi + 1)


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = config_from_args(args)
    fan_ins = _parse_range(args.fan_in_range)
    points = dependency_sweep(cfg, fan_ins, cfg.trials, cfg.base_seed)
    if args.out:
        write_sweep(points, args.out)
    sys.stdout.write(sweep_csv(points))
    return EXIT_OK


def cmd_validate_config(args: argparse.Namespace) -> int:
    cfg = config_from_args(args)
    sys.stdout.write(cfg.to_json())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="agentft", description="Agent-based proactive fault tolerance simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a trial campaign, write campaign CSV and traces")
    _add_config_flags(p)
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--no-traces", action="store_true", help="skip per-trial JSONL traces")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="aggregate a campaign or samples CSV")
    p.add_argument("csv", type=Path)
    p.add_argument("--out", type=Path, help="directory for table and per-level CSVs")
    p.add_argument("--units", choices=("ms", "s"), default="ms", help="units of durations in the CSV")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("sweep", help="mean reinstatement time against dependency count")
    _add_config_flags(p, fan_in=False)
    p.add_argument("--fan-in", dest="fan_in_range", default="2..8", help="fan-in range MIN..MAX")
    p.add_argument("--out", type=Path, help="write the sweep CSV here too")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate-config", help="check a config and print it normalised")
    _add_config_flags(p)
    p.set_defaults(func=cmd_validate_config)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigInvalid, MetricsError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
