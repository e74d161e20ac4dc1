"""Command-line front end: run / sweep / selftest, CSV and JSON output.

Config files are flat `key = value` text with `#` comments.  Run keys mirror
ExperimentConfig; sweep configs add `axis`, `values`, `seeds`, and optionally
`strategies`.  `--set key=value` overrides are applied after the file parse,
last occurrence winning; unknown keys are an error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import fields, replace
from pathlib import Path

from . import selftest as selftest_mod
from .engine import ExperimentConfig, MetricsReport, default_threads, run, sweep

_BOOL_KEYS = {"rho1_encoding_fix", "record_log"}
_INT_KEYS = {"s_users", "t_slots", "seed"}
_STR_KEYS = {"strategy", "channel_mode"}
_SWEEP_KEYS = {"axis", "values", "seeds", "strategies"}
_OPTIONAL_FLOAT_KEYS = {"delta", "eps_power", "d_cap"}

_CONFIG_KEYS = {f.name for f in fields(ExperimentConfig)}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse flat key=value lines; later occurrences win."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def _convert(key: str, value: str):
    if key in _BOOL_KEYS:
        lowered = value.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{key}: expected a boolean, got {value!r}")
    if key in _INT_KEYS:
        return int(float(value))
    if key in _STR_KEYS:
        return value
    if key in _OPTIONAL_FLOAT_KEYS and value.lower() in ("none", "default"):
        return None
    return float(value)


def build_config(entries: dict) -> tuple[ExperimentConfig, dict]:
    """Split raw entries into an ExperimentConfig and sweep directives."""
    cfg_kwargs = {}
    sweep_spec = {}
    for key, value in entries.items():
        if key in _SWEEP_KEYS:
            sweep_spec[key] = value
        elif key in _CONFIG_KEYS:
            cfg_kwargs[key] = _convert(key, value)
        else:
            raise ValueError(f"unknown config key {key!r}")
    return ExperimentConfig(**cfg_kwargs), sweep_spec


def _parse_list(text: str):
    return [item.strip() for item in text.split(",") if item.strip()]


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return f"{value:.9g}"
    if value is None:
        return ""
    return str(value)


def report_row(report: MetricsReport, max_users: int) -> dict:
    """Flatten one report into the output schema (config echo included)."""
    cfg = report.config
    row = {
        "strategy": cfg.strategy,
        "s_users": cfg.s_users,
        "v": cfg.v,
        "l_av": cfg.l_av,
        "rho": cfg.rho,
        "seed": cfg.seed,
        "t_slots": cfg.t_slots,
        "total_utility": report.total_utility,
        "spectral_efficiency_total": report.spectral_efficiency_total,
    }
    for i in range(max_users):
        row[f"throughput_user_{i + 1}"] = (report.per_user_throughput[i]
                                           if i < len(report.per_user_throughput)
                                           else math.nan)
    row["avg_power"] = report.avg_power
    for i in range(max_users):
        row[f"avg_block_size_user_{i + 1}"] = (report.avg_block_size[i]
                                               if i < len(report.avg_block_size)
                                               else math.nan)
    row["ack_fraction"] = report.ack_fraction
    for i in range(max_users):
        row[f"max_queue_user_{i + 1}"] = (report.max_queue[i]
                                          if i < len(report.max_queue)
                                          else math.nan)
    row["violations"] = report.violations_total
    for i in range(max_users):
        row[f"delivered_user_{i + 1}"] = (report.delivered_throughput[i]
                                          if i < len(report.delivered_throughput)
                                          else math.nan)
    row.update({
        "sched_fraction": report.sched_fraction,
        "ack_count": report.ack_count,
        "sched_count": report.sched_count,
        "outage_count": report.outage_count,
        "max_z": report.max_z,
        "failed": cfg and report.failed,
        "k": cfg.k,
        "i_max": cfg.i_max,
        "p_av": cfg.p_av,
        "p_peak": cfg.p_peak,
        "delta": cfg.delta_eff,
        "eps_power": cfg.eps_power_eff,
        "eps_overhead": cfg.eps_overhead,
        "d_cap": cfg.d_cap_eff,
        "warmup_fraction": cfg.warmup_fraction,
        "channel_mode": cfg.channel_mode,
        "ar_old_weight": cfg.ar_old_weight,
        "rho1_encoding_fix": cfg.rho1_encoding_fix,
        "axis": report.axis,
        "axis_value": report.axis_value,
    })
    return row


def write_results(reports: list[MetricsReport], path, fmt: str = "csv") -> None:
    """Write reports as CSV (9-significant-digit floats) or JSON."""
    if not reports:
        raise ValueError("no reports to write")
    max_users = max(r.config.s_users for r in reports)
    rows = [report_row(r, max_users) for r in reports]
    path = Path(path)
    if fmt == "csv":
        header = list(rows[0].keys())
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_fmt(row[key]) for key in header))
        path.write_text("\n".join(lines) + "\n")
    elif fmt == "json":
        def scrub(row):
            return {k: (None if isinstance(v, float) and math.isnan(v) else v)
                    for k, v in row.items()}
        path.write_text(json.dumps([scrub(r) for r in rows], indent=2) + "\n")
    else:
        raise ValueError(f"unknown output format {fmt!r}")


def _load_entries(args) -> dict:
    entries: dict = {}
    if args.config:
        text = Path(args.config).read_text()
        entries.update(parse_config_text(text, source=str(args.config)))
    for override in args.set or []:
        if "=" not in override:
            raise ValueError(f"--set expects key=value, got {override!r}")
        key, _, value = override.partition("=")
        entries[key.strip()] = value.strip()
    return entries


def _cmd_run(args) -> int:
    cfg, sweep_spec = build_config(_load_entries(args))
    if sweep_spec:
        raise ValueError("sweep keys present; use the `sweep` subcommand")
    report = run(cfg)
    write_results([report], args.output, args.format)
    print(f"wrote 1 report to {args.output}")
    if report.failed:
        print(f"INVARIANT VIOLATION at slot {report.failure_slot}: "
              f"queues {report.failure_snapshot}", file=sys.stderr)
        return 1
    return 0


def _cmd_sweep(args) -> int:
    cfg, sweep_spec = build_config(_load_entries(args))
    if "axis" not in sweep_spec or "values" not in sweep_spec:
        raise ValueError("sweep config needs `axis` and `values`")
    axis = sweep_spec["axis"]
    values = [float(v) for v in _parse_list(sweep_spec["values"])]
    seeds = [int(float(s)) for s in _parse_list(sweep_spec.get("seeds", "1"))]
    strategies = (_parse_list(sweep_spec["strategies"])
                  if "strategies" in sweep_spec else None)
    reports = sweep(cfg, axis, values, seeds, strategies=strategies,
                    threads=args.threads)
    write_results(reports, args.output, args.format)
    print(f"wrote {len(reports)} reports to {args.output}")
    n_failed = sum(1 for r in reports if r.failed)
    if n_failed:
        print(f"{n_failed} runs violated invariants", file=sys.stderr)
        return 1
    return 0


def _cmd_selftest(args) -> int:
    results = selftest_mod.run_all(quick=args.quick)
    ok = True
    for res in results:
        print(res.line())
        ok = ok and res.passed
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rateless-sim",
        description="Slot-level downlink simulator: rateless-code control, "
                    "genie and fixed-rate baselines.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one configuration")
    p_run.add_argument("--config", type=Path, default=None)
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE")
    p_run.add_argument("--output", type=Path, default=Path("results.csv"))
    p_run.add_argument("--format", choices=("csv", "json"), default="csv")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    p_sweep.add_argument("--config", type=Path, required=True)
    p_sweep.add_argument("--set", action="append", metavar="KEY=VALUE")
    p_sweep.add_argument("--output", type=Path, default=Path("sweep.csv"))
    p_sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    p_sweep.add_argument("--threads", type=int, default=None,
                         help="worker processes (default: RATELESS_SIM_THREADS "
                              "or machine parallelism)")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_self = sub.add_parser("selftest", help="brute-force oracle suites")
    p_self.add_argument("--quick", action="store_true",
                        help="reduced instance counts (development aid)")
    p_self.set_defaults(func=_cmd_selftest)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
