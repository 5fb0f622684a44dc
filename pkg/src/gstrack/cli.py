"""Command-line entry point: ``gstrack <command> [options]``.

Commands::

    run-sensor               heat-source tracking on a sensor network
    run-social               opinion tracking on a RES community graph
    run-config FILE          run the scenario described by a JSON config
    sweep --seeds K          run K seeds, tabulate accumulated NMSE
    emit-plot-data REPORT --out CSV
                             per-step NMSE, one column per policy

Every ScenarioConfig field is also a flag (``--horizon 200``,
``--policies proposed,random``, ``--solver '{"tol": 1e-8}'``). Flags win over
the GS_TRACK_SEED environment variable, which wins over a config file.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
from pathlib import Path

from .harness import (
    SEED_ENV_VAR,
    ConfigError,
    ScenarioConfig,
    _parse_seed,
    accumulated_error,
    default_run_name,
    load_config,
    make_config,
    plot_data,
    read_trace_csv,
    run_scenario,
    sweep,
    write_reports,
)


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _str_list(text: str) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


def _int_list(text: str) -> list[int]:
    return [int(s) for s in _str_list(text)]


def _optional_float(text: str):
    return None if text.lower() in ("none", "null", "") else float(text)


_PARSERS = {
    "policies": _str_list,
    "community_sizes": _int_list,
    "solver": json.loads,
    "translation_scale": _optional_float,
    "run_name": str,
}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("scenario overrides")
    for f in dataclasses.fields(ScenarioConfig):
        if f.name == "scenario":
            continue
        default = f.default if f.default is not dataclasses.MISSING else None
        if f.name in _PARSERS:
            kind = _PARSERS[f.name]
        elif isinstance(default, bool):
            kind = _bool
        elif isinstance(default, (int, float, str)):
            kind = type(default)
        else:
            kind = str
        g.add_argument("--" + f.name.replace("_", "-"), dest=f.name, type=kind, default=None)


def _overrides(args: argparse.Namespace) -> dict:
    names = {f.name for f in dataclasses.fields(ScenarioConfig)}
    names.discard("scenario")
    return {k: v for k, v in vars(args).items() if k in names and v is not None}


def _seed_from_env(overrides: dict) -> dict:
    if "seed" not in overrides and SEED_ENV_VAR in os.environ:
        overrides = dict(overrides, seed=_parse_seed(os.environ[SEED_ENV_VAR]))
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gstrack", description="Track time-varying graph signals with adaptive sampling.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("run-sensor", "run-social"):
        p = sub.add_parser(name, help=f"run the {name[4:]} scenario")
        _add_config_flags(p)

    p = sub.add_parser("run-config", help="run a scenario from a JSON config file")
    p.add_argument("config", help="path to the JSON config")
    _add_config_flags(p)

    p = sub.add_parser("sweep", help="run several seeds and tabulate accumulated NMSE")
    p.add_argument("--seeds", type=int, required=True, help="number of seeds (seed, seed+1, ...)")
    p.add_argument("--scenario", choices=("sensor", "social", "custom"), default="sensor")
    p.add_argument("--config", help="optional JSON config to start from")
    _add_config_flags(p)

    p = sub.add_parser("emit-plot-data", help="pivot a trace CSV into per-policy NMSE columns")
    p.add_argument("report", help="trace CSV (or its summary JSON)")
    p.add_argument("--out", required=True, help="output CSV path")
    return parser


def _run(cfg: ScenarioConfig) -> None:
    reports = run_scenario(cfg)
    csv_path, json_path = write_reports(reports, cfg.output_dir, default_run_name(cfg))
    for name, rep in reports.items():
        print(f"{name:15s} accumulated NMSE {accumulated_error(rep):.6g}")
    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")


def _emit_plot_data(report: str, out: str) -> None:
    path = Path(report)
    if path.suffix == ".json" and path.name.endswith("_summary.json"):
        path = path.with_name(path.name[: -len("_summary.json")] + "_trace.csv")
    header, body = plot_data(read_trace_csv(path))
    out_path = Path(out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(body)
    print(f"wrote {out_path}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command in ("run-sensor", "run-social"):
            _run(make_config(args.command[4:], **_seed_from_env(_overrides(args))))
        elif args.command == "run-config":
            _run(load_config(args.config, _overrides(args)))
        elif args.command == "sweep":
            if args.seeds < 1:
                raise ConfigError("--seeds must be >= 1")
            if args.config:
                cfg = load_config(args.config, _overrides(args))
            else:
                cfg = make_config(args.scenario, **_seed_from_env(_overrides(args)))
            seeds = [cfg.seed + k for k in range(args.seeds)]
            path = sweep(cfg, seeds, cfg.output_dir)
            print(f"wrote {path}")
        elif args.command == "emit-plot-data":
            _emit_plot_data(args.report, args.out)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"gstrack: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
