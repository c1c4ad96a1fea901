"""Command-line entry point: ``emdtest <subcommand> [flags]``.

Exit codes: 0 on success (whatever the verdicts), 2 for bad parameters,
3 for unreadable or unwritable files, 4 for malformed instance data.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, EmdTestError, ParamError, ParseError
from .harness import (CSV_COLUMNS, GENERATORS, ExperimentConfig, calibration_table,
                      instance_json, load_instance, oracle_of, read_json, report_csv,
                      rows_csv, run_experiment)

EXIT_PARAM, EXIT_IO, EXIT_PARSE = 2, 3, 4

SUBCOMMAND_MODE = {
    "estimate": "estimate",
    "test": "test",
    "test-known": "test-known",
    "test-cluster": "test-cluster",
    "tree-emd": "tree",
}


def _kv(text: str):
    """``key=value`` with the value parsed as JSON when possible."""
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def _common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--eps", type=float, help="distance / accuracy parameter")
    sp.add_argument("--delta", type=float, help="failure probability (tree estimator)")
    sp.add_argument("--dim", type=int, help="dimension d")
    sp.add_argument("--span", type=float, help="side of the domain [0, span]^d")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int, help="base seed; trial t uses seed + t")
    sp.add_argument("--c-mult", type=float, dest="c", help="constant multiplier of every budget")
    sp.add_argument("--in", action="append", dest="inputs", metavar="FILE",
                    help="one instance file with p and q, or two distribution files")
    sp.add_argument("--gen", dest="generator", choices=sorted(GENERATORS))
    sp.add_argument("--param", action="append", type=_kv, default=[], metavar="KEY=VALUE",
                    help="generator parameter (repeatable)")
    sp.add_argument("--config", help="JSON experiment config; flags override its fields")
    sp.add_argument("--out", help="output path (default: stdout)")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emdtest", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("estimate", "estimate EMD(p, q) to additive eps"),
        ("test", "closeness test: p == q vs EMD(p, q) > eps"),
        ("test-known", "closeness test with q known exactly"),
        ("test-cluster", "closeness test for clusterable data"),
        ("tree-emd", "exact and sampled EMD on a weighted tree"),
        ("bench", "success rates across budget multipliers 1, 4, 16"),
    ]:
        sp = sub.add_parser(name, help=help_text)
        _common(sp)
        if name in ("test", "bench"):
            sp.add_argument("--strategy", choices=("auto", "plugin", "collision"))
        if name in ("test-cluster", "bench"):
            sp.add_argument("--centers", help="JSON file with a list of centers")
            sp.add_argument("--k", type=int, help="number of clusters (unknown centers)")
            sp.add_argument("--unknown-centers", action="store_true", dest="unknown")
        if name == "bench":
            sp.add_argument("--mode", choices=sorted(set(SUBCOMMAND_MODE.values())), default="test")
    g = sub.add_parser("gen", help="write a generated instance (with its exact EMD) as JSON")
    g.add_argument("--gen", dest="generator", required=True, choices=sorted(GENERATORS))
    g.add_argument("--param", action="append", type=_kv, default=[], metavar="KEY=VALUE")
    g.add_argument("--eps", type=float)
    g.add_argument("--dim", type=int)
    g.add_argument("--span", type=float)
    g.add_argument("--out")
    return parser


def config_from_args(args, mode: str) -> ExperimentConfig:
    base = read_json(args.config) if getattr(args, "config", None) else {}
    if not isinstance(base, dict):
        raise ParseError("config file must hold a JSON object")
    base = dict(base)
    base["mode"] = mode
    overrides = {
        "eps": getattr(args, "eps", None), "delta": getattr(args, "delta", None),
        "d": getattr(args, "dim", None), "span": getattr(args, "span", None),
        "trials": getattr(args, "trials", None), "seed": getattr(args, "seed", None),
        "c": getattr(args, "c", None), "generator": getattr(args, "generator", None),
        "inputs": getattr(args, "inputs", None), "workers": getattr(args, "workers", None),
        "strategy": getattr(args, "strategy", None), "k": getattr(args, "k", None),
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    if getattr(args, "param", None):
        base["params"] = {**base.get("params", {}), **dict(args.param)}
    if getattr(args, "centers", None):
        base["centers"] = read_json(args.centers)
    if getattr(args, "unknown", False):
        base["cluster"] = "unknown"
    if base.get("generator") and "inputs" in overrides and overrides["inputs"]:
        raise ParamError("give --gen or --in, not both")
    try:
        return ExperimentConfig.from_dict(base)
    except TypeError as exc:
        raise ParseError(f"bad config: {exc}") from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run(args) -> None:
    if args.command == "gen":
        cfg = config_from_args(args, "tree" if args.generator in ("hard-line", "random-tree") else "test")
        inst = load_instance(cfg)
        _emit(json.dumps(instance_json(inst, oracle_of(inst)), sort_keys=True, indent=2) + "\n",
              args.out)
        return
    if args.command == "bench":
        cfg = config_from_args(args, args.mode)
        rows = calibration_table(cfg)
        if args.format == "csv":
            _emit(rows_csv(rows, rows[0].keys()), args.out)
        else:
            _emit(json.dumps({"config": cfg.echo(), "rows": rows}, sort_keys=True, indent=2) + "\n",
                  args.out)
        return
    cfg = config_from_args(args, SUBCOMMAND_MODE[args.command])
    report = run_experiment(cfg)
    _emit(report_csv(report) if args.format == "csv" else report.dumps(), args.out)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _run(args)
    except (ParamError, ConfigError) as exc:
        print(f"emdtest: parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except OSError as exc:
        print(f"emdtest: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except EmdTestError as exc:
        print(f"emdtest: invalid input: {exc}", file=sys.stderr)
        return EXIT_PARSE
    return 0


__all__ = ["main", "build_parser", "config_from_args", "CSV_COLUMNS"]
