"""Command-line entry point: ``regpath run | compare | validate-config``.

Exit codes: 0 success, 2 invalid configuration or input files, 3 failure
while computing (partial artifacts are still written).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
import traceback
from datetime import datetime
from pathlib import Path

from .config import ConfigError, PathsSpec, dump_config, load_config, materialize
from .experiment import execute, prepare
from .export import SchemaError, compare_fronts, json_safe, metrics_report, read_front_csv, write_front_csv, write_trace_csv

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 2, 3

log = logging.getLogger("regpath")

FRONT_FILE = "front.csv"
TRACE_FILE = "trace.csv"
METRICS_FILE = "metrics.json"
CONFIG_FILE = "config.toml"


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regpath", description="Loss vs. l1 regularization paths.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write a run directory")
    run.add_argument("--config", required=True, type=Path, help="TOML experiment config")
    run.add_argument("--out", type=Path, help="parent directory for run directories (overrides paths.output_dir)")
    run.add_argument("--seed", type=int, help="override the config's seed")
    run.add_argument("--quiet", action="store_true", help="only log warnings and errors")

    cmp = sub.add_parser("compare", help="compare two front CSV files")
    cmp.add_argument("front_a", type=Path)
    cmp.add_argument("front_b", type=Path)
    cmp.add_argument("--out", type=Path, help="JSON report path (a directory gets compare.json); default stdout")
    cmp.add_argument("--quiet", action="store_true")

    val = sub.add_parser("validate-config", help="check a config and print it with defaults filled in")
    val.add_argument("--config", required=True, type=Path)
    val.add_argument("--seed", type=int)
    val.add_argument("--quiet", action="store_true", help="print nothing, only set the exit code")
    return parser


def _report_config_error(exc: ConfigError, path: Path) -> int:
    print(f"invalid config {path}:", file=sys.stderr)
    for loc, msg in exc.errors:
        print(f"  {loc}: {msg}", file=sys.stderr)
    return EXIT_VALIDATION


def _new_run_dir(parent: Path, method: str) -> Path:
    stamp = datetime.now().strftime("%Y%m%d-%H%M%S")
    base = parent / f"run-{stamp}-{method}"
    path, k = base, 1
    while path.exists():
        path = base.with_name(f"{base.name}-{k}")
        k += 1
    path.mkdir(parents=True)
    return path


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        if args.out is not None:
            cfg = cfg.model_copy(update={"paths": PathsSpec(data=cfg.paths.data, output_dir=str(args.out.resolve()))})
        if cfg.paths.data is not None:
            data = (args.config.parent / cfg.paths.data).resolve()
            if not data.exists():
                raise ConfigError([("paths.data", f"{data} does not exist")])
    except ConfigError as exc:
        return _report_config_error(exc, args.config)

    try:
        resolved, setup = prepare(cfg, args.config.parent, args.seed)
    except Exception as exc:
        log.error("could not build the problem: %s", exc)
        return EXIT_RUNTIME

    run_dir = _new_run_dir(Path(resolved.paths.output_dir), resolved.method.kind)
    (run_dir / CONFIG_FILE).write_text(dump_config(resolved))
    log.info("run directory %s", run_dir)

    started = time.perf_counter()
    outcome = execute(resolved, setup)
    elapsed = time.perf_counter() - started

    write_front_csv(outcome.archive, run_dir / FRONT_FILE)
    write_trace_csv(outcome.trace, run_dir / TRACE_FILE)
    report = {"status": "ok" if outcome.error is None else "failed", "runtime_seconds": elapsed}
    try:
        report.update(metrics_report(outcome.archive, outcome.trace, setup.problem))
    except Exception as exc:
        log.error("metrics failed: %s", exc)
        report["status"] = "failed"
        outcome.error = outcome.error or exc
    if outcome.error is not None:
        report["error"] = {
            "type": type(outcome.error).__name__,
            "message": str(outcome.error),
            "traceback": "".join(traceback.format_exception(outcome.error)),
        }
    (run_dir / METRICS_FILE).write_text(json.dumps(json_safe(report), indent=2) + "\n")

    print(run_dir)
    if outcome.error is not None:
        return EXIT_RUNTIME
    log.info("%d points in %.2fs", len(outcome.archive), elapsed)
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        a, b = read_front_csv(args.front_a), read_front_csv(args.front_b)
        report = compare_fronts(a, b)
    except (OSError, SchemaError, ValueError) as exc:
        print(f"cannot compare: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    report = {"front_a": str(args.front_a), "front_b": str(args.front_b), **report}
    text = json.dumps(json_safe(report), indent=2) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        out = args.out / "compare.json" if args.out.is_dir() else args.out
        out.write_text(text)
        if not args.quiet:
            print(out)
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        return _report_config_error(exc, args.config)
    if cfg.method.kind == "continuation" and cfg.method.eta == "auto":
        # only LASSO allows "auto"; building the instance to get 1/L is cheap
        cfg = prepare(cfg, args.config.parent, args.seed)[0]
    else:
        cfg = materialize(cfg, args.config.parent, args.seed)
    if not args.quiet:
        sys.stdout.write(dump_config(cfg))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    log.setLevel(logging.WARNING if args.quiet else logging.INFO)
    handler = {"run": cmd_run, "compare": cmd_compare, "validate-config": cmd_validate}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
