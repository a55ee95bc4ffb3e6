"""Command-line entry points: validate, simulate, classify, report, serve, synthetic."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import AebresimError, ConfigError, DataError, RecordingParseError
from .pipeline import (
    classify_stage,
    load_config,
    report_stage,
    simulate_stage,
    validate_dataset,
)
from .store import EventStore
from .synthetic import write_synthetic_dataset

EXIT_CONFIG = 2
EXIT_DATA = 3


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, help="INI-style configuration file")
    p.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="SECTION.KEY=VALUE", help="override one config key")
    p.add_argument("--store", type=Path, default=None,
                   help="store directory (overrides pipeline.output_dir)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aebresim",
                                     description="Open-loop AEB resimulation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="report data issues per recording")
    _add_common(p)
    p.add_argument("--synthetic", action="store_true", help="use the builtin synthetic suite")

    p = sub.add_parser("simulate", help="replay the AEBS and persist brake events")
    _add_common(p)
    p.add_argument("--synthetic", action="store_true", help="use the builtin synthetic suite")
    p.add_argument("--seed", type=int, default=None, help="synthetic suite seed")

    p = sub.add_parser("classify", help="classify stored events against the pseudo ground truth")
    _add_common(p)

    p = sub.add_parser("report", help="write the agreement report for stored annotations")
    _add_common(p)

    p = sub.add_parser("serve", help="serve the annotation API and UI")
    _add_common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static", type=Path, default=None, help="UI bundle directory")

    p = sub.add_parser("synthetic", help="write the synthetic suite as canonical CSV files")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", type=Path, required=True)
    return parser


def _config_from_args(args) -> tuple:
    cfg = load_config(args.config, args.overrides)
    if getattr(args, "synthetic", False):
        cfg.synthetic = True
    if getattr(args, "seed", None) is not None:
        cfg.synthetic_seed = args.seed
    if args.store is not None:
        cfg.output_dir = args.store
    return cfg, EventStore(cfg.output_dir)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synthetic":
            written = write_synthetic_dataset(args.out, args.seed)
            print(f"wrote {len(written)} files to {args.out}")
            return 0

        cfg, store = _config_from_args(args)
        if args.command == "validate":
            findings = validate_dataset(cfg)
            clean = True
            for rid, issues in findings.items():
                status = "ok" if not issues else f"{len(issues)} issue(s)"
                print(f"{rid}: {status}")
                for line in issues:
                    clean = False
                    print(f"  {line}")
            print("validation complete" + ("" if clean else " (issues above are report-only)"))
            return 0
        if args.command == "simulate":
            events = simulate_stage(cfg, store)
            print(f"{len(events)} brake event(s) -> {store.path(store.EVENTS)}")
            return 0
        if args.command == "classify":
            items = classify_stage(cfg, store)
            counts: dict[str, int] = {}
            for cls, _ in items.values():
                counts[cls.verdict.value] = counts.get(cls.verdict.value, 0) + 1
            pretty = ", ".join(f"{k}: {v}" for k, v in sorted(counts.items())) or "none"
            print(f"classified {len(items)} event(s) ({pretty}) -> "
                  f"{store.path(store.CLASSIFICATIONS)}")
            return 0
        if args.command == "report":
            report_stage(cfg, store)
            print(f"report -> {store.root / 'report.json'}")
            return 0
        if args.command == "serve":
            from .service import serve_annotation_api

            serve_annotation_api(store, host=args.host, port=args.port,
                                 static_dir=args.static)
            return 0
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, RecordingParseError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except AebresimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
