"""Command-line entry point: ``simulate``, ``sweep`` and ``check``."""
from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from . import acceptance
from .errors import ParseError
from .spectrum import KINDS
from .sweep import DEFAULT_GRID, FORMATS, PRESETS, emit, parse_config, preset, run


def _add_common(p):
    p.add_argument("--spectrum", choices=KINDS, help="override the bath spectral density")
    p.add_argument("--workers", type=int, default=1, help="worker processes (output is identical for any count)")
    p.add_argument("--out", help="output path; '-' or omitted writes to stdout")
    p.add_argument("--format", choices=FORMATS, help="output format (default: from --out extension, else csv)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdiode", description="Two-qubit quantum thermal diode simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a configuration file")
    sim.add_argument("--config", required=True, help="key = value run description")
    _add_common(sim)

    sw = sub.add_parser("sweep", help="run a figure preset")
    sw.add_argument("--preset", required=True, choices=PRESETS)
    sw.add_argument("--grid", type=int, default=DEFAULT_GRID, help="points per axis (default %(default)s)")
    _add_common(sw)

    chk = sub.add_parser("check", help="run the acceptance suite")
    chk.add_argument("--only", type=lambda s: [int(x) for x in s.split(",") if x],
                     help="comma-separated check numbers, e.g. 1,2,13")
    return parser


def _format(args, fallback):
    if args.format:
        return args.format
    if args.out and args.out != "-":
        return "json" if args.out.lower().endswith(".json") else "csv"
    return fallback


def _execute(spec, args, default_out=None):
    if args.spectrum:
        spec = spec.with_spectrum(args.spectrum)
    if args.workers < 1:
        raise SystemExit("--workers must be >= 1")
    rows = run(spec, workers=args.workers)
    dest = args.out or default_out
    try:
        emit(rows, _format(args, spec.format), dest, spec.axes)
    except OSError as exc:
        print(f"error: cannot write {dest}: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "simulate":
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot read {args.config}: {exc}", file=sys.stderr)
            return 2
        try:
            spec = parse_config(text)
        except ParseError as exc:
            print(f"error: {args.config}: {exc}", file=sys.stderr)
            return 2
        return _execute(spec, args, spec.output)

    if args.command == "sweep":
        if args.grid < 1:
            print("error: --grid must be >= 1", file=sys.stderr)
            return 2
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            spec = preset(args.preset, args.grid)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        return _execute(spec, args)

    results = acceptance.run_all(args.only, echo=print)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} passed" + (f"; failed: {failed}" if failed else ""))
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
