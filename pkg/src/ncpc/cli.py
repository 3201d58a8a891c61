"""Command-line entry point: ``ncpc describe|estimate|recessions|unitroot|replicate|convert``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .exceptions import NCPCError
from .ingest import convert_wide, default_data_path
from .pipeline import (
    RunConfig,
    cmd_describe,
    cmd_estimate,
    cmd_recessions,
    cmd_replicate,
    cmd_unitroot,
    golden_from_analyses,
    load_validated,
    render,
    run_panel,
    write_golden,
)
from .series import Quarter
from .trend import GapMode

EXIT_OK, EXIT_DIFF, EXIT_INPUT = 0, 1, 2

log = logging.getLogger("ncpc")


def _window(text: str) -> tuple[Quarter, Quarter]:
    try:
        lo, hi = text.split(":")
        window = Quarter.parse(lo), Quarter.parse(hi)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"window must look like 1980Q1:2016Q1 ({exc})") from None
    if window[1] < window[0]:
        raise argparse.ArgumentTypeError("window start is after its end")
    return window


def _countries(text: str) -> tuple[str, ...]:
    return tuple(c.strip().upper() for c in text.split(",") if c.strip())


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", type=Path, default=None, help="panel CSV (default: $NCPC_DATA)")
    p.add_argument("--spec", choices=("backward", "forward", "both"), default="both")
    p.add_argument("--country", type=_countries, default=None, metavar="CODE[,CODE...]")
    p.add_argument("--gap-mode", choices=[m.value for m in GapMode], default="levels")
    p.add_argument("--shift-const", type=float, default=1.0, metavar="F")
    p.add_argument("--lambda", dest="lamb", type=float, default=1600.0, metavar="F")
    p.add_argument("--hac-bandwidth", type=int, default=None, metavar="N")
    p.add_argument("--window", type=_window, default="1980Q1:2016Q1")
    p.add_argument("--format", dest="fmt", choices=("md", "csv", "json"), default="md")
    p.add_argument("--out", type=Path, default=None, metavar="PATH")
    p.add_argument("--jobs", type=int, default=4, metavar="N", help="worker threads")
    p.add_argument("--pp-bandwidth", choices=("fixed", "auto"), default="fixed",
                   help="Phillips-Perron bandwidth rule")
    p.add_argument("--max-lag", type=int, default=13, help="largest ADF lag considered")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ncpc", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("describe", "mean and standard deviation of every model variable"),
        ("estimate", "tranquil/recession Phillips-curve regressions"),
        ("recessions", "recession-quarter counts per window"),
        ("unitroot", "ADF and Phillips-Perron tests"),
        ("replicate", "run everything and diff against golden tables"),
    ]:
        p = sub.add_parser(name, help=help_)
        _add_run_options(p)
        if name == "replicate":
            p.add_argument("--golden", type=Path, default=None,
                           help="directory of golden CSVs (default: the packaged published tables)")
            p.add_argument("--write-golden", type=Path, default=None, metavar="DIR",
                           help="write this run's tables as golden CSVs instead of diffing")
    conv = sub.add_parser("convert", help="merge per-variable wide CSVs into the panel schema")
    for var in ("cpi", "expected-cpi", "unemployment", "gdp"):
        conv.add_argument(f"--{var}", type=Path, required=True)
    conv.add_argument("--out", type=Path, required=True)
    return parser


def _config(args) -> RunConfig:
    data = args.data if args.data is not None else default_data_path()
    return RunConfig(
        data=data,
        spec=args.spec,
        countries=args.country,
        gap_mode=GapMode(args.gap_mode),
        shift_const=args.shift_const,
        lamb=args.lamb,
        hac_bandwidth=args.hac_bandwidth,
        window=args.window if isinstance(args.window, tuple) else _window(args.window),
        fmt=args.fmt,
        out=args.out,
        jobs=args.jobs,
        pp_bandwidth=args.pp_bandwidth,
        max_lag=args.max_lag,
        golden=getattr(args, "golden", None),
    )


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


COMMANDS = {
    "describe": cmd_describe,
    "estimate": cmd_estimate,
    "recessions": cmd_recessions,
    "unitroot": cmd_unitroot,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "convert":
            sources = {"cpi": args.cpi, "expected_cpi": args.expected_cpi,
                       "unemployment": args.unemployment, "gdp": args.gdp}
            panel = convert_wide(sources, args.out)
            print(f"wrote {len(panel)} countries to {args.out}")
            return EXIT_OK
        cfg = _config(args)
        panel = load_validated(cfg)
        if args.command == "replicate":
            if args.write_golden is not None:
                write_golden(golden_from_analyses(run_panel(cfg, panel), cfg.specs), args.write_golden)
                print(f"golden tables written to {args.write_golden}")
                return EXIT_OK
            tables, ok = cmd_replicate(cfg, panel)
            _emit(render(tables, cfg.fmt, args.command, cfg), cfg.out)
            n_fail = sum(r["status"] == "FAIL" for r in tables[0].rows)
            print(f"replicate: {len(tables[0].rows) - n_fail} passed, {n_fail} failed", file=sys.stderr)
            return EXIT_OK if ok else EXIT_DIFF
        tables = COMMANDS[args.command](cfg, panel)
        _emit(render(tables, cfg.fmt, args.command, cfg), cfg.out)
        return EXIT_OK
    except (OSError, NCPCError, ValueError) as exc:
        print(f"ncpc: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
