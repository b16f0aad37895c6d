"""Command-line interface: single tests on CSV data and Monte Carlo studies.

Exit codes: 0 success, 2 input error (files, CSV contents, shape
mismatches), 3 configuration error (invalid settings).
"""

import argparse
import csv
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .runner import (
    ConfigurationError,
    TestConfig,
    paired_sample_test,
    two_sample_test,
)
from .study import parse_study_config, rows_to_csv, rows_to_text, run_study

__all__ = ["InputError", "main", "read_sample_csv"]


class InputError(ValueError):
    """A problem with user-supplied data files."""


def read_sample_csv(path: str) -> np.ndarray:
    """Load a numeric CSV sample (rows = observations).

    A non-numeric first line is treated as a header. Ragged rows and
    non-numeric cells raise :class:`InputError` with the line number.
    Duplicate values within a column are allowed (they receive maximal
    ranks downstream) but reported on stderr.
    """
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise InputError(f"{path}: cannot read file: {exc}") from exc
    rows: list[list[float]] = []
    with handle:
        reader = csv.reader(handle)
        width = None
        for lineno, record in enumerate(reader, start=1):
            if not record or all(not cell.strip() for cell in record):
                continue
            try:
                parsed = [float(cell) for cell in record]
            except ValueError:
                if lineno == 1:
                    continue  # header line
                bad = next(
                    cell for cell in record if not _is_float(cell)
                )
                raise InputError(
                    f"{path}:{lineno}: non-numeric cell {bad.strip()!r}"
                ) from None
            if width is None:
                width = len(parsed)
            elif len(parsed) != width:
                raise InputError(
                    f"{path}:{lineno}: row has {len(parsed)} cells, expected {width}"
                )
            rows.append(parsed)
    if not rows:
        raise InputError(f"{path}: no numeric rows found")
    data = np.asarray(rows, dtype=float)
    ties = sum(
        int(data.shape[0] - np.unique(data[:, col]).size)
        for col in range(data.shape[1])
    )
    if ties:
        print(
            f"warning: {path}: {ties} tied values across columns; "
            f"maximal-rank convention applies",
            file=sys.stderr,
        )
    return data


def _is_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def _pair_flag(raw: str, flag: str) -> tuple[int, int] | None:
    if raw == "auto":
        return None
    parts = raw.split(",")
    if len(parts) != 2:
        raise ConfigurationError(f"{flag} expects 'auto' or two integers, got {raw!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ConfigurationError(f"{flag}: {exc}") from exc


def _add_test_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--methods",
        default="multiplier,subsample",
        help="comma-separated subset of multiplier,subsample",
    )
    parser.add_argument(
        "--mode",
        default="both",
        choices=("bernstein", "empirical", "both"),
        help="estimator mode",
    )
    parser.add_argument("--m", default="auto", help="smoothing orders: auto or M1,M2")
    parser.add_argument(
        "--b", default="auto", help="subsample sizes: auto or B1,B2"
    )
    parser.add_argument(
        "--sub-m", default="auto", help="subsample orders: auto or M1,M2"
    )
    parser.add_argument("--H", type=int, default=200, help="replicate count")
    parser.add_argument("--grid", type=int, default=20, help="grid points per axis")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--out", default=None, help="write the JSON report here")


def _test_config(args: argparse.Namespace) -> TestConfig:
    return TestConfig(
        mode=args.mode,
        methods=tuple(m.strip() for m in args.methods.split(",") if m.strip()),
        orders=_pair_flag(args.m, "--m"),
        subsample_sizes=_pair_flag(args.b, "--b"),
        subsample_orders=_pair_flag(args.sub_m, "--sub-m"),
        replicates=args.H,
        grid_points=args.grid,
        seed=args.seed,
    )


def _emit_report(report, out: str | None) -> None:
    sys.stdout.write(report.to_text())
    if out is not None:
        Path(out).write_text(report.to_json_text())
    print(f"wall time: {report.wall_time:.3f}s", file=sys.stderr)


def _cmd_test(args: argparse.Namespace) -> int:
    x = read_sample_csv(args.x)
    y = read_sample_csv(args.y)
    if x.shape[1] != y.shape[1]:
        raise InputError(
            f"dimension mismatch: {args.x} has {x.shape[1]} columns, "
            f"{args.y} has {y.shape[1]}"
        )
    report = two_sample_test(x, y, _test_config(args))
    _emit_report(report, args.out)
    return 0


def _cmd_paired(args: argparse.Namespace) -> int:
    z = read_sample_csv(args.paired)
    if z.shape[1] != 2 * args.dim:
        raise InputError(
            f"paired file {args.paired} has {z.shape[1]} columns, "
            f"expected {2 * args.dim} for --dim {args.dim}"
        )
    report = paired_sample_test(z, args.dim, _test_config(args))
    _emit_report(report, args.out)
    return 0


def _default_threads() -> int:
    env = os.environ.get("COPEQ_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigurationError(f"COPEQ_THREADS: {exc}") from exc
    return os.cpu_count() or 1


def _cmd_simulate(args: argparse.Namespace) -> int:
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise InputError(f"{args.config}: cannot read file: {exc}") from exc
    cfg = parse_study_config(text)
    if args.fast:
        cfg = replace(
            cfg,
            repetitions=min(cfg.repetitions, 100),
            test=replace(cfg.test, replicates=min(cfg.test.replicates, 100)),
        )
    out_dir = args.out or cfg.output
    if out_dir is None:
        raise ConfigurationError(
            "no output directory: set 'output' in the config or pass --out"
        )
    threads = args.threads if args.threads else _default_threads()

    progress = None
    if not args.quiet:
        def progress(done: int, total: int) -> None:
            if done == total or done % max(1, total // 20) == 0:
                print(f"\r{done}/{total} repetitions", end="", file=sys.stderr)
                if done == total:
                    print(file=sys.stderr)

    rows, manifest = run_study(cfg, threads=threads, progress=progress)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(rows_to_csv(rows))
    (out / "results.txt").write_text(rows_to_text(rows))
    (out / "run_manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {out / 'results.csv'}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="copeq",
        description="Two-sample copula equality tests and Monte Carlo studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="test two independent CSV samples")
    p_test.add_argument("--x", required=True, help="first sample CSV")
    p_test.add_argument("--y", required=True, help="second sample CSV")
    _add_test_flags(p_test)
    p_test.set_defaults(func=_cmd_test)

    p_paired = sub.add_parser("paired", help="test the two halves of paired rows")
    p_paired.add_argument("--paired", required=True, help="paired sample CSV")
    p_paired.add_argument(
        "--dim", type=int, required=True, help="columns per half"
    )
    _add_test_flags(p_paired)
    p_paired.set_defaults(func=_cmd_paired)

    p_sim = sub.add_parser("simulate", help="run a Monte Carlo study")
    p_sim.add_argument("config", help="study configuration file")
    p_sim.add_argument("--out", default=None, help="output directory override")
    p_sim.add_argument(
        "--threads",
        type=int,
        default=0,
        help="worker processes (default: COPEQ_THREADS or CPU count)",
    )
    p_sim.add_argument(
        "--fast", action="store_true", help="cap repetitions and replicates at 100"
    )
    p_sim.add_argument("--quiet", action="store_true", help="suppress progress output")
    p_sim.set_defaults(func=_cmd_simulate)

    p_version = sub.add_parser("version", help="print the version")
    p_version.set_defaults(func=lambda args: print(f"copeq {__version__}") or 0)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
