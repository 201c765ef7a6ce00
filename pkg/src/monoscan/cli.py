"""Command line front end.

Four subcommands:

* ``calibrate`` runs the Monte Carlo null calibration and writes a
  quantile-table JSON file;
* ``test`` reads observations from a CSV file, runs the monotonicity test
  against a stored table or the distribution-free threshold, and writes a
  report with the violating intervals;
* ``power`` runs a batch of power-study scenarios against one table and
  writes JSON plus a CSV summary;
* ``bound`` prints the distribution-free thresholds.

Every command is a pure function of its flags and input files: rerunning
with identical inputs produces byte-identical outputs.  The decision of a
test is data inside the report, not the process status; nonzero exit codes
are reserved for usage errors (2) and operational failures (1).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from .calibration import (
    MODELS,
    QuantileTable,
    analytic_threshold,
    calibrate,
)
from .errors import ConfigError, DataError, MonoscanError
from .experiments import AlternativeSpec, guarantee_threshold, power_study
from .geometry import GridFunction
from .statistics import (
    pair_and_estimate,
    scan,
    scan_regression,
    violating_intervals,
)

__all__ = ["build_parser", "main"]

_POWER_CSV_FIELDS = (
    "kind",
    "a",
    "scale",
    "sigma",
    "model",
    "n",
    "r",
    "alpha",
    "threshold",
    "replications",
    "rejections",
    "power",
    "ci_low",
    "ci_high",
)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _nonnegative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _level(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"must be in (0, 1), got {value}")
    return value


def _levels_csv(text: str) -> tuple[float, ...]:
    tokens = [tok.strip() for tok in text.split(",") if tok.strip()]
    if not tokens:
        raise argparse.ArgumentTypeError("empty level list")
    return tuple(_level(tok) for tok in tokens)


def _read_csv_values(path: Path) -> np.ndarray:
    """One value per line, optional leading header line ``value``."""
    values: list[float] = []
    header_allowed = True
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text:
                continue
            if header_allowed and text.lower() == "value":
                header_allowed = False
                continue
            header_allowed = False
            try:
                values.append(float(text))
            except ValueError:
                raise DataError(
                    f"{path}:{line_no}: not a number: {text!r}"
                ) from None
    if not values:
        raise DataError(f"{path}: no data values")
    return np.array(values)


def _sha256_digest(path: Path) -> str:
    hasher = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            hasher.update(chunk)
    return "sha256:" + hasher.hexdigest()


def _load_table(path: Path) -> QuantileTable:
    with open(path, "r", encoding="utf-8") as fh:
        return QuantileTable.from_json(fh.read())


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def cmd_calibrate(args: argparse.Namespace) -> int:
    table = calibrate(args.model, args.n, args.r, args.reps, args.alphas, args.seed)
    args.out.write_text(table.to_json() + "\n", encoding="utf-8")
    for alpha, quantile in table.entries:
        print(f"alpha={alpha} quantile={quantile}")
    print(f"wrote {args.out}")
    return 0


def cmd_test(args: argparse.Namespace) -> int:
    values = _read_csv_values(args.data)
    digest = _sha256_digest(args.data)

    if args.model == "white":
        if args.sigma is None:
            raise ConfigError("--sigma is required for the white model")
        if not args.sigma > 0.0:
            raise ConfigError("--sigma must be > 0")
        if args.n is None:
            raise ConfigError("--n is required for the white model")
        if values[0] != 0.0:
            raise DataError("a white-noise path must start at 0")
        fine = values.size - 1
        if fine < args.n or fine % args.n != 0:
            raise DataError(
                f"{values.size} knot values do not form a grid with a "
                f"multiple of n={args.n} steps"
            )
        n_scan = args.n
        n_report = args.n
        r = fine // args.n
        g = GridFunction(0.0, 1.0 / fine, values)
        noise_sq = args.sigma**2
    else:
        if values.size % 2 != 0:
            raise DataError("regression data must have even length")
        if values.size < 4:
            raise DataError("regression data must have at least 4 values")
        sample = pair_and_estimate(values)
        n_scan = sample.nbar
        n_report = values.size
        r = 1

    if args.table is not None:
        table = _load_table(args.table)
        if table.model != args.model:
            raise ConfigError(
                f"table is for model {table.model!r}, data is {args.model!r}"
            )
        if table.n != n_report or table.r != r:
            raise ConfigError(
                f"table is for n={table.n}, r={table.r}; "
                f"data implies n={n_report}, r={r}"
            )
        threshold = table.quantile(args.alpha)
        threshold_source = "table"
    else:
        if not 0.0 < args.alpha < 1.0:
            raise ConfigError(f"level {args.alpha} outside (0, 1)")
        threshold = analytic_threshold(args.alpha, n_scan)
        threshold_source = "analytic"

    if args.model == "white":
        result = scan(g, n_scan, noise_sq, retain_floor=threshold)
    else:
        result = scan_regression(sample, retain_floor=threshold)

    reject = result.max_stat > threshold
    violating = [
        [i / n_scan, j / n_scan, stat]
        for i, j, stat in violating_intervals(result, threshold)
    ]
    report = {
        "model": args.model,
        "n": n_report,
        "alpha": args.alpha,
        "threshold": threshold,
        "threshold_source": threshold_source,
        "statistic": result.max_stat,
        "reject": reject,
        "violating": violating,
        "input_digest": digest,
    }
    args.out.write_text(_dump_json(report), encoding="utf-8")
    print(
        f"statistic={result.max_stat} threshold={threshold} "
        f"reject={str(reject).lower()}"
    )
    return 0


def _parse_scenario_row(row, index: int):
    if not isinstance(row, dict):
        raise DataError(f"scenario row {index}: expected a JSON object")
    try:
        kind = row["kind"]
        model = row["model"]
        n = int(row["n"])
        alpha = float(row["alpha"])
        r = int(row.get("r", 1))
        a = float(row.get("a", 0.0))
        scale = float(row.get("scale", 1.0))
        if "sigma" in row and "sigma_sq" in row:
            raise DataError(
                f"scenario row {index}: give sigma or sigma_sq, not both"
            )
        if "sigma" in row:
            sigma = float(row["sigma"])
        elif "sigma_sq" in row:
            sigma_sq = float(row["sigma_sq"])
            if not sigma_sq > 0.0:
                raise DataError(f"scenario row {index}: sigma_sq must be > 0")
            sigma = math.sqrt(sigma_sq)
        else:
            raise DataError(f"scenario row {index}: missing sigma or sigma_sq")
    except KeyError as exc:
        raise DataError(f"scenario row {index}: missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        raise DataError(f"scenario row {index}: {exc}") from None
    spec = AlternativeSpec(kind=kind, sigma=sigma, a=a, scale=scale)
    return spec, model, n, r, alpha


def cmd_power(args: argparse.Namespace) -> int:
    table = _load_table(args.table)
    try:
        rows = json.loads(args.scenario.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{args.scenario}: {exc}") from exc
    if not isinstance(rows, list):
        raise DataError(f"{args.scenario}: expected a JSON list of scenarios")

    reports = []
    for index, row in enumerate(rows):
        spec, model, n, r, alpha = _parse_scenario_row(row, index)
        if model == "regression":
            r = 1
        if table.model != model or table.n != n or table.r != r:
            raise ConfigError(
                f"scenario row {index} is ({model}, n={n}, r={r}) but the "
                f"table is ({table.model}, n={table.n}, r={table.r})"
            )
        reports.append(
            power_study(spec, model, n, r, alpha, table, args.reps, args.seed + index)
        )

    args.out.write_text(
        _dump_json([report.to_json_dict() for report in reports]), encoding="utf-8"
    )
    csv_path = args.out.with_suffix(".csv")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_POWER_CSV_FIELDS)
        for report in reports:
            writer.writerow(
                [
                    report.spec.kind,
                    report.spec.a,
                    report.spec.scale,
                    report.spec.sigma,
                    report.model,
                    report.n,
                    table.r,
                    report.alpha,
                    report.threshold_used,
                    report.replications,
                    report.rejections,
                    report.power,
                    report.ci95[0],
                    report.ci95[1],
                ]
            )
    print(f"wrote {args.out} and {csv_path} ({len(reports)} scenario(s))")
    return 0


def cmd_bound(args: argparse.Namespace) -> int:
    print(f"analytic_threshold {analytic_threshold(args.alpha, args.n)}")
    if args.beta is not None:
        print(f"guarantee_threshold {guarantee_threshold(args.alpha, args.beta, args.n)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="monoscan",
        description="Multiscale test of monotonicity for 1-D signals.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="simulate null quantile tables")
    p.add_argument("--model", required=True, choices=MODELS)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--r", type=_positive_int, default=1)
    p.add_argument("--reps", type=_positive_int, required=True)
    p.add_argument("--alphas", type=_levels_csv, required=True, metavar="LIST")
    p.add_argument("--seed", type=_nonnegative_int, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(handler=cmd_calibrate)

    p = sub.add_parser("test", help="test a data file for monotonicity")
    p.add_argument("--model", required=True, choices=MODELS)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--alpha", type=float, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--table", type=Path)
    group.add_argument("--analytic", action="store_true")
    p.add_argument("--sigma", type=float)
    p.add_argument("--n", type=_positive_int)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(handler=cmd_test)

    p = sub.add_parser("power", help="run a batch of power scenarios")
    p.add_argument("--scenario", type=Path, required=True)
    p.add_argument("--table", type=Path, required=True)
    p.add_argument("--reps", type=_positive_int, required=True)
    p.add_argument("--seed", type=_nonnegative_int, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(handler=cmd_power)

    p = sub.add_parser("bound", help="print distribution-free thresholds")
    p.add_argument("--alpha", type=_level, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--beta", type=_level)
    p.set_defaults(handler=cmd_bound)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except MonoscanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
