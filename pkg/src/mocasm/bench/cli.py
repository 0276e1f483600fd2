"""Command line entry point: ``moca-sm {cluster,bench,gen}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from ..data import ParameterError
from ..metrics import evaluate
from ..pipeline import AUTO, LINKAGES
from .datasets import BUILTINS, PRESETS, generate_gaussian_blobs, load_named, parse_blob_spec
from .io import DataError, format_assignments, parse_csv, write_csv
from .report import ALGORITHMS, BenchConfig, comparison_table, report_document, run_benchmark, run_one

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("mocasm")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _L(value: str):
    if value == AUTO:
        return AUTO
    try:
        L = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or an integer, got {value!r}") from None
    if L < 1:
        raise argparse.ArgumentTypeError("L must be >= 1")
    return L


def _positive_int(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {n}")
    return n


def _label_col(value: str):
    return int(value) if value.lstrip("-").isdigit() else value


def _add_data_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="CSV file of numeric features")
    src.add_argument(
        "--dataset",
        choices=sorted(PRESETS) + list(BUILTINS),
        help="generated preset or bundled dataset instead of --input",
    )
    p.add_argument("--label-col", type=_label_col, help="label column (index or header name)")
    p.add_argument("--header", action="store_true", help="first row of --input is a header")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--seed", type=int, default=0, help="seed for generators and k-means")


def _add_algo_args(p):
    p.add_argument("--final-clusters", type=_positive_int, required=True, help="number of final clusters f")
    p.add_argument("--L", type=_L, default=AUTO, help="neighbour count: 'auto' or an integer")
    p.add_argument("--normalize", action="store_true", help="min-max scale every feature")
    p.add_argument("--linkage", choices=LINKAGES, default="complete")
    p.add_argument(
        "--no-refresh",
        dest="refresh",
        action="store_false",
        help="rank head candidates by dissimilarity over the full dataset only",
    )


def build_parser():
    parser = _Parser(prog="moca-sm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("cluster", help="cluster one dataset with one algorithm")
    _add_data_args(p)
    _add_algo_args(p)
    p.add_argument("--algorithm", choices=sorted(ALGORITHMS), default="moca")
    p.add_argument("--output", help="assignments CSV (default: stdout)")
    p.add_argument("--report", help="also write a JSON run report here")

    p = sub.add_parser("bench", help="compare algorithms on one dataset")
    _add_data_args(p)
    _add_algo_args(p)
    p.add_argument("--algorithms", default="moca,kmeans", help="comma-separated list")
    p.add_argument(
        "--external",
        action="append",
        default=[],
        metavar="NAME=PATH",
        help="score an externally produced assignments CSV (repeatable)",
    )
    p.add_argument("--output", help="JSON report path (table goes to stdout)")
    p.add_argument("--timings", action="store_true", help="include wall-clock durations in the report")

    p = sub.add_parser("gen", help="write a synthetic Gaussian-blob dataset as CSV")
    spec = p.add_mutually_exclusive_group(required=True)
    spec.add_argument("--preset", choices=sorted(PRESETS))
    spec.add_argument("--blobs", help="'count:x,y,...:spread;...'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    return parser


def _load(args):
    if args.input:
        return parse_csv(args.input, label_column=args.label_col, header=args.header, delimiter=args.delimiter)
    return load_named(args.dataset, seed=args.seed)


def _dataset_info(args, data) -> dict:
    info = {"source": args.input or args.dataset, "m": data.m, "d": data.d}
    if args.dataset in PRESETS:
        info["seed"] = args.seed
    info["labelled"] = data.labels is not None
    return info


def _config(args) -> BenchConfig:
    return BenchConfig(
        final_clusters=args.final_clusters,
        L=args.L,
        normalize=args.normalize,
        seed=args.seed,
        linkage=args.linkage,
        refresh_dissimilarity=args.refresh,
    )


def cmd_cluster(args) -> int:
    data = _load(args)
    report = run_one(args.algorithm, data, _config(args))
    if report.failed:
        print(f"moca-sm: {report.algorithm} failed: {report.error}", file=sys.stderr)
        return EXIT_INTERNAL
    text = format_assignments(report.assignments)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if report.metrics is not None:
        for key, value in report.metrics.as_dict().items():
            print(f"{key:>20s}  {value:.4f}", file=sys.stderr)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(report_document([report], _dataset_info(args, data)))
    return EXIT_OK


def _parse_external(items) -> dict:
    out = {}
    for item in items:
        name, sep, path = item.partition("=")
        if not sep or not name or not path:
            raise UsageError(f"--external expects NAME=PATH, got {item!r}")
        out[name] = path
    return out


def cmd_bench(args) -> int:
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    unknown = [a for a in algorithms if a not in ALGORITHMS]
    if unknown:
        raise UsageError(f"unknown algorithm(s) {unknown}; choose from {sorted(ALGORITHMS)}")
    external = _parse_external(args.external)
    data = _load(args)
    reports = run_benchmark(data, algorithms, _config(args), external)
    sys.stdout.write(comparison_table(reports))
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(report_document(reports, _dataset_info(args, data), timings=args.timings))
    return EXIT_INTERNAL if any(r.failed for r in reports) else EXIT_OK


def cmd_gen(args) -> int:
    blobs = PRESETS[args.preset] if args.preset else parse_blob_spec(args.blobs)
    data = generate_gaussian_blobs(blobs, seed=args.seed)
    write_csv(args.output, data)
    print(f"wrote {data.m} objects x {data.d} attributes to {args.output}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {"cluster": cmd_cluster, "bench": cmd_bench, "gen": cmd_gen}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ParameterError) as exc:
        print(f"moca-sm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ValueError, OSError) as exc:
        print(f"moca-sm: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - last-resort guard
        log.exception("internal failure")
        print(f"moca-sm: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
