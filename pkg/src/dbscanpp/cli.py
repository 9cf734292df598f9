"""Command-line entry point: ``dbscanpp {cluster,segment,bench,eval}``.

Exit codes: 0 success, 1 I/O or runtime failure, 2 invalid flags.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import bench
from .cluster import dbscan, dbscan_pp
from .core import AlgoParams, read_labels, write_labels
from .data import (
    GENERATORS,
    LabeledDataset,
    generate,
    image_to_dataset,
    labels_to_image,
    load_csv,
    read_ppm,
    standardize,
    write_metadata,
)
from .metrics import DensitySpec, EvalReport, adjusted_mutual_info, adjusted_rand_index, noise_report
from .params import m_schedule, minpts_default


class CliError(Exception):
    """Runtime failure reported with exit code 1."""


# --- argument types ---------------------------------------------------------


def positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return v


def ratio(text: str) -> float:
    v = positive_float(text)
    if v > 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1], got {text}")
    return v


def int_list(text: str, minimum: int = 1) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or any(v < minimum for v in vals):
        raise argparse.ArgumentTypeError(f"expected integers >= {minimum}, got {text!r}")
    return vals


def seed_list(text: str) -> list[int]:
    return int_list(text, minimum=0)


def ratio_list(text: str) -> list[float]:
    return [ratio(v) for v in text.split(",") if v.strip()]


def eps_grid(text: str) -> list[float]:
    try:
        return bench.parse_eps_grid(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# --- parser -----------------------------------------------------------------


def _add_algo_flags(p: argparse.ArgumentParser, eps_required: bool = True) -> None:
    p.add_argument("--algo", choices=("dbscan", "dbscanpp"), default="dbscanpp", help="algorithm (default: %(default)s)")
    p.add_argument("--strategy", choices=("uniform", "kcenter"), default="uniform",
                   help="DBSCAN++ sampling strategy (default: %(default)s)")
    p.add_argument("--eps", type=positive_float, required=eps_required, help="neighbourhood radius epsilon")
    p.add_argument("--eps-connect", type=positive_float, default=None,
                   help="connection radius, >= --eps (default: same as --eps)")
    p.add_argument("--min-pts", type=positive_int, default=minpts_default(), help="density threshold (default: %(default)s)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--m", type=positive_int, help="DBSCAN++ sample size")
    g.add_argument("--m-ratio", type=ratio, help="DBSCAN++ sample size as a fraction of n")
    g.add_argument("--m-p", type=ratio, help="p in m = p * n^(D/(D+4))")
    p.add_argument("--assignment", choices=("graph", "nearest-core"), default="graph",
                   help="how non-core points join clusters (default: %(default)s)")
    p.add_argument("--seed", type=int, default=0, help="seed for all randomness (default: %(default)s)")


def _add_csv_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--header", action="store_true", help="input CSV has a header row")
    p.add_argument("--label-column", default=None, help="ground-truth column (name or 0-based index)")
    p.add_argument("--standardize", action="store_true", help="zero-mean unit-variance features")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dbscanpp", description="DBSCAN and DBSCAN++ density clustering")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="cluster a CSV dataset",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("input", help="input CSV")
    _add_algo_flags(p)
    _add_csv_flags(p)
    p.set_defaults(subparser=p)
    p.add_argument("-o", "--out", default="labels.txt", help="label file (one id per line, -1 = noise)")
    p.add_argument("--report", default=None, help="EvalReport JSON path")
    p.add_argument("--meta", default=None, help="dataset metadata JSON path")
    p.add_argument("--noise-report", action="store_true",
                   help="for dbscanpp, also run DBSCAN and compare noise sets")
    p.add_argument("--no-timings", action="store_true", help="omit timings from written reports")

    p = sub.add_parser("segment", help="segment a binary PPM image by clustering (x, y, R, G, B)",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("input", help="input P6 PPM")
    _add_algo_flags(p)
    p.set_defaults(subparser=p)
    p.add_argument("-o", "--out", default="segmented.ppm", help="output PPM")
    p.add_argument("--labels", default=None, help="also write the pixel label file")

    p = sub.add_parser("eval", help="compare two label files")
    p.add_argument("labels_a")
    p.add_argument("labels_b")
    p.add_argument("--exclude-noise", action="store_true", help="drop points that are noise on either side")
    p.add_argument("--ami-average", choices=("max", "arithmetic"), default="max")

    p = sub.add_parser("bench", help="run an experiment sweep")
    kinds = p.add_subparsers(dest="kind", required=True)
    for kind in ("scaling", "eps-sweep", "tradeoff", "levelset"):
        k = kinds.add_parser(kind, formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        k.add_argument("--out", default=None, help="output prefix for .csv, .jsonl and .plot.csv")
        k.add_argument("--min-pts", type=positive_int, default=minpts_default())
        k.add_argument("--seed", type=int, default=0)
        k.add_argument("--no-timings", action="store_true", help="blank the timing columns")
        if kind == "levelset":
            continue
        k.add_argument("--gen", choices=sorted(GENERATORS), default=None, help="synthetic generator")
        if kind != "scaling":
            k.add_argument("input", nargs="?", default=None, help="labelled input CSV")
            k.add_argument("--n", type=positive_int, default=5000, help="generator size")
            k.add_argument("--workers", type=positive_int, default=1)
            _add_csv_flags(k)
    sc = kinds.choices["scaling"]
    sc.add_argument("--sizes", type=int_list, required=True)
    sc.add_argument("--eps", type=positive_float, default=0.5)
    g = sc.add_mutually_exclusive_group()
    g.add_argument("--m", type=positive_int, default=500)
    g.add_argument("--m-ratio", type=ratio)
    sc.add_argument("--algos", default=",".join(bench.ALGORITHMS))
    sc.add_argument("--repeats", type=positive_int, default=1)
    sc.add_argument("--timeout", type=positive_float, default=bench.TIMEOUT_S, help="seconds per run")
    es = kinds.choices["eps-sweep"]
    es.add_argument("--eps", type=eps_grid, required=True, help="start:stop:count or comma list")
    es.add_argument("--m-ratio", type=ratio, default=0.1)
    es.add_argument("--algos", default=",".join(bench.ALGORITHMS))
    tr = kinds.choices["tradeoff"]
    tr.add_argument("--ratios", type=ratio_list, required=True)
    tr.add_argument("--eps", type=positive_float, required=True)
    tr.add_argument("--repeats", type=positive_int, default=1)
    ls = kinds.choices["levelset"]
    ls.add_argument("--sizes", type=int_list, default=[1000, 4000, 16000])
    ls.add_argument("--lam", type=positive_float, default=0.04, help="density level (default: half the peak)")
    ls.add_argument("--beta", type=positive_float, default=1.0)
    ls.add_argument("--seeds", type=seed_list, default=None, help="seed list (default: 5 seeds from --seed)")
    ls.add_argument("--strategy", choices=("uniform", "kcenter"), default="kcenter")
    ls.add_argument("--m", default="minimax", help="'minimax', 'n', or an integer")
    ls.add_argument("--resolution", type=positive_float, default=0.05)
    return parser


# --- helpers ----------------------------------------------------------------


def _resolve_m(args, n: int, D: int) -> int:
    if args.m is not None:
        if args.m > n:
            raise CliError(f"--m {args.m} exceeds the dataset size {n}")
        return args.m
    if args.m_ratio is not None:
        return bench.m_for_ratio(n, args.m_ratio)
    return m_schedule(n, D, args.m_p)


def _validate_algo(parser, args) -> None:
    if args.algo == "dbscanpp" and args.m is None and args.m_ratio is None and args.m_p is None:
        parser.error("dbscanpp needs exactly one of --m, --m-ratio, --m-p")
    if args.algo == "dbscan" and (args.m is not None or args.m_ratio is not None or args.m_p is not None):
        parser.error("--m/--m-ratio/--m-p only apply to --algo dbscanpp")
    if args.eps_connect is not None and args.eps_connect < args.eps:
        parser.error(f"--eps-connect ({args.eps_connect}) must be >= --eps ({args.eps})")


def _run(args, data):
    bench.warm_up(["dbscan" if args.algo == "dbscan" else f"dbscanpp-{args.strategy}"], args.eps, args.min_pts)
    if args.algo == "dbscan":
        return dbscan(data, args.eps, args.min_pts, args.eps_connect, args.assignment)
    params = AlgoParams(args.eps, args.min_pts, _resolve_m(args, data.n, data.D), args.strategy,
                        args.seed, args.eps_connect, args.assignment)
    return dbscan_pp(data, params)


def _load_labeled(args) -> LabeledDataset:
    if getattr(args, "input", None):
        ds = load_csv(args.input, args.header, args.label_column)
    elif getattr(args, "gen", None):
        ds = generate(args.gen, args.n, args.seed)
    else:
        raise CliError("give an input CSV or --gen")
    if getattr(args, "standardize", False):
        ds = LabeledDataset(standardize(ds.data), ds.truth, ds.source)
    return ds


def _round_timings(timing: dict) -> dict:
    return {k: round(v, 3) for k, v in timing.items()}


# --- subcommands ------------------------------------------------------------


def cmd_cluster(args) -> int:
    ds = _load_labeled(args)
    result = _run(args, ds.data)
    write_labels(result.labels, args.out)
    report = EvalReport(timings_ms=_round_timings(result.timing))
    if ds.truth is not None and ds.n >= 2:
        report.ari = adjusted_rand_index(ds.truth, result.labels)
        report.ami = adjusted_mutual_info(ds.truth, result.labels)
    if args.algo == "dbscan":
        report.n_noise_dbscan = result.labels.n_noise
    else:
        report.n_noise_pp = result.labels.n_noise
        if args.noise_report:
            base = dbscan(ds.data, args.eps, args.min_pts, args.eps_connect, "graph")
            nr = noise_report(base, result)
            report.n_noise_dbscan, report.noise_subset = nr.n0, nr.subset_holds
    if args.report:
        Path(args.report).write_text(report.to_json(timings=not args.no_timings) + "\n", encoding="utf-8")
    if args.meta:
        write_metadata(ds, args.meta)
    print(f"{result.algorithm} k={result.labels.k} noise={result.labels.n_noise} elapsed_ms={result.total_ms:.1f}")
    return 0


def cmd_segment(args) -> int:
    t0 = time.perf_counter()
    pixels = read_ppm(args.input)
    h, w, _ = pixels.shape
    result = _run(args, image_to_dataset(pixels))
    labels_to_image(result.labels, w, h, args.out)
    if args.labels:
        write_labels(result.labels, args.labels)
    elapsed = (time.perf_counter() - t0) * 1e3
    print(f"segments={result.labels.k} noise={result.labels.n_noise} cluster_ms={result.total_ms:.1f} elapsed_ms={elapsed:.1f}")
    return 0


def cmd_eval(args) -> int:
    a = read_labels(args.labels_a)
    b = read_labels(args.labels_b)
    if len(a) != len(b):
        raise CliError(f"label files differ in length: {len(a)} vs {len(b)}")
    out = {
        "ari": adjusted_rand_index(a, b, exclude_noise=args.exclude_noise),
        "ami": adjusted_mutual_info(a, b, average=args.ami_average, exclude_noise=args.exclude_noise),
    }
    print(json.dumps(out))
    return 0


def _write_table(table: bench.BenchTable, prefix: str, kind: str, timings: bool) -> None:
    Path(prefix).parent.mkdir(parents=True, exist_ok=True)
    bench.write_records_csv(f"{prefix}.csv", table.records, timings)
    bench.write_records_jsonl(f"{prefix}.jsonl", table.records, timings)
    x, y = bench.PLOT_AXES[kind]
    if not timings and y.endswith("_ms"):
        return
    bench.write_plot_data(f"{prefix}.plot.csv", table.records, x, y)


def _algos(text: str) -> list[str]:
    algos = [a.strip() for a in text.split(",") if a.strip()]
    bad = [a for a in algos if a not in bench.ALGORITHMS]
    if bad or not algos:
        raise CliError(f"unknown algorithm(s) {bad}; choose from {bench.ALGORITHMS}")
    return algos


def cmd_bench(args) -> int:
    kind = args.kind
    prefix = args.out or f"bench-{kind}"
    if kind == "scaling":
        table = bench.run_scaling_experiment(
            args.gen or "gauss4x3d", sorted(set(args.sizes)), args.eps, args.min_pts,
            m=None if args.m_ratio is not None else args.m, m_ratio=args.m_ratio,
            algorithms=_algos(args.algos), seed=args.seed, repeats=args.repeats, timeout_s=args.timeout,
        )
    elif kind == "eps-sweep":
        ds = _load_labeled(args)
        table = bench.run_epsilon_sweep(ds, args.eps, args.min_pts, args.m_ratio, _algos(args.algos),
                                        args.seed, workers=args.workers)
    elif kind == "tradeoff":
        ds = _load_labeled(args)
        table = bench.run_tradeoff_sweep(ds, args.ratios, args.eps, args.min_pts, seed=args.seed,
                                         repeats=args.repeats, workers=args.workers)
    else:
        spec = default_levelset_spec()
        seeds = args.seeds or [args.seed + i for i in range(5)]
        m = args.m if args.m in ("minimax", "n") else int(args.m)
        table = bench.run_levelset_experiment(spec, args.lam, args.sizes, m=m, strategy=args.strategy,
                                              beta=args.beta, seeds=seeds, resolution=args.resolution)
    _write_table(table, prefix, kind, timings=not args.no_timings)
    summary = table.summary if not args.no_timings else _strip_timing_summary(table.summary)
    print(json.dumps(summary, default=str, sort_keys=True))
    return 0


def _strip_timing_summary(summary: dict) -> dict:
    drop = {"slopes", "runtime_pearson_r"}
    out = {}
    for k, v in summary.items():
        if k in drop:
            continue
        out[k] = _strip_timing_summary(v) if isinstance(v, dict) else v
    return out


def default_levelset_spec() -> DensitySpec:
    """Two unit-variance 2-D Gaussians, equal weights, centres 4 apart."""
    return DensitySpec("gaussian-mixture", [0.5, 0.5], [[-2.0, 0.0], [2.0, 0.0]], [1.0, 1.0])


COMMANDS = {"cluster": cmd_cluster, "segment": cmd_segment, "eval": cmd_eval, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("cluster", "segment"):
        _validate_algo(args.subparser, args)
    try:
        return COMMANDS[args.command](args)
    except (CliError, OSError, ValueError) as exc:
        print(f"dbscanpp {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
