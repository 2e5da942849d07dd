"""Command line interface: ``cluster`` user sequences or ``simulate`` error curves.

Exit codes: 0 success, 2 invalid arguments, 3 input parse failure,
4 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .geometry import ClusterGeometry, threshold_from_omega
from .kmedoids import cluster_known_k
from .metrics import ks_metric, mmd_metric, pairwise_distance_matrix
from .simharness import ScenarioConfig, run_trials
from .unknown_k import cluster_merge_based, cluster_split_based

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_RUNTIME = 4


class InputError(Exception):
    pass


def read_sequences(path: str):
    """One sequence per line, comma-separated decimal samples.

    Blank lines and lines starting with ``#`` are skipped.
    """
    seqs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                values = np.array([float(tok) for tok in line.split(",")])
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from exc
            if not np.all(np.isfinite(values)):
                raise InputError(f"{path}:{lineno}: non-finite sample")
            seqs.append(values)
    if len(seqs) < 2:
        raise InputError(f"{path}: need at least 2 sequences, found {len(seqs)}")
    return seqs


def _int_list(text: str):
    try:
        values = tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if any(v < 2 for v in values):
        raise argparse.ArgumentTypeError("sample sizes must be at least 2")
    return values


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqmedoids", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    cl = sub.add_parser("cluster", help="cluster sequences read from a file")
    cl.add_argument("--input", required=True)
    cl.add_argument("--output", required=True)
    cl.add_argument("--metric", choices=["ks", "mmd"], default="ks")
    cl.add_argument("--kernel-scale", type=float, default=2.0)
    cl.add_argument("--algorithm", choices=["known", "merge", "split"], default="known")
    cl.add_argument("--k", type=_positive_int)
    cl.add_argument("--dth", type=float)
    cl.add_argument("--omega", type=float)
    cl.add_argument("--dl", type=float)
    cl.add_argument("--dh", type=float)
    cl.add_argument("--max-iters", type=_positive_int, default=100)

    sim = sub.add_parser("simulate", help="estimate error probabilities on a synthetic scenario")
    sim.add_argument("--family", choices=["gaussian", "gamma"], default="gaussian")
    sim.add_argument("--delta", type=float, default=0.0)
    sim.add_argument("--metric", choices=["ks", "mmd"], default="ks")
    sim.add_argument("--algorithm", choices=["known", "merge", "split"], default="known")
    sim.add_argument("--omega", type=float, default=0.5)
    sim.add_argument("--n", type=_int_list, required=True, help="sample sizes, e.g. 100,200,400")
    sim.add_argument("--trials", type=_positive_int, default=100)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--kernel-scale", type=float, default=2.0)
    sim.add_argument("--max-iters", type=_positive_int, default=100)
    sim.add_argument("--dth", type=float)
    sim.add_argument("--dl", type=float)
    sim.add_argument("--dh", type=float)
    sim.add_argument("--jobs", type=_positive_int, default=1, help="worker processes")
    sim.add_argument("--output", required=True)
    return parser


def _cluster_threshold(parser, args):
    if args.dth is not None:
        return args.dth
    if args.omega is None or args.dl is None or args.dh is None:
        parser.error(f"--algorithm {args.algorithm} needs --dth or all of --omega, --dl, --dh")
    try:
        return threshold_from_omega(ClusterGeometry(args.dl, args.dh), args.omega).d_th
    except ValueError as exc:
        parser.error(str(exc))


def cmd_cluster(parser, args) -> int:
    if args.kernel_scale <= 0:
        parser.error("--kernel-scale must be positive")
    if args.algorithm == "known":
        if args.k is None:
            parser.error("--algorithm known needs --k")
    else:
        d_th = _cluster_threshold(parser, args)
    try:
        seqs = read_sequences(args.input)
    except (OSError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    if args.algorithm == "known" and args.k > len(seqs):
        parser.error(f"--k {args.k} exceeds the number of sequences ({len(seqs)})")

    try:
        metric = ks_metric() if args.metric == "ks" else mmd_metric(args.kernel_scale)
        D = pairwise_distance_matrix(seqs, metric)
        if args.algorithm == "known":
            result = cluster_known_k(D, args.k, args.max_iters)
        elif args.algorithm == "merge":
            result = cluster_merge_based(D, d_th, args.max_iters)
        else:
            result = cluster_split_based(D, d_th, args.max_iters)
        with open(args.output, "w") as fh:
            medoids = ",".join(str(m) for m in result.medoids)
            fh.write(f"# medoids={medoids} iterations={result.iterations} "
                     f"converged={str(result.converged).lower()}\n")
            fh.write("sequence_index,cluster_id\n")
            for i, c in enumerate(result.assignment):
                fh.write(f"{i},{int(c)}\n")
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: clustering {args.input} failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_simulate(parser, args) -> int:
    if args.algorithm != "known" and args.dth is None and not 0 < args.omega < 1:
        parser.error("--omega must lie in (0, 1)")
    try:
        cfg = ScenarioConfig(
            family=args.family, delta=args.delta, metric=args.metric, algorithm=args.algorithm,
            omega=args.omega, n_list=args.n, trials=args.trials, master_seed=args.seed,
            kernel_scale=args.kernel_scale, max_iters=args.max_iters,
            d_L=args.dl, d_H=args.dh, d_th=args.dth,
        )
    except ValueError as exc:
        parser.error(str(exc))
    try:
        curve = run_trials(cfg, workers=args.jobs)
        with open(args.output, "w", newline="") as fh:
            curve.write_csv(fh)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: simulation failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    if args.command == "cluster":
        return cmd_cluster(parser, args)
    return cmd_simulate(parser, args)


if __name__ == "__main__":
    sys.exit(main())
