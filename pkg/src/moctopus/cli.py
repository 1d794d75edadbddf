"""Command line entry point: ``moctopus {query,update,compare} ...``."""

from __future__ import annotations

import argparse
import logging
import sys

from .bench import ExperimentConfig, format_report, run_compare, run_experiment, run_update
from .graph import ParseError


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", metavar="PATH", help="SNAP edge-list file")
    src.add_argument("--gen", metavar="SPEC",
                     help="community:c,n,d,p or powerlaw:n,m")
    common.add_argument("--partitioner", choices=["moctopus", "hash"], default="moctopus")
    common.add_argument("--modules", type=int, default=64)
    common.add_argument("--k", type=int, default=3)
    common.add_argument("--batch-size", type=int, default=1024)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--degree-threshold", type=int, default=16)
    common.add_argument("--capacity-factor", type=float, default=1.05)
    common.add_argument("--mispartition", type=float, default=0.0,
                        help="fraction of new nodes forced onto a hashed module")
    common.add_argument("--threads", type=int, default=0)
    common.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="moctopus", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("query", parents=[common], help="ingest, run a k-hop batch twice around a migration pass")
    sub.add_parser("update", parents=[common], help="insert / replay / delete a random edge batch")
    sub.add_parser("compare", parents=[common], help="run query under both partitioners")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = ExperimentConfig(
            partitioner=args.partitioner, modules=args.modules, k=args.k,
            batch_size=args.batch_size, seed=args.seed,
            degree_threshold=args.degree_threshold, capacity_factor=args.capacity_factor,
            input=args.input, gen=args.gen, out=args.out,
            mispartition=args.mispartition, threads=args.threads,
        )
        if args.command == "query":
            report = run_experiment(cfg).to_dict()
        elif args.command == "update":
            report = run_update(cfg)
        else:
            report = run_compare(cfg)
    except (ParseError, OSError, ValueError) as exc:
        print(f"moctopus: error: {exc}", file=sys.stderr)
        return 2
    text = format_report(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
