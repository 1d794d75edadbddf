"""Per-module lookup imbalance on power-law graphs across seeds.

Prints both measures: next-hop volume (the reported ratio) and the raw
count of frontier entries served.

    python3 scripts/load_balance.py --seeds 5
"""

import argparse
import statistics

from moctopus.bench import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=10000)
    ap.add_argument("--m", type=int, default=4)
    ap.add_argument("--modules", type=int, default=64)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--seeds", type=int, default=3)
    args = ap.parse_args()

    rows = []
    print(f"{'seed':>4} {'moct hops':>10} {'hash hops':>10} {'moct cnt':>9} {'hash cnt':>9} {'host':>5}")
    for seed in range(args.seeds):
        out = {}
        for part in ("moctopus", "hash"):
            cfg = ExperimentConfig(part, modules=args.modules, k=args.k, seed=seed,
                                   gen=f"powerlaw:{args.nodes},{args.m}")
            out[part] = run_experiment(cfg)
        m, h = out["moctopus"].pass1, out["hash"].pass1
        rows.append(m.max_over_avg_lookup_ratio / h.max_over_avg_lookup_ratio)
        print(f"{seed:>4} {m.max_over_avg_lookup_ratio:>10.3f} {h.max_over_avg_lookup_ratio:>10.3f} "
              f"{m.max_over_avg_lookup_count_ratio:>9.3f} {h.max_over_avg_lookup_count_ratio:>9.3f} "
              f"{out['moctopus'].graph['host_resident']:>5}")
    print(f"mean hop-imbalance ratio moctopus/hash: {statistics.mean(rows):.3f}")


if __name__ == "__main__":
    main()
