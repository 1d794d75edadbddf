"""IPC of greedy placement against hash placement on a community graph.

Runs the same edge set streamed in two orders, since greedy first-neighbor
placement is sensitive to how a community's nodes first appear.

    python3 scripts/ipc_vs_hash.py --communities 64 --size 500 --seed 0
"""

import argparse

from moctopus.bench import ExperimentConfig, run_experiment
from moctopus.generators import gen_community_graph


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--communities", type=int, default=64)
    ap.add_argument("--size", type=int, default=500)
    ap.add_argument("--degree", type=int, default=8)
    ap.add_argument("--p-intra", type=float, default=0.95)
    ap.add_argument("--modules", type=int, default=64)
    ap.add_argument("--batch-size", type=int, default=1024)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    gen = f"community:{args.communities},{args.size},{args.degree},{args.p_intra}"
    print(f"{'order':<10} {'partitioner':<10} {'ipc pass1':>10} {'ipc pass2':>10} {'ratio1':>7} {'ratio2':>7}")
    for order in ("lockstep", "source"):
        edges = gen_community_graph(args.communities, args.size, args.degree, args.p_intra,
                                    args.seed, order=order)
        reps = {}
        for part in ("hash", "moctopus"):
            cfg = ExperimentConfig(part, modules=args.modules, batch_size=args.batch_size,
                                   seed=args.seed, gen=gen)
            reps[part] = run_experiment(cfg, edges)
        h = reps["hash"]
        for part, r in reps.items():
            print(f"{order:<10} {part:<10} {r.pass1.ipc_bytes:>10} {r.pass2.ipc_bytes:>10} "
                  f"{r.pass1.ipc_bytes / h.pass1.ipc_bytes:>7.3f} {r.pass2.ipc_bytes / h.pass2.ipc_bytes:>7.3f}")


if __name__ == "__main__":
    main()
