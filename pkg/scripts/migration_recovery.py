"""IPC before and after one migration pass, sweeping injected mispartitioning.

    python3 scripts/migration_recovery.py --fractions 0 0.05 0.1 0.2
"""

import argparse

from moctopus.bench import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gen", default="community:64,500,8,0.95")
    ap.add_argument("--modules", type=int, default=64)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--fractions", type=float, nargs="+", default=[0.0, 0.05, 0.1, 0.2])
    args = ap.parse_args()

    print(f"{'mispart':>7} {'ipc pass1':>10} {'ipc pass2':>10} {'moved':>6} {'reports':>8}")
    for frac in args.fractions:
        cfg = ExperimentConfig(gen=args.gen, modules=args.modules, seed=args.seed, mispartition=frac)
        r = run_experiment(cfg)
        print(f"{frac:>7.2f} {r.pass1.ipc_bytes:>10} {r.pass2.ipc_bytes:>10} "
              f"{r.migrations_applied:>6} {r.migration['reports']:>8}")


if __name__ == "__main__":
    main()
