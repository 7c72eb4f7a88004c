"""Normalized condition-number traces for several training-set sizes.

    python3 scripts/convergence_study.py --out-dir results/convergence

Writes ``convergence_n{n}.csv`` per size and prints the final kappa/kappa0.
"""
import argparse
import logging
from pathlib import Path

from condkrig.experiments import ExperimentConfig, run_convergence


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--function", default="franke")
    ap.add_argument("--counts", default="16,36,64,121")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", type=Path, default=Path("results/convergence"))
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")

    cfg = ExperimentConfig(
        function=args.function,
        counts=tuple(int(c) for c in args.counts.split(",")),
        seed=args.seed,
        out_dir=args.out_dir,
    )
    for n, res in run_convergence(cfg).items():
        if isinstance(res, Exception):
            print(f"n={n:4d}  failed: {res}")
        else:
            print(f"n={n:4d}  kappa0={res.kappa0:.3e}  final={res.final.kappa:.3e}  ratio={res.improvement():.3e}")


if __name__ == "__main__":
    main()
