"""Surfaces and error fields with and without length-scale tuning.

    python3 scripts/compare_study.py --functions griewank,sasena --counts 121
"""
import argparse
import logging
from pathlib import Path

from condkrig.experiments import ExperimentConfig, run_compare


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--functions", default="griewank,sasena")
    ap.add_argument("--counts", default="121")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", type=Path, default=Path("results/compare"))
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")

    counts = tuple(int(c) for c in args.counts.split(","))
    print(f"{'function':10s} {'n':>4s} {'variant':12s} {'rmse':>11s} {'max_abs':>11s} {'roughness':>11s} theta")
    for name in args.functions.split(","):
        cfg = ExperimentConfig(function=name, counts=counts, seed=args.seed, out_dir=args.out_dir / name)
        for n, res in run_compare(cfg).items():
            if isinstance(res, Exception):
                print(f"{name:10s} {n:4d} failed: {res}")
                continue
            for label, rep in res.reports.items():
                theta = ",".join(f"{t:.3g}" for t in rep["theta"])
                print(
                    f"{name:10s} {n:4d} {label:12s} {rep['rmse']:11.4e} {rep['max_abs']:11.4e} "
                    f"{rep['roughness']:11.4e} {theta}"
                )


if __name__ == "__main__":
    main()
