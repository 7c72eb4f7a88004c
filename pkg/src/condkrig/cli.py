"""Command line entry point: ``condkrig {convergence,compare,fit,predict}``."""
from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .correlation import CONDITION_NORM, KernelParams
from .errors import InvalidArgumentError, ModelSingularError, ParseError, RegularizationError
from .experiments import ExperimentConfig, run_compare, run_convergence
from .io import fmt, read_points_csv
from .kriging import TrainingSet, fit, load_model
from .regularizer import RegularizerConfig, regularize
from .testlab import get_function

logger = logging.getLogger("condkrig")

# flag name -> config-file key is the same string
EXPERIMENT_KEYS = (
    "function", "counts", "seed", "grid", "theta0", "theta-bounds", "seeds-n",
    "max-iters", "step-tol", "out-dir", "layout", "constant", "jobs",
)
DEFAULTS = {
    "function": "franke",
    "counts": "16,36,64,121",
    "seed": "0",
    "grid": "101",
    "theta0": None,
    "theta-bounds": "1e-3,1e3",
    "seeds-n": "50",
    "max-iters": "200",
    "step-tol": "1e-4",
    "out-dir": "results",
    "layout": "random",
    "constant": None,
    "jobs": "1",
}


def _floats(text: str, what: str):
    try:
        vals = [float(t) for t in str(text).replace(";", ",").split(",") if t.strip()]
    except ValueError:
        raise ParseError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise ParseError(f"{what}: empty value")
    return vals


def _ints(text: str, what: str):
    vals = _floats(text, what)
    if any(v != int(v) for v in vals):
        raise ParseError(f"{what}: expected integers, got {text!r}")
    return [int(v) for v in vals]


def read_config_file(path) -> dict:
    """``key = value`` lines; ``#`` comments; keys use the long flag names."""
    text = Path(path).read_text(encoding="utf-8")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string("[condkrig]\n" + text, source=str(path))
    except configparser.Error as exc:
        raise ParseError(f"{path}: {exc}") from exc
    out = {}
    for key, value in parser["condkrig"].items():
        key = key.replace("_", "-")
        if key not in EXPERIMENT_KEYS:
            raise ParseError(f"{path}: unknown key {key!r}")
        out[key] = value
    return out


def merged_settings(args) -> dict:
    settings = dict(DEFAULTS)
    if getattr(args, "config", None):
        settings.update(read_config_file(args.config))
    for key in EXPERIMENT_KEYS:
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            settings[key] = value
    return settings


def experiment_config(settings: dict) -> ExperimentConfig:
    grid = _ints(settings["grid"], "grid")
    grid = grid * 2 if len(grid) == 1 else grid
    bounds = _floats(settings["theta-bounds"], "theta-bounds")
    if len(bounds) != 2:
        raise ParseError("theta-bounds: expected 'min,max'")
    theta0 = settings.get("theta0")
    reg = RegularizerConfig(
        theta0=tuple(_floats(theta0, "theta0")) if theta0 else None,
        n_seeds=_ints(settings["seeds-n"], "seeds-n")[0],
        theta_bounds=tuple(bounds),
        max_iters=_ints(settings["max-iters"], "max-iters")[0],
        step_tol=_floats(settings["step-tol"], "step-tol")[0],
    )
    constant = settings.get("constant")
    return ExperimentConfig(
        function=settings["function"],
        counts=tuple(_ints(settings["counts"], "counts")),
        seed=_ints(settings["seed"], "seed")[0],
        grid=tuple(grid),
        regularizer=reg,
        out_dir=Path(settings["out-dir"]),
        layout=settings["layout"],
        constant=_floats(constant, "constant")[0] if constant not in (None, "") else None,
        jobs=_ints(settings["jobs"], "jobs")[0],
    )


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file mirroring the flags below")
    p.add_argument("--function", help="griewank|sasena|franke|gfunction|irregular|cosin2")
    p.add_argument("--counts", help="comma-separated training-set sizes")
    p.add_argument("--seed", help="RNG seed for sampling and seeding")
    p.add_argument("--grid", help="grid resolution, 'm' or 'm1,m2'")
    p.add_argument("--theta0", help="initial / baseline theta (one value or one per dimension)")
    p.add_argument("--theta-bounds", help="'min,max' for theta")
    p.add_argument("--seeds-n", help="number of random perturbations")
    p.add_argument("--max-iters", help="compass-search iteration cap")
    p.add_argument("--step-tol", help="compass-search step tolerance")
    p.add_argument("--out-dir", help="output directory")
    p.add_argument("--layout", help="random|lattice")
    p.add_argument("--constant", help="override all values with this constant")
    p.add_argument("--jobs", help="threads for seed evaluations")


def cmd_convergence(args) -> int:
    config = experiment_config(merged_settings(args))
    results = run_convergence(config)
    failed = 0
    for n, res in results.items():
        if isinstance(res, Exception):
            print(f"n={n}\tFAILED\t{res}")
            failed += 1
        else:
            print(f"n={n}\tkappa0={res.kappa0:.6e}\tkappa={res.final.kappa:.6e}\tratio={res.improvement():.6e}")
    return 1 if failed else 0


def cmd_compare(args) -> int:
    config = experiment_config(merged_settings(args))
    results = run_compare(config)
    failed = 0
    for n, res in results.items():
        if isinstance(res, Exception):
            print(f"n={n}\tFAILED\t{res}")
            failed += 1
            continue
        for label in ("baseline", "regularized"):
            r = res.reports[label]
            print(f"n={n}\t{label}\trmse={r['rmse']:.6e}\tmax_abs={r['max_abs']:.6e}"
                  f"\troughness={r['roughness']:.6e}\tkappa={r['kappa']:.6e}")
    return 1 if failed else 0


def _domain(args, k: int):
    if args.domain:
        pairs = [_floats(p, "domain") for p in args.domain.split(";")]
        if len(pairs) != k or any(len(p) != 2 for p in pairs):
            raise ParseError(f"domain: expected {k} 'lo,hi' pairs separated by ';'")
        return pairs
    if args.function:
        return get_function(args.function).domain
    raise ParseError("fit needs --domain or --function to define the domain box")


def cmd_fit(args) -> int:
    locations, values = read_points_csv(args.points)
    k = locations.shape[1]
    training = TrainingSet(locations, values, _domain(args, k))
    if args.regularize:
        bounds = _floats(args.theta_bounds, "theta-bounds")
        config = RegularizerConfig(
            theta0=tuple(_floats(args.theta, "theta")) if args.theta else None,
            theta_bounds=tuple(bounds),
            rng_seed=args.seed,
        )
        params, trace = regularize(training, config)
        logger.info("kappa %.3e -> %.3e", trace.kappa0, trace.final.kappa)
    else:
        theta = _floats(args.theta or "1", "theta")
        params = KernelParams(np.broadcast_to(theta, (k,)))
    model = fit(training, params)
    model.save(args.model)
    print(f"wrote {args.model}\tn={training.n}\ttheta={params.theta.tolist()}\tkappa={model.kappa:.6e}")
    return 0


def _queries(args):
    out = [_floats(q, "query") for q in args.query or []]
    if args.queries:
        with open(args.queries, newline="", encoding="utf-8") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or row[0].startswith("#"):
                    continue
                try:
                    out.append([float(c) for c in row])
                except ValueError:
                    if lineno == 1:
                        continue  # header
                    raise ParseError(f"{args.queries}:{lineno}: non-numeric query {row}") from None
    return out


def cmd_predict(args) -> int:
    model = load_model(args.model)
    queries = _queries(args)
    if not queries:
        return 0
    k = model.training.k
    w = csv.writer(sys.stdout, lineterminator="\n")
    print(f"# kappa={fmt(model.kappa)} norm={CONDITION_NORM} theta={model.params.theta.tolist()}")
    w.writerow([f"x{j + 1}" for j in range(k)] + ["value", "extrapolated"])
    for q in queries:
        if len(q) != k:
            raise ParseError(f"query {q}: expected {k} coordinates")
        p = model.predict(q)
        w.writerow([fmt(v) for v in q] + [fmt(p.value), str(p.extrapolated).lower()])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="condkrig", description=__doc__)
    parser.add_argument("--version", action="version", version=f"condkrig {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convergence", help="normalized condition-number traces per training-set size")
    _add_experiment_flags(p)
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("compare", help="surfaces and error fields with and without regularization")
    _add_experiment_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("fit", help="fit a model from a points CSV (x1..xk,value)")
    p.add_argument("--points", required=True)
    p.add_argument("--model", required=True, help="output model JSON")
    p.add_argument("--domain", help="'lo,hi;lo,hi' per dimension")
    p.add_argument("--function", help="take the domain from a named test function")
    p.add_argument("--theta", help="theta (or theta0 with --regularize)")
    p.add_argument("--regularize", action="store_true", help="tune theta by condition-number minimization")
    p.add_argument("--theta-bounds", default="1e-3,1e3")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="evaluate a saved model")
    p.add_argument("model")
    p.add_argument("--query", action="append", help="comma-separated coordinates; repeatable")
    p.add_argument("--queries", help="CSV file of query points")
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except (InvalidArgumentError, ModelSingularError, RegularizationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
