"""Convergence and with/without-regularization comparison studies.

Each study writes plot-ready CSV files with a ``.meta.json`` sidecar and
JSON reports into ``ExperimentConfig.out_dir``.
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np

from . import __version__
from .correlation import CONDITION_NORM, KernelParams
from .errors import InvalidArgumentError, ModelSingularError, RegularizationError
from .io import config_hash, write_json, write_with_sidecar
from .kriging import KrigingModel, TrainingSet, fit
from .regularizer import ConvergenceTrace, RegularizerConfig, regularize
from .testlab import error_report, evaluate_grid, get_function, sample_lattice, sample_random

logger = logging.getLogger(__name__)

RUN_ERRORS = (RegularizationError, ModelSingularError, InvalidArgumentError, ArithmeticError)


@dataclass(frozen=True)
class ExperimentConfig:
    function: str = "franke"
    counts: Tuple[int, ...] = (16, 36, 64, 121)
    seed: int = 0
    grid: Tuple[int, int] = (101, 101)
    regularizer: RegularizerConfig = field(default_factory=RegularizerConfig)
    out_dir: Path = Path("results")
    layout: str = "random"
    constant: Optional[float] = None
    jobs: int = 1

    def __post_init__(self):
        get_function(self.function)
        if not self.counts or any(int(c) < 2 for c in self.counts):
            raise InvalidArgumentError("sample counts must all be >= 2")
        if len(self.grid) != 2 or min(self.grid) < 2:
            raise InvalidArgumentError("grid resolution must be >= 2 per axis")
        if self.layout not in ("random", "lattice"):
            raise InvalidArgumentError("layout must be 'random' or 'lattice'")
        if self.layout == "lattice":
            for c in self.counts:
                if round(np.sqrt(c)) ** 2 != c:
                    raise InvalidArgumentError(f"lattice layout needs square counts, got {c}")

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["out_dir"] = str(self.out_dir)
        d["counts"] = list(self.counts)
        d["grid"] = list(self.grid)
        d.pop("jobs")  # does not change results
        return d

    def metadata(self, **extra) -> dict:
        reg = self.regularizer
        meta = {
            "tool": "condkrig",
            "tool_version": __version__,
            "config_hash": config_hash(self.as_dict()),
            "rng_seed": self.seed,
            "theta_bounds": np.asarray(reg.theta_bounds, dtype=float).tolist(),
            "condition_norm": CONDITION_NORM,
            "config": self.as_dict(),
        }
        meta.update(extra)
        return meta


def training_set(config: ExperimentConfig, n: int) -> TrainingSet:
    fn = get_function(config.function)
    if config.layout == "lattice":
        ts = sample_lattice(fn, int(round(np.sqrt(n))))
    else:
        ts = sample_random(fn, n, config.seed)
    if config.constant is not None:
        ts = ts.with_values(np.full(ts.n, float(config.constant)))
    return ts


def _reg_config(config: ExperimentConfig) -> RegularizerConfig:
    return dataclasses.replace(config.regularizer, rng_seed=config.seed)


def run_convergence(config: ExperimentConfig) -> Dict[int, Union[ConvergenceTrace, Exception]]:
    """Regularize one training set per count and write its normalized trace.

    A failing count is logged and reported in the result mapping; the
    remaining counts still run.
    """
    out = Path(config.out_dir)
    results: Dict[int, Union[ConvergenceTrace, Exception]] = {}
    for n in config.counts:
        try:
            ts = training_set(config, n)
            _, trace = regularize(ts, _reg_config(config), n_jobs=config.jobs)
        except RUN_ERRORS as exc:
            logger.error("convergence n=%d failed: %s", n, exc)
            results[n] = exc
            continue
        path = out / f"convergence_n{n}.csv"
        write_with_sidecar(
            path,
            trace.header(),
            trace.rows(),
            config.metadata(count=n, points_hash=ts.location_hash(), kappa0=trace.kappa0,
                            kappa_final=trace.final.kappa),
        )
        results[n] = trace
    return results


@dataclass
class CompareResult:
    training: TrainingSet
    baseline: KrigingModel
    regularized: KrigingModel
    trace: ConvergenceTrace
    reports: Dict[str, dict]


def compare_one(config: ExperimentConfig, n: int, write: bool = True) -> CompareResult:
    """Fit the same training set with ``theta0`` and with tuned ``theta``."""
    fn = get_function(config.function)
    ts = training_set(config, n)
    reg_cfg = _reg_config(config)
    theta0 = KernelParams(reg_cfg.start(ts.k))
    params, trace = regularize(ts, reg_cfg, n_jobs=config.jobs)
    baseline = fit(ts, theta0)
    regularized = fit(ts, params)

    truth = evaluate_grid(fn, config.grid)
    if config.constant is not None:
        truth = type(truth)(truth.domain, np.full(truth.resolution, float(config.constant)))
    out = Path(config.out_dir) / f"compare_n{n}"
    points_hash = ts.location_hash()
    reports = {}
    for label, model in (("baseline", baseline), ("regularized", regularized)):
        surface = evaluate_grid(model, config.grid)
        rep = error_report(truth, surface)
        reports[label] = dict(
            rep.summary(),
            kappa=model.kappa,
            kappa_before=trace.kappa0,
            kappa_after=trace.final.kappa,
            theta=model.params.theta.tolist(),
            theta_before=theta0.theta.tolist(),
            theta_after=params.theta.tolist(),
            solver=model.system.method,
            count=n,
            points_hash=points_hash,
        )
        if write:
            meta = config.metadata(variant=label, count=n, points_hash=points_hash, theta=model.params.theta.tolist())
            surface.save(out / f"surface_{label}.csv", meta)
            rep.difference.save(out / f"error_{label}.csv", meta)
            write_json(out / f"report_{label}.json", dict(config.metadata(), **reports[label]))
    if write:
        write_with_sidecar(
            out / "training_points.csv",
            ["x1", "x2", "value"],
            ([float(a), float(b), float(v)] for (a, b), v in zip(ts.locations, ts.values)),
            config.metadata(count=n, points_hash=points_hash),
        )
    return CompareResult(ts, baseline, regularized, trace, reports)


def run_compare(config: ExperimentConfig) -> Dict[int, Union[CompareResult, Exception]]:
    results: Dict[int, Union[CompareResult, Exception]] = {}
    for n in config.counts:
        try:
            results[n] = compare_one(config, n)
        except RUN_ERRORS as exc:
            logger.error("compare n=%d failed: %s", n, exc)
            results[n] = exc
    return results
