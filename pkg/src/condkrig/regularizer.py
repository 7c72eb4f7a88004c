"""Length-scale tuning by condition-number minimization.

The self-correlation matrix depends only on the (normalized) sample
locations, so everything here ignores the function values. Tuning runs in
two stages: a random multiplicative perturbation around ``theta0`` picks a
starting point, then a compass search in ``log(theta)`` refines it.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .correlation import KAPPA_SENTINEL, KernelParams, condition_number, correlation_matrix
from .errors import InvalidArgumentError, RegularizationError
from .kriging import TrainingSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RegularizerConfig:
    """Settings for :func:`regularize`.

    ``theta0`` of None means all-ones. ``theta_bounds`` is either one
    ``(min, max)`` pair shared by every dimension or one pair per dimension.
    """

    theta0: Optional[Tuple[float, ...]] = None
    n_seeds: int = 50
    seed_factor_range: Tuple[float, float] = (0.1, 10.0)
    theta_bounds: Tuple = (1e-3, 1e3)
    initial_step: float = 0.5
    step_shrink: float = 0.5
    step_tol: float = 1e-4
    max_iters: int = 200
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_seeds < 0:
            raise InvalidArgumentError("n_seeds must be non-negative")
        if self.max_iters < 1:
            raise InvalidArgumentError("max_iters must be positive")
        lo, hi = self.seed_factor_range
        if not 0 < lo <= hi:
            raise InvalidArgumentError("seed_factor_range must satisfy 0 < low <= high")
        if not self.initial_step > 0 or not self.step_tol > 0:
            raise InvalidArgumentError("initial_step and step_tol must be positive")
        if not 0 < self.step_shrink < 1:
            raise InvalidArgumentError("step_shrink must lie in (0, 1)")
        b = np.asarray(self.theta_bounds, dtype=float)
        if b.shape[-1] != 2 or b.ndim > 2 or np.any(b <= 0) or np.any(b[..., 0] >= b[..., 1]):
            raise InvalidArgumentError(f"invalid theta_bounds {self.theta_bounds}")
        if self.theta0 is not None:
            t0 = np.atleast_1d(np.asarray(self.theta0, dtype=float))
            blo, bhi = self.bounds(t0.size)
            if np.any(t0 < blo) or np.any(t0 > bhi):
                raise InvalidArgumentError("theta0 lies outside theta_bounds")

    def bounds(self, k: int) -> Tuple[np.ndarray, np.ndarray]:
        b = np.asarray(self.theta_bounds, dtype=float)
        b = np.broadcast_to(b, (k, 2)) if b.ndim == 1 else b
        if b.shape != (k, 2):
            raise InvalidArgumentError(f"theta_bounds has {b.shape[0]} pairs, need {k}")
        return b[:, 0].copy(), b[:, 1].copy()

    def start(self, k: int) -> np.ndarray:
        if self.theta0 is None:
            t0 = np.ones(k)
        else:
            t0 = np.broadcast_to(np.asarray(self.theta0, dtype=float), (k,)).copy()
        lo, hi = self.bounds(k)
        if np.any(t0 < lo) or np.any(t0 > hi):
            raise InvalidArgumentError("theta0 lies outside theta_bounds")
        return t0


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    theta: Tuple[float, ...]
    kappa: float


@dataclass
class ConvergenceTrace:
    """Incumbent ``(iteration, theta, kappa)`` after every iteration.

    ``budget`` is the largest iteration index the run was allowed to reach;
    it is the denominator of the normalized iteration axis.
    """

    entries: List[TraceEntry] = field(default_factory=list)
    budget: int = 1

    @property
    def kappa0(self) -> float:
        return self.entries[0].kappa

    @property
    def final(self) -> TraceEntry:
        return self.entries[-1]

    @property
    def kappas(self) -> np.ndarray:
        return np.array([e.kappa for e in self.entries])

    def normalized(self) -> np.ndarray:
        """Array of ``(iteration / budget, kappa / kappa0)`` rows."""
        it = np.array([e.iteration for e in self.entries], dtype=float)
        kap = self.kappas
        ratio = np.where(kap == self.kappa0, 1.0, kap / self.kappa0)
        return np.column_stack([it / self.budget, ratio])

    def improvement(self) -> float:
        """Final kappa divided by initial kappa."""
        return float(self.normalized()[-1, 1])

    def header(self) -> List[str]:
        k = len(self.entries[0].theta)
        return ["iter", "iter_norm", "kappa", "kappa_norm"] + [f"theta_{j + 1}" for j in range(k)]

    def rows(self):
        for e, (itn, kn) in zip(self.entries, self.normalized()):
            yield [e.iteration, float(itn), float(e.kappa), float(kn), *map(float, e.theta)]

    def __eq__(self, other):
        if not isinstance(other, ConvergenceTrace):
            return NotImplemented
        return self.budget == other.budget and self.entries == other.entries


def kappa_of(points: np.ndarray, theta) -> float:
    """Condition number of the self-correlation matrix of ``points``."""
    params = KernelParams(theta)
    return condition_number(correlation_matrix(points, points, params))


def ranking_key(points: np.ndarray, theta) -> Tuple[float, float]:
    """``(kappa, |lambda|max / |lambda|min)`` used to order candidates.

    The second component only matters between matrices that both lost
    positive definiteness (both at the sentinel); it lets the search walk
    out of that plateau instead of stalling on it.
    """
    R = correlation_matrix(points, points, KernelParams(theta))
    kappa = condition_number(R)
    if kappa < KAPPA_SENTINEL:
        return kappa, kappa
    eig = np.abs(linalg.eigvalsh(R))
    return kappa, (float(eig.max() / eig.min()) if eig.min() > 0 else np.inf)


def seed_candidates(config: RegularizerConfig, k: int) -> np.ndarray:
    """The ``n_seeds`` perturbed length-scale vectors, one per row.

    Each component of ``theta0`` is multiplied by an independent
    log-uniform factor from ``seed_factor_range`` and clamped to the bounds.
    """
    t0 = config.start(k)
    lo, hi = config.bounds(k)
    rng = np.random.default_rng(config.rng_seed)
    a, b = np.log(config.seed_factor_range)
    factors = np.exp(rng.uniform(a, b, size=(config.n_seeds, k)))
    return np.clip(t0 * factors, lo, hi)


def _as_points(points) -> np.ndarray:
    x = np.asarray(points, dtype=float)
    if x.ndim != 2:
        raise InvalidArgumentError("points must be an (n, k) array")
    return x


@dataclass(frozen=True)
class SeedResult:
    theta: np.ndarray
    kappa: float
    entries: List[TraceEntry]


def seed_search(points, config: RegularizerConfig, n_jobs: int = 1, strict: bool = True) -> SeedResult:
    """Evaluate kappa at ``theta0`` and every perturbed candidate; keep the best.

    ``n_jobs > 1`` evaluates candidates in a thread pool. Ties go to the
    earliest candidate (``theta0`` first), so the result does not depend on
    ``n_jobs``.

    Returns a :class:`SeedResult` whose ``entries`` hold the trace prefix:
    iteration 0 for ``theta0`` and, when perturbations were drawn,
    iteration 1 for the selected candidate.

    Raises:
        RegularizationError: every candidate is non-SPD and ``strict`` is set.
    """
    x = _as_points(points)
    k = x.shape[1]
    t0 = config.start(k)
    candidates = np.vstack([t0[None, :], seed_candidates(config, k)])
    if n_jobs > 1 and len(candidates) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            keys = list(pool.map(lambda t: ranking_key(x, t), candidates))
    else:
        keys = [ranking_key(x, t) for t in candidates]
    kappas = np.array([k_[0] for k_ in keys])
    if strict and x.shape[0] >= 2 and np.all(kappas >= KAPPA_SENTINEL):
        raise RegularizationError(
            f"all {len(candidates)} seed candidates give a non-positive-definite correlation matrix"
        )
    best = min(range(len(keys)), key=keys.__getitem__)
    entries = [TraceEntry(0, tuple(t0.tolist()), float(kappas[0]))]
    if config.n_seeds > 0:
        entries.append(TraceEntry(1, tuple(candidates[best].tolist()), float(kappas[best])))
    logger.debug("seed stage: kappa %.3e -> %.3e", kappas[0], kappas[best])
    return SeedResult(candidates[best].copy(), float(kappas[best]), entries)


def direct_search(points, theta_start, config: RegularizerConfig, prefix: Optional[Sequence[TraceEntry]] = None):
    """Compass search on ``log(theta)`` minimizing the condition number.

    Every iteration polls ``+step`` and ``-step`` along each coordinate
    (clamped to the bounds, polls that collapse onto the incumbent are
    skipped). The poll with the lowest :func:`ranking_key` is accepted if it
    strictly improves on the incumbent; otherwise the step is multiplied by
    ``step_shrink``. The search ends when the step drops below ``step_tol``
    or after ``max_iters`` iterations.

    Args:
        prefix: trace entries already produced (e.g. by :func:`seed_search`);
            their last entry must describe ``theta_start``. Poll iterations
            continue its numbering.

    Returns:
        ``(theta_opt, ConvergenceTrace)``
    """
    x = _as_points(points)
    k = x.shape[1]
    lo, hi = config.bounds(k)
    theta = np.asarray(theta_start, dtype=float).reshape(k).copy()
    if np.any(theta < lo) or np.any(theta > hi):
        raise InvalidArgumentError("theta_start lies outside theta_bounds")

    key = ranking_key(x, theta)
    kappa = key[0]
    if prefix:
        entries = list(prefix)
    else:
        entries = [TraceEntry(0, tuple(theta.tolist()), kappa)]
    first = entries[-1].iteration
    budget = first + config.max_iters

    log_lo, log_hi = np.log(lo), np.log(hi)
    step = config.initial_step
    for it in range(1, config.max_iters + 1):
        if step < config.step_tol:
            break
        u = np.log(theta)
        best_theta, best_key = None, key
        for j in range(k):
            for sign in (1.0, -1.0):
                v = u.copy()
                v[j] = np.clip(u[j] + sign * step, log_lo[j], log_hi[j])
                trial = np.clip(np.exp(v), lo, hi)
                if trial[j] == theta[j]:
                    continue
                kt = ranking_key(x, trial)
                if kt < best_key:
                    best_theta, best_key = trial, kt
        if best_theta is None:
            step *= config.step_shrink
        else:
            theta, key = best_theta, best_key
            kappa = key[0]
        entries.append(TraceEntry(first + it, tuple(theta.tolist()), kappa))

    return theta, ConvergenceTrace(entries, budget)


def regularize(training: TrainingSet, config: RegularizerConfig = RegularizerConfig(), n_jobs: int = 1):
    """Tune length scales for ``training`` by minimizing the condition number.

    Only the normalized locations are used; ``training.values`` never
    enters the computation.

    Returns:
        ``(KernelParams, ConvergenceTrace)``

    Raises:
        RegularizationError: no evaluated theta gave a positive definite matrix.
    """
    if training.n < 2:
        raise InvalidArgumentError("regularization needs at least two points")
    x = training.normalized()
    seeded = seed_search(x, config, n_jobs=n_jobs, strict=False)
    theta, trace = direct_search(x, seeded.theta, config, prefix=seeded.entries)
    if trace.final.kappa >= KAPPA_SENTINEL:
        raise RegularizationError("no theta within bounds gives a positive definite correlation matrix")
    logger.info(
        "regularized n=%d: kappa %.3e -> %.3e, theta=%s", training.n, trace.kappa0, trace.final.kappa, theta
    )
    return KernelParams(theta), trace
