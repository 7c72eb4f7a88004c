"""Ordinary kriging on a normalized design space."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .correlation import (
    CONDITION_NORM,
    CorrelationSystem,
    FactorizationError,
    KernelParams,
    build_self_correlation,
    correlation_matrix,
)
from .errors import InvalidArgumentError, ModelSingularError, ParseError

DUPLICATE_TOL = 1e-12
WEIGHT_SUM_TOL = 1e-10


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """Sample locations, their function values and the domain box.

    Args:
        locations: (n, k) raw coordinates.
        values: (n,) function values at ``locations``.
        domain: k pairs ``(lower, upper)``.
    """

    locations: np.ndarray
    values: np.ndarray
    domain: np.ndarray
    unit: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        domain = np.asarray(self.domain, dtype=float)
        if domain.ndim != 2 or domain.shape[1] != 2:
            raise InvalidArgumentError("domain must be a sequence of (lower, upper) pairs")
        if not np.all(np.isfinite(domain)) or np.any(domain[:, 0] >= domain[:, 1]):
            raise InvalidArgumentError("domain bounds must be finite with lower < upper")
        k = domain.shape[0]
        x = np.asarray(self.locations, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, k)
        w = np.asarray(self.values, dtype=float).reshape(-1)
        if x.ndim != 2 or x.shape[1] != k:
            raise InvalidArgumentError(f"locations must have shape (n, {k})")
        if x.shape[0] < 1:
            raise InvalidArgumentError("a training set needs at least one point")
        if w.shape[0] != x.shape[0]:
            raise InvalidArgumentError(f"{x.shape[0]} locations but {w.shape[0]} values")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(w))):
            raise InvalidArgumentError("locations and values must be finite")
        if np.any(x < domain[:, 0]) or np.any(x > domain[:, 1]):
            raise InvalidArgumentError("every location must lie inside the domain box")
        object.__setattr__(self, "locations", _readonly(x))
        object.__setattr__(self, "values", _readonly(w))
        object.__setattr__(self, "domain", _readonly(domain))
        if self.unit is None:
            u = self.normalize(x)
        else:
            u = np.asarray(self.unit, dtype=float)
            if u.shape != x.shape or not np.allclose(u, self.normalize(x), rtol=0, atol=1e-12):
                raise InvalidArgumentError("unit coordinates disagree with locations")
        object.__setattr__(self, "unit", _readonly(u))

        if u.shape[0] > 1:
            gap = np.max(np.abs(u[:, None, :] - u[None, :, :]), axis=-1)
            np.fill_diagonal(gap, np.inf)
            if gap.min() <= DUPLICATE_TOL:
                i, j = np.unravel_index(np.argmin(gap), gap.shape)
                raise InvalidArgumentError(f"locations {i} and {j} are duplicates")

    @classmethod
    def from_unit(cls, unit, values, domain) -> "TrainingSet":
        """Build from unit-box coordinates, which are kept bit-exact.

        Two training sets drawn from the same unit-box sample then share an
        identical correlation matrix whatever their domains.
        """
        unit = np.asarray(unit, dtype=float)
        domain = np.asarray(domain, dtype=float)
        x = domain[:, 0] + unit * (domain[:, 1] - domain[:, 0])
        x = np.clip(x, domain[:, 0], domain[:, 1])
        return cls(x, values, domain, unit)

    @property
    def n(self) -> int:
        return self.locations.shape[0]

    @property
    def k(self) -> int:
        return self.locations.shape[1]

    def normalize(self, x) -> np.ndarray:
        """Affine map of raw coordinates onto the unit box."""
        lo, hi = self.domain[:, 0], self.domain[:, 1]
        return (np.asarray(x, dtype=float) - lo) / (hi - lo)

    def normalized(self) -> np.ndarray:
        return self.unit

    def with_values(self, values) -> "TrainingSet":
        return TrainingSet(self.locations, values, self.domain, self.unit)

    def location_hash(self) -> str:
        """SHA-256 of raw and unit-box locations plus the domain (values excluded)."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.locations).tobytes())
        h.update(np.ascontiguousarray(self.domain).tobytes())
        h.update(np.ascontiguousarray(self.unit).tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class Prediction:
    value: float
    weights: np.ndarray
    extrapolated: bool


@dataclass(frozen=True, eq=False)
class KrigingModel:
    """A fitted ordinary-kriging predictor. Build it with :func:`fit`."""

    training: TrainingSet
    params: KernelParams
    system: CorrelationSystem
    r_inv_ones: np.ndarray
    ones_rinv_ones: float

    @property
    def domain(self) -> np.ndarray:
        return self.training.domain

    @property
    def kappa(self) -> float:
        return self.system.kappa

    def _cross(self, queries: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        q = np.asarray(queries, dtype=float)
        if q.ndim == 1:
            q = q[None, :]
        if q.ndim != 2 or q.shape[1] != self.training.k:
            raise InvalidArgumentError(f"queries must have {self.training.k} components")
        if not np.all(np.isfinite(q)):
            raise InvalidArgumentError("queries must be finite")
        u = self.training.normalize(q)
        r = correlation_matrix(self.training.normalized(), u, self.params)
        outside = np.any((u < 0) | (u > 1), axis=1)
        return r, outside

    def weights_many(self, queries) -> np.ndarray:
        """Kriging weights for a batch of raw queries, shape (n, m)."""
        r, _ = self._cross(queries)
        rinv_r = self.system.solve(r)
        correction = (1.0 - self.r_inv_ones @ r) / self.ones_rinv_ones
        return rinv_r + np.outer(self.r_inv_ones, correction)

    def weights(self, query) -> np.ndarray:
        """Weights ``lambda`` of a single raw query; they sum to one."""
        return self.weights_many(np.atleast_1d(query)[None, :])[:, 0]

    def predict_values(self, queries) -> np.ndarray:
        """Vectorized predictions at raw query locations."""
        return self.training.values @ self.weights_many(queries)

    def predict(self, query) -> Prediction:
        q = np.atleast_1d(np.asarray(query, dtype=float))
        lam = self.weights_many(q[None, :])[:, 0]
        _, outside = self._cross(q[None, :])
        return Prediction(value=float(self.training.values @ lam), weights=lam, extrapolated=bool(outside[0]))

    def to_dict(self) -> dict:
        return {
            "format": "condkrig-model",
            "version": __version__,
            "domain": self.training.domain.tolist(),
            "locations": self.training.locations.tolist(),
            "unit_locations": self.training.unit.tolist(),
            "values": self.training.values.tolist(),
            "theta": self.params.theta.tolist(),
            "p": self.params.p.tolist(),
            "kappa": self.kappa,
            "condition_norm": CONDITION_NORM,
            "solver": self.system.method,
        }

    def save(self, path) -> None:
        from .io import write_json

        write_json(path, self.to_dict())


def fit(training: TrainingSet, params: KernelParams) -> KrigingModel:
    """Factorize the self-correlation matrix of ``training`` under ``params``.

    Raises:
        ModelSingularError: the matrix cannot be factorized.
    """
    if params.k != training.k:
        raise InvalidArgumentError(f"kernel has {params.k} dimensions, data has {training.k}")
    try:
        system = build_self_correlation(training.normalized(), params)
    except FactorizationError as exc:
        raise ModelSingularError(str(exc), kappa=float("inf")) from exc
    r_inv_ones = system.solve(np.ones(training.n))
    denom = float(np.sum(r_inv_ones))
    if not np.isfinite(denom) or denom == 0.0:
        raise ModelSingularError(f"1'R^-1 1 = {denom}; weight system is singular", kappa=system.kappa)
    r_inv_ones.setflags(write=False)
    return KrigingModel(training, params, system, r_inv_ones, denom)


def model_from_dict(doc: dict, source: str = "<model>") -> KrigingModel:
    """Rebuild a model from :meth:`KrigingModel.to_dict` output by refitting."""
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: model document must be a JSON object")
    for field in ("domain", "locations", "values", "theta"):
        if field not in doc:
            raise ParseError(f"{source}: missing field '{field}'")
    try:
        training = TrainingSet(doc["locations"], doc["values"], doc["domain"], doc.get("unit_locations"))
    except (InvalidArgumentError, TypeError, ValueError) as exc:
        raise ParseError(f"{source}: field 'locations'/'values'/'domain': {exc}") from exc
    try:
        params = KernelParams(doc["theta"], doc.get("p"))
    except (InvalidArgumentError, TypeError, ValueError) as exc:
        raise ParseError(f"{source}: field 'theta'/'p': {exc}") from exc
    return fit(training, params)


def load_model(path) -> KrigingModel:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return model_from_dict(doc, str(path))


def fit_points(locations: Sequence, values: Sequence, domain: Sequence, theta) -> KrigingModel:
    """Convenience wrapper: build the training set and fit in one call."""
    training = TrainingSet(locations, values, domain)
    return fit(training, KernelParams(np.broadcast_to(np.asarray(theta, float), (training.k,))))
