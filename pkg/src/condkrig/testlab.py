"""Analytic 2D benchmark functions, sampling, grids and error metrics."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .errors import InvalidArgumentError
from .kriging import DUPLICATE_TOL, KrigingModel, TrainingSet
from .io import write_with_sidecar


def griewank(x):
    x1, x2 = x[..., 0], x[..., 1]
    return (x1**2 + x2**2) / 4000.0 - np.cos(x1) * np.cos(x2 / np.sqrt(2.0)) + 1.0


def sasena(x):
    x1, x2 = x[..., 0], x[..., 1]
    return (
        2.0
        + 0.01 * (x2 - x1**2) ** 2
        + (1.0 - x1) ** 2
        + 2.0 * (2.0 - x2) ** 2
        + 7.0 * np.sin(0.5 * x1) * np.sin(0.7 * x1 * x2)
    )


def franke(x):
    # second term uses (9 x2 + 1) / 10 unsquared, as in the usual Franke form
    x1, x2 = x[..., 0], x[..., 1]
    return (
        0.75 * np.exp(-((9 * x1 - 2) ** 2) / 4 - (9 * x2 - 2) ** 2 / 4)
        + 0.75 * np.exp(-((9 * x1 + 1) ** 2) / 49 - (9 * x2 + 1) / 10)
        + 0.5 * np.exp(-((9 * x1 - 7) ** 2) / 4 - (9 * x2 - 3) ** 2 / 4)
        - 0.2 * np.exp(-((9 * x1 - 4) ** 2) - (9 * x2 - 7) ** 2)
    )


_G_A = np.array([(i - 2) / 2 for i in (1, 2)])


def gfunction(x):
    # a_i = (i - 2) / 2 gives a = (-0.5, 0); no clamping of the negative factor
    return np.prod((np.abs(4 * x - 2) + _G_A) / (1 + _G_A), axis=-1)


def irregular(x):
    x1, x2 = x[..., 0], x[..., 1]
    return (
        np.exp(x1) / 5
        - x2 / 5
        + x2**6 / 3
        + 4 * x2**4
        - 4 * x2**2
        + 0.7 * x1**2
        + x1**4
        + 3 / (4 * x1**2 + 4 * x2**2 + 1)
    )


def cosin2(x):
    x1, x2 = x[..., 0], x[..., 1]
    return np.cos(10 * x1) + np.sin(10 * x2) + x1 * x2


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A named benchmark with its closed domain box."""

    __test__ = False  # not a pytest class

    name: str
    domain: Tuple[Tuple[float, float], ...]
    func: Callable[[np.ndarray], np.ndarray]

    @property
    def bounds(self) -> np.ndarray:
        return np.array(self.domain, dtype=float)

    def values(self, x) -> np.ndarray:
        """Vectorized evaluation over the last axis; no domain check."""
        return self.func(np.asarray(x, dtype=float))

    def __call__(self, x) -> float:
        return evaluate(self, x)


FUNCTIONS: Dict[str, TestFunction] = {
    f.name: f
    for f in (
        TestFunction("griewank", ((-5.0, 5.0), (-5.0, 5.0)), griewank),
        TestFunction("sasena", ((0.0, 5.0), (0.0, 5.0)), sasena),
        TestFunction("franke", ((0.0, 1.0), (0.0, 1.0)), franke),
        TestFunction("gfunction", ((0.0, 1.0), (0.0, 1.0)), gfunction),
        TestFunction("irregular", ((-1.0, 1.0), (-1.0, 1.0)), irregular),
        TestFunction("cosin2", ((0.0, 1.0), (0.0, 1.0)), cosin2),
    )
}


def get_function(name: str) -> TestFunction:
    try:
        return FUNCTIONS[name.lower()]
    except KeyError:
        raise InvalidArgumentError(f"unknown test function {name!r}; choose from {sorted(FUNCTIONS)}") from None


def evaluate(fn: TestFunction, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (2,) or not np.all(np.isfinite(x)):
        raise InvalidArgumentError("expected a finite 2-vector")
    b = fn.bounds
    if np.any(x < b[:, 0]) or np.any(x > b[:, 1]):
        raise InvalidArgumentError(f"{x.tolist()} lies outside the {fn.name} domain {fn.domain}")
    return float(fn.func(x))


def sample_random(fn: TestFunction, n: int, rng_seed: int) -> TrainingSet:
    """``n`` i.i.d. uniform points strictly inside the domain box.

    Points on the boundary or within the duplicate tolerance of an earlier
    point are redrawn.
    """
    if n < 1:
        raise InvalidArgumentError("n must be >= 1")
    rng = np.random.default_rng(rng_seed)
    b = fn.bounds
    u = rng.uniform(size=(n, 2))
    while True:
        bad = np.any((u <= 0) | (u >= 1), axis=1)
        gap = np.max(np.abs(u[:, None, :] - u[None, :, :]), axis=-1)
        bad |= np.any(np.triu(gap <= DUPLICATE_TOL, k=1), axis=0)
        if not bad.any():
            break
        u[bad] = rng.uniform(size=(int(bad.sum()), 2))
    ts = TrainingSet.from_unit(u, np.zeros(n), b)
    return ts.with_values(fn.values(ts.locations))


def sample_lattice(fn: TestFunction, m: int) -> TrainingSet:
    """Regular ``m x m`` lattice including the corners."""
    ts = TrainingSet.from_unit(lattice([[0, 1], [0, 1]], (m, m)), np.zeros(m * m), fn.bounds)
    return ts.with_values(fn.values(ts.locations))


@dataclass(frozen=True, eq=False)
class GridField:
    """Values on a uniform lattice; ``values[i, j]`` sits at ``(x1[i], x2[j])``."""

    domain: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or min(v.shape) < 2:
            raise InvalidArgumentError("a grid field needs at least 2 nodes per axis")
        if not np.all(np.isfinite(v)):
            raise InvalidArgumentError("grid values must be finite")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "domain", np.asarray(self.domain, dtype=float))

    @property
    def resolution(self) -> Tuple[int, int]:
        return self.values.shape

    def axes(self):
        return [np.linspace(lo, hi, m) for (lo, hi), m in zip(self.domain, self.resolution)]

    def points(self) -> np.ndarray:
        """Lattice nodes in row-major order, shape (m1 * m2, 2)."""
        return lattice(self.domain, self.resolution)

    def __sub__(self, other: "GridField") -> "GridField":
        _check_compatible(self, other)
        return GridField(self.domain, self.values - other.values)

    def save(self, path, metadata: Optional[dict] = None) -> None:
        """Write ``x1,x2,value`` rows plus a JSON sidecar."""
        pts = self.points()
        meta = {"domain": self.domain.tolist(), "resolution": list(self.resolution)}
        meta.update(metadata or {})
        rows = ((float(p[0]), float(p[1]), float(v)) for p, v in zip(pts, self.values.ravel()))
        write_with_sidecar(path, ["x1", "x2", "value"], rows, meta)


def lattice(domain, resolution) -> np.ndarray:
    axes = [np.linspace(lo, hi, m) for (lo, hi), m in zip(np.asarray(domain, float), resolution)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 2)


def evaluate_grid(source, resolution=(101, 101), domain=None) -> GridField:
    """Sample a test function, a fitted model or a plain vectorized callable.

    ``domain`` defaults to the source's own domain; a plain callable needs
    it spelled out.
    """
    if isinstance(resolution, int):
        resolution = (resolution, resolution)
    if len(resolution) != 2 or min(resolution) < 2:
        raise InvalidArgumentError("resolution must be at least 2 per axis")
    if isinstance(source, KrigingModel):
        dom = source.domain if domain is None else domain
        f = source.predict_values
    elif isinstance(source, TestFunction):
        dom = source.bounds if domain is None else domain
        f = source.values
    else:
        if domain is None:
            raise InvalidArgumentError("a domain is required for a plain callable")
        dom, f = domain, source
    pts = lattice(dom, resolution)
    return GridField(dom, np.asarray(f(pts), dtype=float).reshape(resolution))


@dataclass(frozen=True)
class ErrorReport:
    rmse: float
    max_abs: float
    roughness: float
    difference: GridField

    def summary(self) -> dict:
        return {"rmse": self.rmse, "max_abs": self.max_abs, "roughness": self.roughness}


def roughness(values: np.ndarray) -> float:
    """Mean squared second difference along both lattice axes."""
    d1 = np.diff(values, n=2, axis=0).ravel()
    d2 = np.diff(values, n=2, axis=1).ravel()
    both = np.concatenate([d1, d2])
    return float(np.mean(both**2)) if both.size else 0.0


def _check_compatible(a: GridField, b: GridField) -> None:
    if a.resolution != b.resolution or not np.array_equal(a.domain, b.domain):
        raise InvalidArgumentError(f"grid mismatch: {a.resolution} vs {b.resolution}")


def error_report(truth: GridField, estimate: GridField) -> ErrorReport:
    diff = estimate - truth
    d = diff.values
    return ErrorReport(
        rmse=float(np.sqrt(np.mean(d**2))),
        max_abs=float(np.max(np.abs(d))),
        roughness=roughness(estimate.values),
        difference=diff,
    )
