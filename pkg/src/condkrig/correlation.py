"""Gaussian-family correlation kernel and the matrices built from it.

All coordinates handed to this module are expected in the normalized
design space ``[0, 1]^k``; mapping raw coordinates there is the job of
:class:`condkrig.kriging.TrainingSet`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from .errors import FactorizationError, InvalidArgumentError

#: Returned by :func:`condition_number` when positive definiteness is lost.
KAPPA_SENTINEL = float(np.finfo(float).max)
#: Name of the matrix norm behind every reported condition number.
CONDITION_NORM = "2-norm (symmetric eigendecomposition)"

SYMMETRY_RTOL = 1e-12


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class KernelParams:
    """Per-dimension length-scale weights ``theta`` and exponents ``p``.

    ``p`` defaults to 2 in every dimension; it is kept as a field so the
    exponent is visible in serialized models, but nothing in the package
    tunes it.
    """

    theta: np.ndarray
    p: Optional[np.ndarray] = None

    def __post_init__(self):
        theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        if theta.ndim != 1 or theta.size == 0:
            raise InvalidArgumentError("theta must be a non-empty vector")
        if not np.all(np.isfinite(theta)) or np.any(theta <= 0):
            raise InvalidArgumentError(f"theta must be finite and positive, got {theta}")
        p = np.full_like(theta, 2.0) if self.p is None else np.atleast_1d(np.asarray(self.p, dtype=float))
        if p.shape != theta.shape:
            raise InvalidArgumentError("p and theta must have the same length")
        if not np.all(np.isfinite(p)) or np.any(p <= 0) or np.any(p > 2):
            raise InvalidArgumentError(f"exponents must lie in (0, 2], got {p}")
        object.__setattr__(self, "theta", _frozen(theta))
        object.__setattr__(self, "p", _frozen(p))

    @property
    def k(self) -> int:
        return self.theta.size

    @classmethod
    def isotropic(cls, value: float, k: int) -> "KernelParams":
        return cls(np.full(k, float(value)))

    def __eq__(self, other):
        if not isinstance(other, KernelParams):
            return NotImplemented
        return np.array_equal(self.theta, other.theta) and np.array_equal(self.p, other.p)

    def __repr__(self):
        return f"KernelParams(theta={self.theta.tolist()}, p={self.p.tolist()})"


def correlate(h, params: KernelParams) -> float:
    """Correlation ``exp(-sum_j theta_j * h_j**p_j)`` for a single lag vector."""
    h = np.atleast_1d(np.asarray(h, dtype=float))
    if h.shape != params.theta.shape:
        raise InvalidArgumentError(f"lag has {h.size} components, kernel expects {params.k}")
    if not np.all(np.isfinite(h)):
        raise InvalidArgumentError("lag vector must be finite")
    if np.any(h < 0):
        raise InvalidArgumentError("lag components must be non-negative")
    return float(np.exp(-np.sum(params.theta * h ** params.p)))


def _check_points(points, k: int) -> np.ndarray:
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None] if k == 1 else x[None, :]
    if x.ndim != 2 or x.shape[0] < 1:
        raise InvalidArgumentError("points must be an (n, k) array with n >= 1")
    if x.shape[1] != k:
        raise InvalidArgumentError(f"points have {x.shape[1]} columns, kernel expects {k}")
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("points must be finite")
    return x


def correlation_matrix(xa: np.ndarray, xb: np.ndarray, params: KernelParams) -> np.ndarray:
    """Dense block of correlations between the rows of ``xa`` and ``xb``."""
    lag = np.abs(xa[:, None, :] - xb[None, :, :])
    return np.exp(-np.sum(params.theta * lag ** params.p, axis=-1))


def condition_number(R) -> float:
    """2-norm condition number of a symmetric matrix.

    Returns ``lambda_max / lambda_min``. A matrix whose smallest computed
    eigenvalue is not positive gets :data:`KAPPA_SENTINEL` instead, so an
    optimizer can rank it as the worst possible value without a special case.
    """
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise InvalidArgumentError("condition_number expects a square matrix")
    if not np.all(np.isfinite(R)):
        raise InvalidArgumentError("matrix entries must be finite")
    scale = np.max(np.abs(R)) if R.size else 0.0
    if np.max(np.abs(R - R.T), initial=0.0) > SYMMETRY_RTOL * scale:
        raise InvalidArgumentError("matrix is not symmetric")
    eig = linalg.eigvalsh(R)
    if eig[0] <= 0:
        return KAPPA_SENTINEL
    return float(eig[-1] / eig[0])


@dataclass(frozen=True, eq=False)
class CorrelationSystem:
    """Self-correlation matrix of a point set, factorized for repeated solves.

    The Cholesky factor is used when it exists. When it does not (the matrix
    has lost positive definiteness to rounding), the symmetric
    eigendecomposition is kept instead and solves go through it unchanged,
    without any diagonal shift.
    """

    R: np.ndarray
    kappa: float
    cholesky: Optional[Tuple[np.ndarray, bool]] = None
    eigen: Optional[Tuple[np.ndarray, np.ndarray]] = None

    @property
    def n(self) -> int:
        return self.R.shape[0]

    @property
    def method(self) -> str:
        return "cholesky" if self.cholesky is not None else "eigen"

    def solve(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if self.cholesky is not None:
            return linalg.cho_solve(self.cholesky, b, check_finite=False)
        w, V = self.eigen
        coef = V.T @ b
        coef = coef / (w[:, None] if coef.ndim == 2 else w)
        return V @ coef


def build_self_correlation(points, params: KernelParams) -> CorrelationSystem:
    """Assemble and factorize ``R_ij = correlate(|x_i - x_j|)``.

    Raises:
        FactorizationError: when two rows of ``points`` coincide or the
            eigendecomposition finds an exactly zero eigenvalue.
    """
    x = _check_points(points, params.k)
    n = x.shape[0]
    R = correlation_matrix(x, x, params)
    R.setflags(write=False)
    kappa = condition_number(R)

    if n > 1:
        # coincident points give identical rows: exactly singular
        same = np.all(x[:, None, :] == x[None, :, :], axis=-1)
        np.fill_diagonal(same, False)
        if same.any():
            i, j = np.argwhere(same)[0]
            raise FactorizationError(
                f"points {i} and {j} coincide; correlation matrix is singular", eigenvalue=0.0
            )

    try:
        cho = linalg.cho_factor(R, lower=True, check_finite=False)
        if not np.all(np.isfinite(cho[0])):
            raise linalg.LinAlgError("non-finite Cholesky factor")
        return CorrelationSystem(R=R, kappa=kappa, cholesky=cho)
    except linalg.LinAlgError as exc:
        pivot = _failed_pivot(exc)

    w, V = linalg.eigh(R)
    smallest = float(w[np.argmin(np.abs(w))])
    if smallest == 0.0 or not np.all(np.isfinite(w)):
        raise FactorizationError(
            f"correlation matrix is singular (eigenvalue {smallest:g})", eigenvalue=smallest, pivot=pivot
        )
    return CorrelationSystem(R=R, kappa=kappa, eigen=(w, V))


def _failed_pivot(exc: Exception) -> Optional[int]:
    # scipy reports "... leading minor of order N ..." / "... not positive definite"
    digits = [int(t) for t in str(exc).replace(".", " ").split() if t.isdigit()]
    return digits[0] if digits else None


def build_cross_correlation(points, query, params: KernelParams) -> Tuple[np.ndarray, bool]:
    """Correlations between every training point and one query.

    Returns:
        ``(r, extrapolated)`` where ``extrapolated`` is True when the query
        lies outside the unit box.
    """
    x = _check_points(points, params.k)
    q = np.atleast_1d(np.asarray(query, dtype=float))
    if q.shape != (params.k,):
        raise InvalidArgumentError(f"query must have {params.k} components")
    if not np.all(np.isfinite(q)):
        raise InvalidArgumentError("query must be finite")
    r = correlation_matrix(x, q[None, :], params)[:, 0]
    return r, bool(np.any(q < 0) or np.any(q > 1))
