"""Truncated geodesic series and the squared-distance Hessian.

The three series below expand compositions of exponential and logarithm maps
around a development point, in terms of the curvature oracle at that point.
Inputs are coordinate vectors in a common orthonormal tangent frame.  Each
series is exact up to the truncation order recorded in ``TRUNCATION_ORDER``
(order counted jointly in both vector arguments); on space forms, where the
covariant derivative of the curvature vanishes, the squared-distance series
gains one extra order because its first neglected term carries ``grad R``.
"""

from __future__ import annotations

import numpy as np

from .curvature import CurvatureOracle
from .exceptions import DomainError, InvalidInputError

__all__ = [
    "double_exp_series",
    "neighbor_log_series",
    "squared_distance_series",
    "hessian_weight",
    "sqdist_hessian",
    "fit_loglog_slope",
    "TRUNCATION_ORDER",
]

# First neglected polynomial order of each series (space forms raise the
# squared-distance residual to 6 since its order-5 term is a grad-R term).
TRUNCATION_ORDER = {
    "double_exp": 5,
    "neighbor_log": 5,
    "squared_distance": 6,
    "recentered_tangent_mean": 5,
    "log_mean": 5,
}


def _coord_pair(oracle, a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != (oracle.dim,) or b.shape != (oracle.dim,):
        raise InvalidInputError(
            f"expected coordinate vectors of length {oracle.dim}")
    return a, b


def double_exp_series(oracle: CurvatureOracle, v, u) -> np.ndarray:
    """Series for the log of a geodesic shot from ``exp(v)`` along the
    transported vector ``u``, expressed back at the development point."""
    v, u = _coord_pair(oracle, v, u)
    out = v + u + oracle.r(u, v, v) / 6.0 + oracle.r(u, v, u) / 3.0
    if oracle.has_grad:
        out = out + oracle.grad_r(v, u, v, 2.0 * v + 5.0 * u) / 24.0
        out = out + oracle.grad_r(u, u, v, v + 2.0 * u) / 24.0
    return out


def neighbor_log_series(oracle: CurvatureOracle, v, w) -> np.ndarray:
    """Series for the log of the fixed point ``exp(w)`` taken at the moved
    base point ``exp(v)``, parallel-transported back to the development
    point."""
    v, w = _coord_pair(oracle, v, w)
    out = w - v + oracle.r(w, v, v - 2.0 * w) / 6.0
    if oracle.has_grad:
        out = out + oracle.grad_r(v, w, v, 2.0 * v - 3.0 * w) / 24.0
        out = out + oracle.grad_r(w, w, v, v - 2.0 * w) / 24.0
    return out


def squared_distance_series(oracle: CurvatureOracle, v, w) -> float:
    """Series for the squared geodesic distance between ``exp(v)`` and
    ``exp(w)``."""
    v, w = _coord_pair(oracle, v, w)
    diff = w - v
    out = float(np.dot(diff, diff)) + float(np.dot(oracle.r(w, v, w), v)) / 3.0
    if oracle.has_grad:
        out += float(np.dot(oracle.grad_r(v + w, w, v, w), v)) / 12.0
    return out


# -- squared-distance Hessian on space forms --------------------------------

_H_SERIES_CUTOFF = 1e-8


def hessian_weight(t: float) -> float:
    """Transverse eigenvalue of half the squared-distance Hessian at
    curvature-times-squared-distance ``t``.

    Equals ``sqrt(t) * cot(sqrt(t))`` for ``t > 0`` and its analytic
    continuation ``sqrt(-t) * coth(sqrt(-t))`` for ``t < 0``; near zero the
    series ``1 - t/3 - t^2/45`` keeps the evaluation smooth.  The function is
    only meaningful below the first cotangent pole.
    """
    t = float(t)
    if not np.isfinite(t):
        raise InvalidInputError(f"t must be finite, got {t}")
    if t >= np.pi**2:
        raise DomainError(f"sqrt(t) cot(sqrt(t)) undefined for t >= pi^2 (t={t})")
    if abs(t) < _H_SERIES_CUTOFF:
        return 1.0 - t / 3.0 - t**2 / 45.0
    if t > 0:
        s = np.sqrt(t)
        return float(s / np.tan(s))
    s = np.sqrt(-t)
    return float(s / np.tanh(s))


def sqdist_hessian(kappa: float, logvec) -> np.ndarray:
    """Hessian of ``dist(., y)^2`` on a space form of curvature ``kappa``,
    in an orthonormal frame at the evaluation point, given ``logvec`` the log
    of ``y`` there.

    Eigenstructure: ``2`` along the radial direction, ``2 h(kappa theta^2)``
    on its orthogonal complement, ``theta = |logvec|``.  At ``theta = 0`` the
    flat limit ``2 Id`` is returned.
    """
    logvec = np.asarray(logvec, dtype=float)
    if logvec.ndim != 1:
        raise InvalidInputError("logvec must be a coordinate vector")
    if not np.all(np.isfinite(logvec)):
        raise InvalidInputError("non-finite coordinates")
    d = logvec.shape[0]
    theta = float(np.linalg.norm(logvec))
    if theta == 0.0:
        return 2.0 * np.eye(d)
    h = hessian_weight(kappa * theta**2)
    u = logvec / theta
    proj = np.outer(u, u)
    return 2.0 * (proj + h * (np.eye(d) - proj))


# -- convergence-order fitting -----------------------------------------------

def fit_loglog_slope(scales, residuals, *, noise_floor: float = 1e-12):
    """Least-squares slope of ``log(residual)`` against ``log(scale)``.

    Points at or below ``noise_floor`` are discarded (double-precision
    rounding would flatten the fit); at least two points must survive.
    Returns ``(slope, n_points_used)``.
    """
    scales = np.asarray(scales, dtype=float)
    residuals = np.asarray(residuals, dtype=float)
    if scales.shape != residuals.shape or scales.ndim != 1:
        raise InvalidInputError("scales and residuals must be 1-d and aligned")
    keep = residuals > noise_floor
    if np.count_nonzero(keep) < 2:
        raise InvalidInputError(
            "not enough residuals above the noise floor to fit a slope")
    slope = np.polyfit(np.log(scales[keep]), np.log(residuals[keep]), 1)[0]
    return float(slope), int(np.count_nonzero(keep))
