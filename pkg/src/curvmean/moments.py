"""Moment tensors and curvature corrections to the sample Frechet mean.

Moment tensors are dense, fully symmetric ``numpy`` arrays of shape
``(d,) * k`` holding the averaged k-fold tensor powers of tangent logs in an
orthonormal frame at a basepoint.  The operations below contract them with a
:class:`~curvmean.curvature.CurvatureOracle` to evaluate

* the series for the recentered tangent mean map and for the vector pointing
  to the barycenter,
* expectations of products of empirical moments over an IID n-sample,
* the small-sample bias and covariance of the empirical mean,
* the expected Hessian of the squared distance and the asymptotic (CLT)
  covariance it induces,
* scalar convergence-modulation factors for isotropic distributions on
  space forms.

Sample indices and tensor indices never share a loop: sample sums happen in
:func:`empirical_moment` and in the product-expectation coefficients, tensor
sums in ``einsum`` contractions over dense components.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement, permutations

import numpy as np

from .curvature import CurvatureOracle
from .exceptions import (
    DegenerateHessianError,
    DivergenceError,
    InvalidInputError,
)
from .series import hessian_weight

__all__ = [
    "empirical_moment",
    "empirical_moments",
    "check_moment",
    "recentered_tangent_mean_series",
    "log_mean_series",
    "product_moment_expectation",
    "expected_log_mean_series",
    "empirical_mean_bias",
    "empirical_mean_covariance",
    "empirical_mean_second_moment_field",
    "EmpiricalMeanMoments",
    "empirical_mean_moments",
    "expected_sqdist_hessian",
    "clt_mean_covariance",
    "modulation_nonasymptotic",
    "modulation_asymptotic",
    "modulation_limit",
]

MAX_MOMENT_ORDER = 4


def empirical_moment(logs, k: int) -> np.ndarray:
    """Dense order-``k`` moment tensor of tangent log coordinates.

    ``logs`` has shape ``(n, d)``; the result averages the k-fold outer
    powers of the rows and is symmetric by construction.  ``k = 0`` returns
    the scalar 1.
    """
    logs = np.atleast_2d(np.asarray(logs, dtype=float))
    if logs.size == 0:
        raise InvalidInputError("empty sample has no moments")
    if not np.all(np.isfinite(logs)):
        raise InvalidInputError("non-finite log coordinates")
    if k < 0 or k > MAX_MOMENT_ORDER:
        raise InvalidInputError(
            f"moment order must be in 0..{MAX_MOMENT_ORDER}, got {k}")
    n, d = logs.shape
    if k == 0:
        return np.array(1.0)
    if k == 1:
        return logs.mean(axis=0)
    # One value per sorted index combination, written to every permutation:
    # permutation invariance then holds by construction, not up to rounding.
    out = np.empty((d,) * k)
    for combo in combinations_with_replacement(range(d), k):
        value = logs[:, combo].prod(axis=1).mean()
        for perm in set(permutations(combo)):
            out[perm] = value
    return out


def empirical_moments(logs, max_order: int = 3) -> dict:
    """Moments of orders ``0..max_order`` as a dict keyed by order."""
    return {k: empirical_moment(logs, k) for k in range(max_order + 1)}


def check_moment(tensor, order: int, dim: int | None = None,
                 atol: float | None = None) -> np.ndarray:
    """Validate a dense symmetric moment tensor and return it as an array.

    The default symmetry tolerance allows last-ulp noise relative to the
    largest entry, so tensors assembled through BLAS reductions pass.
    """
    t = np.asarray(tensor, dtype=float)
    if atol is None:
        atol = 1e-12 * max(1.0, float(np.max(np.abs(t))) if t.size else 1.0)
    if order == 0:
        if t.shape != () or not np.isclose(float(t), 1.0):
            raise InvalidInputError("order-0 moment must be the scalar 1")
        return t
    if t.ndim != order:
        raise InvalidInputError(f"expected an order-{order} tensor")
    if len(set(t.shape)) != 1:
        raise InvalidInputError("moment tensor axes must share one dimension")
    if dim is not None and t.shape[0] != dim:
        raise InvalidInputError(f"expected dimension {dim}, got {t.shape[0]}")
    if not np.all(np.isfinite(t)):
        raise InvalidInputError("non-finite moment entries")
    if order > 1:
        # spot-check symmetry on one transposition per adjacent axis pair
        for ax in range(order - 1):
            perm = list(range(order))
            perm[ax], perm[ax + 1] = perm[ax + 1], perm[ax]
            if not np.allclose(t, np.transpose(t, perm), atol=atol, rtol=0.0):
                raise InvalidInputError("moment tensor is not symmetric")
    return t


def _components(oracle: CurvatureOracle, m_ref):
    d = np.asarray(m_ref).shape[0]
    if oracle.dim != d:
        raise InvalidInputError(
            f"oracle dimension {oracle.dim} does not match moments ({d})")
    return oracle.r_components(), oracle.grad_r_components()


# -- series for the mean location --------------------------------------------

def recentered_tangent_mean_series(oracle: CurvatureOracle, v, m1, m2,
                                   m3) -> np.ndarray:
    """Series for the tangent mean of logs taken at ``exp(v)`` and
    transported back to the development point, in terms of the moments
    ``m1..m3`` at that point.  Zeros of this map locate exponential
    barycenters."""
    v = np.asarray(v, dtype=float)
    m1 = check_moment(m1, 1)
    m2 = check_moment(m2, 2, dim=m1.shape[0])
    m3 = check_moment(m3, 3, dim=m1.shape[0])
    if v.shape != m1.shape:
        raise InvalidInputError("v must share the moments' frame")
    rt, gt = _components(oracle, m1)
    out = m1 - v
    out = out + np.einsum("abcd,c,d,b->a", rt, m1, v, v) / 6.0
    out = out - np.einsum("abcd,bc,d->a", rt, m2, v) / 3.0
    if oracle.has_grad:
        out = out + np.einsum("abcde,e,c,d,b->a", gt, v, m1, v, v) / 12.0
        out = out - np.einsum("abcde,e,bc,d->a", gt, v, m2, v) / 8.0
        out = out + np.einsum("abcde,ce,d,b->a", gt, m2, v, v) / 24.0
        out = out - np.einsum("abcde,bce,d->a", gt, m3, v) / 12.0
    return out


def log_mean_series(oracle: CurvatureOracle, m1, m2, m3) -> np.ndarray:
    """Series for the tangent vector pointing from the basepoint to the
    barycenter of the distribution with moments ``m1..m3`` there."""
    m1 = check_moment(m1, 1)
    m2 = check_moment(m2, 2, dim=m1.shape[0])
    m3 = check_moment(m3, 3, dim=m1.shape[0])
    rt, gt = _components(oracle, m1)
    out = m1 - np.einsum("abcd,bc,d->a", rt, m2, m1) / 3.0
    if oracle.has_grad:
        out = out + np.einsum("abcde,ce,b,d->a", gt, m2, m1, m1) / 24.0
        out = out - np.einsum("abcde,e,bc,d->a", gt, m1, m2, m1) / 8.0
        out = out - np.einsum("abcde,d,bce->a", gt, m1, m3) / 12.0
    return out


# -- expectations of products of empirical moments ---------------------------

def _outer(*tensors):
    out = np.asarray(tensors[0], dtype=float)
    for t in tensors[1:]:
        out = np.multiply.outer(out, np.asarray(t, dtype=float))
    return out


def _get_moment(moments, k: int, dim: int | None):
    try:
        t = moments[k]
    except (KeyError, IndexError, TypeError) as exc:
        raise InvalidInputError(f"moment of order {k} is required") from exc
    return check_moment(t, k, dim=dim)


def product_moment_expectation(orders, n: int, moments) -> np.ndarray:
    """Expected tensor product of empirical moments of an IID n-sample.

    ``orders`` lists two or three positive moment orders (total at most 4);
    ``moments`` maps each needed order to the population moment tensor.  For
    a pair ``(p, q)`` the expectation splits over equal/distinct sample
    indices::

        (1 - 1/n) M_p (x) M_q  +  (1/n) M_{p+q}

    and for a triple ``(p, q, r)`` over the five index patterns, the three
    partial coincidences each weighted ``(n-1)/n^2``.  The middle coincidence
    pairs the first ``p`` and last ``r`` axes of ``M_{p+r}`` around the
    ``M_q`` block (the split is immaterial for symmetric tensors).
    """
    orders = tuple(int(p) for p in orders)
    if len(orders) not in (2, 3):
        raise InvalidInputError("only pairs and triples are supported")
    if any(p < 1 for p in orders):
        raise InvalidInputError("moment orders must be positive")
    if sum(orders) > MAX_MOMENT_ORDER:
        raise InvalidInputError(
            f"total order {sum(orders)} exceeds {MAX_MOMENT_ORDER}")
    if n < 1:
        raise InvalidInputError(f"sample size must be >= 1, got {n}")
    n = float(n)
    dim = np.asarray(moments[orders[0]]).shape[0]

    if len(orders) == 2:
        p, q = orders
        mp = _get_moment(moments, p, dim)
        mq = _get_moment(moments, q, dim)
        mpq = _get_moment(moments, p + q, dim)
        return (n - 1.0) / n * _outer(mp, mq) + mpq / n

    p, q, r = orders
    mp = _get_moment(moments, p, dim)
    mq = _get_moment(moments, q, dim)
    mr = _get_moment(moments, r, dim)
    out = (n - 1.0) * (n - 2.0) / n**2 * _outer(mp, mq, mr)
    out = out + _get_moment(moments, p + q + r, dim) / n**2
    pair_coeff = (n - 1.0) / n**2
    out = out + pair_coeff * _outer(_get_moment(moments, p + q, dim), mr)
    out = out + pair_coeff * _outer(mp, _get_moment(moments, q + r, dim))
    middle = _outer(_get_moment(moments, p + r, dim), mq)
    # (i_1..i_p, k_1..k_r, j_1..j_q) -> (i_1..i_p, j_1..j_q, k_1..k_r)
    middle = np.moveaxis(middle, range(p, p + r), range(p + q, p + q + r))
    return out + pair_coeff * middle


# -- first and second moments of the empirical mean --------------------------

def expected_log_mean_series(oracle: CurvatureOracle, m1, m2, m3,
                             n: int) -> np.ndarray:
    """Expected tangent vector from the basepoint to the empirical mean of
    an IID n-sample, with population moments ``m1..m3`` at the basepoint."""
    if n < 1:
        raise InvalidInputError(f"sample size must be >= 1, got {n}")
    m1 = check_moment(m1, 1)
    m2 = check_moment(m2, 2, dim=m1.shape[0])
    m3 = check_moment(m3, 3, dim=m1.shape[0])
    rt, gt = _components(oracle, m1)
    n = float(n)
    out = m1 - (n - 1.0) / (3.0 * n) * np.einsum("abcd,bc,d->a", rt, m2, m1)
    if oracle.has_grad:
        c_distinct = (n - 1.0) * (n - 2.0) / (24.0 * n**2)
        out = out + c_distinct * (
            np.einsum("abcde,ce,b,d->a", gt, m2, m1, m1)
            - 3.0 * np.einsum("abcde,e,bc,d->a", gt, m1, m2, m1))
        c_pair = (n - 1.0) / (12.0 * n**2)
        out = out + c_pair * (
            2.0 * np.einsum("abcde,ec,db->a", gt, m2, m2)
            - (1.0 + n) * np.einsum("abcde,bce,d->a", gt, m3, m1))
    return out


def empirical_mean_bias(oracle: CurvatureOracle, m2, n: int) -> np.ndarray:
    """Bias of the empirical mean at the population mean: the curvature
    gradient contracted twice with the covariance, damped by ``1/n``."""
    if n < 1:
        raise InvalidInputError(f"sample size must be >= 1, got {n}")
    m2 = check_moment(m2, 2)
    _, gt = _components(oracle, m2)
    coeff = (1.0 - 1.0 / n) / (6.0 * n)
    return coeff * np.einsum("acdeb,ce,bd->a", gt, m2, m2)


def _covariance_curvature(rt, m2):
    """Symmetric correction ``M2^cd (M2^ae R^b_cde + R^a_cde M2^be)``."""
    half = np.einsum("acde,cd,be->ab", rt, m2, m2)
    return half + half.T


def empirical_mean_covariance(oracle: CurvatureOracle, m2,
                              n: int) -> np.ndarray:
    """Covariance of the empirical mean at the population mean.

    The Euclidean ``M2 / n`` law is corrected by the covariance-curvature
    contraction, scaled by ``(1 - 1/n)``; a single sample is returned
    unmodulated.
    """
    if n < 1:
        raise InvalidInputError(f"sample size must be >= 1, got {n}")
    m2 = check_moment(m2, 2)
    rt, _ = _components(oracle, m2)
    corr = _covariance_curvature(rt, m2)
    out = (m2 - (1.0 - 1.0 / n) / 3.0 * corr) / n
    return (out + out.T) / 2.0


def empirical_mean_second_moment_field(oracle: CurvatureOracle, m1, m2, m3,
                                       m4, n: int) -> np.ndarray:
    """Expected squared tangent location of the empirical mean at a general
    basepoint (not necessarily the population mean).

    Experimental: assembled directly from the product-of-empirical-moments
    rules applied to the truncated square of the mean-location series, and
    validated only against exhaustive enumeration.  Requires moments up to
    order 4.  Reduces to :func:`empirical_mean_covariance` when ``m1 == 0``.
    """
    m1 = check_moment(m1, 1)
    dim = m1.shape[0]
    moments = {1: m1, 2: check_moment(m2, 2, dim=dim),
               3: check_moment(m3, 3, dim=dim),
               4: check_moment(m4, 4, dim=dim)}
    rt, _ = _components(oracle, m1)
    e11 = product_moment_expectation((1, 1), n, moments)
    # E[X1 (x) (R(., X1) . : X2)] via E[X1 (x) X2 (x) X1]
    e121 = product_moment_expectation((1, 2, 1), n, moments)
    cross = np.einsum("ebcd,abcd->ae", rt, e121)
    out = e11 - (cross + cross.T) / 3.0
    return (out + out.T) / 2.0


@dataclass(frozen=True)
class EmpiricalMeanMoments:
    """First two moments of the empirical mean at the population mean."""

    bias: np.ndarray
    covariance: np.ndarray
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError("n must be >= 1")
        cov = np.asarray(self.covariance, dtype=float)
        if not np.allclose(cov, cov.T, atol=1e-14, rtol=0.0):
            raise InvalidInputError("covariance must be symmetric")


def empirical_mean_moments(oracle: CurvatureOracle, m2,
                           n: int) -> EmpiricalMeanMoments:
    return EmpiricalMeanMoments(
        bias=empirical_mean_bias(oracle, m2, n),
        covariance=empirical_mean_covariance(oracle, m2, n),
        n=int(n),
    )


# -- asymptotic (CLT) covariance ----------------------------------------------

def expected_sqdist_hessian(oracle: CurvatureOracle, m2, m3) -> np.ndarray:
    """Expectation of the squared-distance Hessian at the mean, to second
    order in the concentration: ``2 (Id + R:M2 / 3 + grad R:M3 / 12)``."""
    m2 = check_moment(m2, 2)
    m3 = check_moment(m3, 3, dim=m2.shape[0])
    rt, gt = _components(oracle, m2)
    out = np.eye(m2.shape[0]) + np.einsum("adcb,dc->ab", rt, m2) / 3.0
    if oracle.has_grad:
        out = out + np.einsum("adcbe,dce->ab", gt, m3) / 12.0
    return 2.0 * out


def clt_mean_covariance(m2, hbar) -> np.ndarray:
    """Asymptotic covariance ``4 Hbar^-1 M2 Hbar^-1`` of the rescaled
    empirical mean, given the expected squared-distance Hessian ``hbar``."""
    m2 = check_moment(m2, 2)
    hbar = np.asarray(hbar, dtype=float)
    if hbar.shape != m2.shape:
        raise InvalidInputError("hbar must match the covariance dimension")
    if np.linalg.cond(hbar) > 1e12:
        raise DegenerateHessianError(
            "expected Hessian is numerically singular; the CLT covariance "
            "is undefined")
    hinv = np.linalg.inv(hbar)
    out = 4.0 * hinv @ m2 @ hinv
    return (out + out.T) / 2.0


# -- scalar modulation factors ------------------------------------------------

def modulation_nonasymptotic(kappa: float, sigma2: float, dim: int,
                             n: int) -> float:
    """Small-sample modulation of the empirical-mean variance for an
    isotropic distribution of variance ``sigma2`` on a space form:
    ``1 + (2/3) kappa sigma2 (1 - 1/dim)(1 - 1/n)``."""
    if sigma2 < 0:
        raise InvalidInputError(f"variance must be >= 0, got {sigma2}")
    if dim < 1:
        raise InvalidInputError(f"dimension must be >= 1, got {dim}")
    if n < 1:
        raise InvalidInputError(f"sample size must be >= 1, got {n}")
    return 1.0 + (2.0 / 3.0) * kappa * sigma2 * (1.0 - 1.0 / dim) * (1.0 - 1.0 / n)


def modulation_asymptotic(h_bar: float, dim: int) -> float:
    """Large-sample modulation ``(1/dim + (1 - 1/dim) h_bar)^-2``, with
    ``h_bar`` the expected transverse Hessian weight of the distribution.
    For the uniform geodesic sphere of radius ``theta`` this is
    ``hessian_weight(kappa * theta**2)``."""
    if dim < 1:
        raise InvalidInputError(f"dimension must be >= 1, got {dim}")
    gamma = 1.0 / dim + (1.0 - 1.0 / dim) * float(h_bar)
    if abs(gamma) < 1e-12 * max(1.0, abs(h_bar)):
        raise DivergenceError(
            "expected Hessian weight vanishes: modulation diverges at the "
            "concentration boundary")
    return gamma ** -2


def modulation_limit(t: float) -> float:
    """Large-dimension, large-sample limit ``tan(sqrt(t))^2 / t`` of the
    modulation factor, as a function of curvature times squared radius."""
    t = float(t)
    if t >= np.pi**2 / 4.0:
        raise DivergenceError(
            f"modulation diverges for t >= pi^2/4 (t={t})")
    return hessian_weight(t) ** -2
