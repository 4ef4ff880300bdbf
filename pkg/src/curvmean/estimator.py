"""Iterative Frechet-mean estimation on space forms.

The update is a tangent-space fixed-point step ``x <- exp_x(tau * g)`` with
``g`` the mean of the logs of the sample at the current iterate.  The step
``tau`` starts at 1 (plain Gauss-Newton), is halved whenever the variance
objective fails to decrease (the damping needed on hyperbolic spaces with
spread-out samples) and resets after every successful step.  Convergence is
certified on the gradient norm, i.e. on the exponential-barycenter equation
itself rather than on iterate displacement.

Two call styles are provided: the plain function :func:`frechet_mean`
returning a report, and the scikit-learn compatible :class:`FrechetMean`
estimator whose ``transform`` maps points to tangent coordinates at the
fitted mean.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import InvalidInputError
from .moments import empirical_moment
from .spaces import SpaceForm, kkc_check

__all__ = [
    "FrechetMeanReport",
    "frechet_mean",
    "variance_at",
    "covariance_at",
    "FrechetMean",
]


@dataclass(frozen=True)
class FrechetMeanReport:
    """Outcome of one mean estimation."""

    mean: np.ndarray
    iterations: int
    final_grad_norm: float
    variance_at_mean: float
    converged: bool


def _check_steps(max_iter, grad_tol, initial_step, step_shrink, min_step):
    if max_iter < 1:
        raise InvalidInputError(f"max_iter must be >= 1, got {max_iter}")
    if not grad_tol > 0:
        raise InvalidInputError(f"grad_tol must be > 0, got {grad_tol}")
    if not (0.0 < min_step <= initial_step <= 1.0):
        raise InvalidInputError(
            f"need 0 < min_step <= initial_step <= 1, got "
            f"min_step={min_step}, initial_step={initial_step}")
    if not (0.0 < step_shrink < 1.0):
        raise InvalidInputError(
            f"step_shrink must be in (0, 1), got {step_shrink}")


def _batch_mean(space: SpaceForm, samples, init, *, max_iter, grad_tol,
                initial_step, step_shrink, min_step):
    """Run the damped fixed-point iteration on a batch of samples.

    ``samples``: ``(B, n, ambient)``; ``init``: ``(B, ambient)``.  Returns
    ``(mean, iterations, grad_norm, variance, converged)`` arrays over the
    batch.  Trials are advanced in lock-step, so a batch of one reproduces
    the scalar iteration bit for bit.
    """
    samples = np.asarray(samples, dtype=float)
    batch, _, _ = samples.shape
    x = np.array(init, dtype=float, copy=True)
    tau = np.full(batch, initial_step)
    iters = np.zeros(batch, dtype=int)
    gnorm = np.full(batch, np.inf)
    converged = np.zeros(batch, dtype=bool)
    variance = (space.distance(x[:, None, :], samples) ** 2).mean(axis=1)

    active = np.arange(batch)
    for _ in range(max_iter):
        if active.size == 0:
            break
        xa = x[active]
        logs = space.log(xa[:, None, :], samples[active])
        g = logs.mean(axis=1)
        gn = space.norm(xa, g)
        gnorm[active] = gn
        done = gn <= grad_tol
        converged[active[done]] = True
        active = active[~done]
        if active.size == 0:
            break
        xa, g = xa[~done], g[~done]
        candidate = space.exp(xa, tau[active, None] * g)
        cand_var = (space.distance(candidate[:, None, :],
                                   samples[active]) ** 2).mean(axis=1)
        iters[active] += 1
        # Near the optimum the true decrease is O(grad^2), far below the
        # float resolution of the objective, so decrease is judged with a
        # relative rounding slack; genuine divergence (the case the damping
        # exists for) raises the objective by incomparably more than 1e-12.
        accept = cand_var <= variance[active] * (1.0 + 1e-12)
        idx_acc = active[accept]
        x[idx_acc] = candidate[accept]
        variance[idx_acc] = cand_var[accept]
        tau[idx_acc] = initial_step
        idx_rej = active[~accept]
        # a rejection at the step floor means damping is exhausted: the
        # trial stops here and is reported unconverged, never looped
        at_floor = tau[idx_rej] <= min_step
        tau[idx_rej] = np.maximum(tau[idx_rej] * step_shrink, min_step)
        active = np.concatenate([idx_acc, idx_rej[~at_floor]])
        active.sort()

    # refresh the gradient norm of trials stopped by max_iter / step floor
    rest = ~converged
    if np.any(rest):
        logs = space.log(x[rest][:, None, :], samples[rest])
        g = logs.mean(axis=1)
        gnorm[rest] = space.norm(x[rest], g)
        converged[rest] = gnorm[rest] <= grad_tol
    return x, iters, gnorm, variance, converged


def frechet_mean(space: SpaceForm, points, *, max_iter: int = 200,
                 grad_tol: float = 1e-10, initial_step: float = 1.0,
                 step_shrink: float = 0.5, min_step: float = 1e-4,
                 init="first", check_concentration: bool = True,
                 ) -> FrechetMeanReport:
    """Frechet mean of ``points`` (array of shape ``(n, ambient)``).

    ``init`` is either ``"first"`` (start from the first sample) or an
    explicit starting point.  Non-convergence is reported, not raised; a log
    across the sphere's cut locus still raises.  When the sample spread
    around the starting point violates the concentration conditions that
    guarantee a unique mean, a ``RuntimeWarning`` is emitted.
    """
    _check_steps(max_iter, grad_tol, initial_step, step_shrink, min_step)
    points = space.check_point(points)
    if points.ndim != 2 or points.shape[0] < 1:
        raise InvalidInputError("points must be a non-empty (n, ambient) array")
    if isinstance(init, str):
        if init != "first":
            raise InvalidInputError(f"unknown init {init!r}")
        start = points[0]
    else:
        start = space.check_point(init)
        if start.ndim != 1:
            raise InvalidInputError("init point must be a single point")
    if check_concentration:
        spread = float(np.max(space.distance(start, points)))
        report = kkc_check(spread, space.kappa, space.injectivity_radius)
        if not report.ok:
            warnings.warn(
                "sample spread violates the concentration conditions "
                f"({report.binding} bound, slack {report.slack:.3g}); the "
                "mean may not be unique", RuntimeWarning, stacklevel=2)
    mean, iters, gnorm, var, conv = _batch_mean(
        space, points[None], start[None].copy(), max_iter=max_iter,
        grad_tol=grad_tol, initial_step=initial_step,
        step_shrink=step_shrink, min_step=min_step)
    return FrechetMeanReport(
        mean=mean[0], iterations=int(iters[0]),
        final_grad_norm=float(gnorm[0]), variance_at_mean=float(var[0]),
        converged=bool(conv[0]))


def variance_at(space: SpaceForm, x, points) -> float:
    """Mean squared distance from ``x`` to the sample."""
    x = space.check_point(x)
    points = space.check_point(points)
    return float((space.distance(x, points) ** 2).mean())


def covariance_at(space: SpaceForm, x, points) -> np.ndarray:
    """Second moment of the sample logs at ``x`` in the deterministic
    tangent frame there; its trace is :func:`variance_at`."""
    x = space.check_point(x)
    points = space.check_point(points)
    basis = space.tangent_basis(x)
    logs = space.tangent_coords(x, space.log(x, points), basis)
    return empirical_moment(np.atleast_2d(logs), 2)


class FrechetMean(TransformerMixin, BaseEstimator):
    """Frechet-mean estimator with a scikit-learn interface.

    Parameters mirror :func:`frechet_mean`; ``fit`` expects ``X`` of shape
    ``(n_samples, ambient_dim)`` with rows on the manifold.  After fitting,
    ``transform`` returns tangent coordinates of points at the fitted mean
    (a chart centred on the sample), and ``inverse_transform`` maps back.

    Attributes
    ----------
    mean_ : ndarray of shape (ambient_dim,)
    n_iter_ : int
    final_grad_norm_ : float
    variance_ : float, the value of the minimised objective
    converged_ : bool
    """

    def __init__(self, space=None, max_iter=200, grad_tol=1e-10,
                 initial_step=1.0, step_shrink=0.5, min_step=1e-4,
                 init="first"):
        self.space = space
        self.max_iter = max_iter
        self.grad_tol = grad_tol
        self.initial_step = initial_step
        self.step_shrink = step_shrink
        self.min_step = min_step
        self.init = init

    def _space(self) -> SpaceForm:
        if not isinstance(self.space, SpaceForm):
            raise InvalidInputError(
                "FrechetMean requires a SpaceForm via the `space` parameter")
        return self.space

    def fit(self, X, y=None):
        space = self._space()
        report = frechet_mean(
            space, X, max_iter=self.max_iter, grad_tol=self.grad_tol,
            initial_step=self.initial_step, step_shrink=self.step_shrink,
            min_step=self.min_step, init=self.init)
        self.mean_ = report.mean
        self.n_iter_ = report.iterations
        self.final_grad_norm_ = report.final_grad_norm
        self.variance_ = report.variance_at_mean
        self.converged_ = report.converged
        self.basis_ = space.tangent_basis(report.mean)
        return self

    def transform(self, X):
        self._check_fitted()
        space = self._space()
        X = space.check_point(np.atleast_2d(np.asarray(X, dtype=float)))
        logs = space.log(self.mean_, X)
        return space.tangent_coords(self.mean_, logs, self.basis_)

    def inverse_transform(self, T):
        self._check_fitted()
        space = self._space()
        T = np.atleast_2d(np.asarray(T, dtype=float))
        return space.exp(self.mean_,
                         space.tangent_from_coords(self.mean_, T, self.basis_))

    def _check_fitted(self):
        if not hasattr(self, "mean_"):
            raise InvalidInputError("estimator is not fitted")
