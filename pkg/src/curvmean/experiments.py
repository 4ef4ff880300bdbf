"""Seeded Monte Carlo experiments and quadratures, with CSV output.

Every experiment is deterministic: trial ``t`` of cell ``(theta_i, n_j)``
draws from a generator seeded by the entropy tuple
``(seed, theta_index, n_index, trial_index)``, so results do not depend on
execution order, and per-trial statistics are aggregated with exact
compensated summation (``math.fsum``).  CSV files are the only output
format; plotting is a separate downstream consumer.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from . import moments as mo
from .curvature import CurvatureOracle
from .estimator import _batch_mean, frechet_mean
from .exceptions import ConfigError, ExperimentError, InvalidInputError
from .series import (
    TRUNCATION_ORDER,
    double_exp_series,
    fit_loglog_slope,
    hessian_weight,
    neighbor_log_series,
    squared_distance_series,
)
from .spaces import SpaceForm, space_form

__all__ = [
    "ExperimentConfig",
    "ModulationRecord",
    "run_modulation_experiment",
    "variance_profile_s2",
    "ExpansionStudyRecord",
    "expansion_convergence_study",
    "BiasCheckRecord",
    "bias_null_check",
    "MODULATION_CSV_HEADER",
    "format_rows",
    "write_modulation_csv",
    "write_variance_profile_csv",
    "write_expansion_csv",
    "origin_of",
]

MODULATION_CSV_HEADER = ("manifold,d,kappa,theta,n,trials,alpha_mc,"
                         "alpha_stderr,alpha_eq19,alpha_eq20,seed")
VARIANCE_PROFILE_CSV_HEADER = "theta,phi,variance"
EXPANSION_CSV_HEADER = "manifold,expansion,order,slope,max_residual"

# Estimator settings shared by all experiments (exposed for tests).
ESTIMATOR_DEFAULTS = dict(max_iter=200, grad_tol=1e-10, initial_step=1.0,
                          step_shrink=0.5, min_step=1e-4)

# Fraction of non-converged trials tolerated before the experiment aborts.
MAX_FAILED_FRACTION = 1e-3


def origin_of(space: SpaceForm) -> np.ndarray:
    """Canonical pole: the origin in flat space, the last-axis point of
    radius ``R`` on the sphere and on the positive hyperboloid sheet."""
    x = np.zeros(space.ambient_dim)
    if space.kind != "euclidean":
        x[-1] = space.radius
    return x


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings of a modulation or bias experiment."""

    manifold: str
    theta_grid: tuple = ()
    n_list: tuple = ()
    trials: int = 5000
    seed: int = 0
    dim: int | None = None
    kappa: float | None = None
    out: str | None = None

    def space(self) -> SpaceForm:
        try:
            return space_form(self.manifold, self.dim, self.kappa)
        except InvalidInputError as exc:
            raise ConfigError(str(exc)) from exc

    def validated(self) -> "ExperimentConfig":
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if int(self.seed) != self.seed:
            raise ConfigError("seed must be an integer")
        space = self.space()
        if not self.theta_grid:
            raise ConfigError("at least one theta value is required")
        if not self.n_list:
            raise ConfigError("at least one sample size is required")
        for theta in self.theta_grid:
            if not (theta > 0 and np.isfinite(theta)):
                raise ConfigError(f"theta must be positive, got {theta}")
            if space.kind == "sphere":
                if theta >= space.injectivity_radius:
                    raise ConfigError(
                        f"theta={theta} reaches the sphere's injectivity "
                        f"radius {space.injectivity_radius:.6g}")
                if theta >= space.injectivity_radius / 2.0:
                    warnings.warn(
                        f"theta={theta} exceeds the concentration bound "
                        f"{space.injectivity_radius / 2.0:.6g}; the mean may "
                        "not be unique", RuntimeWarning, stacklevel=2)
        for n in self.n_list:
            if n < 1 or int(n) != n:
                raise ConfigError(f"sample sizes must be positive ints, got {n}")
        return self


@dataclass(frozen=True)
class ModulationRecord:
    """One experiment row: measured versus predicted modulation."""

    manifold: str
    d: int
    kappa: float
    theta: float
    n: int
    trials: int
    alpha_mc: float
    alpha_stderr: float
    alpha_eq19: float
    alpha_eq20: float
    seed: int

    def __post_init__(self):
        if not self.alpha_mc > 0:
            raise InvalidInputError("measured modulation must be positive")
        if self.alpha_stderr < 0:
            raise InvalidInputError("standard error must be >= 0")


def _trial_rng(seed: int, theta_idx: int, n_idx: int, trial: int):
    # Counter-style seeding: the entropy tuple is hashed by SeedSequence,
    # so streams are independent of execution order and worker count.
    return np.random.default_rng([seed, theta_idx, n_idx, trial])


def _sample_cell(space, pole, theta, n, trials, seed, theta_idx, n_idx):
    out = np.empty((trials, n, space.ambient_dim))
    for trial in range(trials):
        rng = _trial_rng(seed, theta_idx, n_idx, trial)
        out[trial] = space.sample_on_sphere(pole, theta, rng, size=n)
    return out


def _estimate_cell(space, pole, samples, context: str):
    trials = samples.shape[0]
    init = np.broadcast_to(pole, (trials, pole.shape[0])).copy()
    means, iters, gnorm, _, converged = _batch_mean(
        space, samples, init, **ESTIMATOR_DEFAULTS)
    n_failed = int(np.count_nonzero(~converged))
    if n_failed > MAX_FAILED_FRACTION * trials:
        worst = np.sort(gnorm[~converged])[::-1][:5]
        raise ExperimentError(
            f"{n_failed}/{trials} trials did not converge ({context}); "
            f"worst gradient norms: {np.array2string(worst, precision=3)}")
    return means


def _fsum_mean_var(values):
    values = [float(v) for v in values]
    n = len(values)
    s1 = math.fsum(values)
    mean = s1 / n
    if n == 1:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, max(var, 0.0)


def run_modulation_experiment(config: ExperimentConfig) -> list:
    """Measure ``n Var(mean_n) / theta^2`` for every ``(theta, n)`` cell.

    Each trial draws ``n`` points uniformly on the radius-``theta`` geodesic
    sphere about the pole, estimates their mean starting from the pole, and
    contributes its squared distance to the pole.  Both closed-form
    predictions are attached to every record.
    """
    config = config.validated()
    space = config.space()
    pole = origin_of(space)
    records = []
    for theta_idx, theta in enumerate(config.theta_grid):
        for n_idx, n in enumerate(config.n_list):
            samples = _sample_cell(space, pole, theta, int(n), config.trials,
                                   config.seed, theta_idx, n_idx)
            means = _estimate_cell(
                space, pole, samples,
                context=f"manifold={config.manifold} theta={theta} n={n}")
            sqdist = space.distance(pole, means) ** 2
            mean_d2, var_d2 = _fsum_mean_var(sqdist)
            scale = n / theta**2
            alpha_mc = scale * mean_d2
            alpha_stderr = scale * math.sqrt(var_d2 / config.trials)
            eq19 = mo.modulation_nonasymptotic(space.kappa, theta**2,
                                               space.dim, int(n))
            eq20 = mo.modulation_asymptotic(
                hessian_weight(space.kappa * theta**2), space.dim)
            records.append(ModulationRecord(
                manifold=config.manifold, d=space.dim, kappa=space.kappa,
                theta=float(theta), n=int(n), trials=config.trials,
                alpha_mc=alpha_mc, alpha_stderr=alpha_stderr,
                alpha_eq19=eq19, alpha_eq20=eq20, seed=config.seed))
    return records


# -- variance of the circle distribution on the 2-sphere ----------------------

def variance_profile_s2(theta: float, phi_grid) -> list:
    """Variance of the uniform circle distribution of colatitude ``theta``
    on the unit 2-sphere, evaluated at points of latitude ``phi``.

    The integrand is the squared angle to a running point of the circle;
    the quadrature is adaptive Gauss-Kronrod on the half period (the
    integrand is even in the circle parameter) to absolute tolerance 1e-9.
    """
    theta = float(theta)
    if not (0.0 <= theta <= np.pi):
        raise InvalidInputError(f"theta must lie in [0, pi], got {theta}")
    rows = []
    for phi in phi_grid:
        phi = float(phi)
        if not (0.0 <= phi <= np.pi):
            raise InvalidInputError(f"phi must lie in [0, pi], got {phi}")
        st, ct = np.sin(theta), np.cos(theta)
        sp, cp = np.sin(phi), np.cos(phi)

        def integrand(alpha):
            c = np.clip(st * sp * np.cos(alpha) + ct * cp, -1.0, 1.0)
            return np.arccos(c) ** 2

        value, err = quad(integrand, 0.0, np.pi, epsabs=1e-11, epsrel=1e-11,
                          limit=200)
        if err > 1e-9:
            raise ExperimentError(
                f"quadrature error estimate {err:.2e} above tolerance at "
                f"theta={theta}, phi={phi}")
        rows.append((phi, value / np.pi))
    return rows


# -- series order study -------------------------------------------------------

DEFAULT_STUDY_SCALES = (0.02, 0.04, 0.08, 0.16)


@dataclass(frozen=True)
class ExpansionStudyRecord:
    manifold: str
    name: str
    order: int
    slope: float | None
    max_residual: float
    n_scales: int


def _study_directions(dim: int):
    # fixed, deterministic unit coefficient vectors and a small point cloud
    rng = np.random.default_rng(20240817)
    v = rng.normal(size=dim)
    u = rng.normal(size=dim)
    u -= (u @ v) / (v @ v) * v
    cloud = rng.normal(size=(dim + 1, dim))
    cloud -= 0.6 * cloud.mean(axis=0)  # keep the tangent mean away from 0
    return (v / np.linalg.norm(v), u / np.linalg.norm(u),
            cloud / np.max(np.linalg.norm(cloud, axis=1)))


def _study_residuals(space: SpaceForm, scales):
    pole = origin_of(space)
    basis = space.tangent_basis(pole)
    oracle = CurvatureOracle.space_form(space.dim, space.kappa)
    cv, cu, cloud = _study_directions(space.dim)
    res = {name: [] for name in TRUNCATION_ORDER}
    for eps in scales:
        v, u = eps * cv, eps * cu
        va = space.tangent_from_coords(pole, v, basis)
        ua = space.tangent_from_coords(pole, u, basis)
        xv = space.exp(pole, va)
        back_to_pole = space.log(xv, pole)

        shot = space.exp(xv, space.transport(pole, va, ua))
        exact = space.tangent_coords(pole, space.log(pole, shot), basis)
        res["double_exp"].append(
            np.linalg.norm(double_exp_series(oracle, v, u) - exact))

        xw = space.exp(pole, ua)
        pulled = space.transport(xv, back_to_pole, space.log(xv, xw))
        exact = space.tangent_coords(pole, pulled, basis)
        res["neighbor_log"].append(
            np.linalg.norm(neighbor_log_series(oracle, v, u) - exact))

        res["squared_distance"].append(
            abs(squared_distance_series(oracle, v, u)
                - space.distance(xv, xw) ** 2))

        logs = eps * cloud
        points = space.exp(pole, logs @ basis)
        m1, m2, m3 = (mo.empirical_moment(logs, k) for k in (1, 2, 3))
        pulled = space.transport(
            xv, back_to_pole, space.log(xv, points)).mean(axis=0)
        exact = space.tangent_coords(pole, pulled, basis)
        pred = mo.recentered_tangent_mean_series(oracle, v, m1, m2, m3)
        res["recentered_tangent_mean"].append(np.linalg.norm(pred - exact))

        report = frechet_mean(space, points, init=pole, grad_tol=1e-14,
                              check_concentration=False)
        exact = space.tangent_coords(pole, space.log(pole, report.mean), basis)
        pred = mo.log_mean_series(oracle, m1, m2, m3)
        res["log_mean"].append(np.linalg.norm(pred - exact))
    return res


def expansion_convergence_study(space: SpaceForm,
                                scales=DEFAULT_STUDY_SCALES) -> list:
    """Fit the decay order of each series residual against exact geometry.

    On flat space the series are exact, so no slope is fitted and only the
    residual magnitude is reported.  Raises when curvature is present but
    the residuals sit below the double-precision noise floor (the scales are
    too small to carry a slope).
    """
    scales = np.asarray(sorted(float(s) for s in scales))
    if scales.size < 2 or scales[0] <= 0:
        raise InvalidInputError("need at least two positive scales")
    res = _study_residuals(space, scales)
    label = f"{space.kind[0]}{space.dim}" if abs(space.kappa) in (0.0, 1.0) \
        else space.kind
    records = []
    for name, order in TRUNCATION_ORDER.items():
        values = np.asarray(res[name])
        if space.kappa == 0.0:
            records.append(ExpansionStudyRecord(
                manifold=label, name=name, order=order, slope=None,
                max_residual=float(values.max()), n_scales=len(scales)))
            continue
        try:
            slope, used = fit_loglog_slope(scales, values)
        except InvalidInputError as exc:
            raise ExperimentError(
                f"residuals of {name!r} on {label} are below the noise "
                "floor; increase the scales to measure a slope") from exc
        records.append(ExpansionStudyRecord(
            manifold=label, name=name, order=order, slope=slope,
            max_residual=float(values.max()), n_scales=used))
    return records


# -- Monte Carlo bias check ---------------------------------------------------

@dataclass(frozen=True)
class BiasCheckRecord:
    manifold: str
    d: int
    kappa: float
    theta: float
    n: int
    trials: int
    bias_norm: float
    bias_stderr: float
    ok: bool
    seed: int
    bias: tuple = field(repr=False, default=())


def bias_null_check(config: ExperimentConfig) -> BiasCheckRecord:
    """Monte Carlo estimate of the expected tangent location of the
    empirical mean at the pole; passes when the estimate is within four
    standard errors of zero."""
    config = config.validated()
    if len(config.theta_grid) != 1 or len(config.n_list) != 1:
        raise ConfigError("bias check uses a single (theta, n) cell")
    space = config.space()
    theta, n = config.theta_grid[0], int(config.n_list[0])
    pole = origin_of(space)
    basis = space.tangent_basis(pole)
    samples = _sample_cell(space, pole, theta, n, config.trials,
                           config.seed, 0, 0)
    means = _estimate_cell(space, pole, samples,
                           context=f"bias check theta={theta} n={n}")
    coords = space.tangent_coords(pole, space.log(pole, means), basis)
    per_axis = [_fsum_mean_var(coords[:, a]) for a in range(space.dim)]
    bias = np.array([m for m, _ in per_axis])
    stderr = math.sqrt(math.fsum(v for _, v in per_axis) / config.trials)
    norm = float(np.linalg.norm(bias))
    return BiasCheckRecord(
        manifold=config.manifold, d=space.dim, kappa=space.kappa,
        theta=float(theta), n=n, trials=config.trials, bias_norm=norm,
        bias_stderr=stderr, ok=bool(norm <= 4.0 * stderr), seed=config.seed,
        bias=tuple(bias))


# -- CSV output ---------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def format_rows(header: str, rows) -> str:
    """CSV text with floats at 17 significant digits (round-trip exact)."""
    lines = [header] + [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _write_rows(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_rows(header, rows))


def write_modulation_csv(records, path):
    _write_rows(path, MODULATION_CSV_HEADER, [
        (r.manifold, r.d, r.kappa, r.theta, r.n, r.trials, r.alpha_mc,
         r.alpha_stderr, r.alpha_eq19, r.alpha_eq20, r.seed)
        for r in records])


def write_variance_profile_csv(rows, path):
    """Rows are ``(theta, phi, variance)`` triples."""
    _write_rows(path, VARIANCE_PROFILE_CSV_HEADER, rows)


def write_expansion_csv(records, path):
    _write_rows(path, EXPANSION_CSV_HEADER, [
        (r.manifold, r.name, r.order,
         "" if r.slope is None else r.slope, r.max_residual)
        for r in records])
