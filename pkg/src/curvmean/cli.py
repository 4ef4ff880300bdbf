"""Command-line experiment runner.

Subcommands
-----------
``modulation``        Monte Carlo modulation factors over a (theta, n) grid.
``variance-profile``  Quadrature of the circle-distribution variance on S2.
``expansion-check``   Fitted decay orders of the geodesic series residuals.
``bias-check``        Monte Carlo null test of the empirical-mean bias.
``mean``              Frechet mean of a points file.

A ``--config FILE`` of ``key=value`` lines may supply any flag (keys use the
flag spelling with ``-`` or ``_``); explicit flags override the file.  Exit
codes: 0 on success, 2 for invalid configuration or input, 3 for numerical
failures (non-convergence, divergence, quadrature breakdown).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .exceptions import (
    ConfigError,
    ConvergenceError,
    CurvmeanError,
    CutLocusError,
    DegenerateHessianError,
    DivergenceError,
    DomainError,
    ExperimentError,
    InvalidInputError,
)
from .estimator import frechet_mean
from .experiments import (
    ExperimentConfig,
    bias_null_check,
    expansion_convergence_study,
    format_rows,
    run_modulation_experiment,
    variance_profile_s2,
    write_expansion_csv,
    write_modulation_csv,
    write_variance_profile_csv,
    EXPANSION_CSV_HEADER,
    MODULATION_CSV_HEADER,
    VARIANCE_PROFILE_CSV_HEADER,
)
from .spaces import space_form

_CONFIG_EXIT = 2
_NUMERIC_EXIT = 3

_NUMERIC_ERRORS = (ExperimentError, DivergenceError, CutLocusError,
                   ConvergenceError, DegenerateHessianError, DomainError)


def _parse_float_list(text):
    return tuple(float(v) for v in str(text).replace(";", ",").split(",") if v)


def _parse_int_list(text):
    return tuple(int(v) for v in str(text).replace(";", ",").split(",") if v)


def _parse_grid(text):
    """``a:b:step`` grid, inclusive of the upper bound up to rounding."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must be 'start:stop:step', got {text!r}")
    start, stop, step = (float(p) for p in parts)
    if step <= 0 or stop < start:
        raise ConfigError(f"bad grid bounds {text!r}")
    values = np.arange(start, stop + step / 2.0, step)
    return tuple(float(v) for v in values)


def _read_config_file(path):
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _read_points_file(path):
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                rows.append([float(v) for v in line.replace(",", " ").split()])
            except ValueError as exc:
                raise InvalidInputError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise InvalidInputError(f"no points found in {path}")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise InvalidInputError(f"inconsistent row lengths in {path}")
    return np.asarray(rows, dtype=float)


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="curvmean",
        description="Frechet-mean convergence experiments on space forms")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, *, manifold=True, grid=True, mc=True):
        p.add_argument("--config", help="key=value file; flags override")
        p.add_argument("--out", help="output CSV path (default: stdout)")
        if manifold:
            p.add_argument("--manifold",
                           help="kind or shortcut (s2, s3, h3, e3, sphere, ...)")
            p.add_argument("--dim", type=int)
            p.add_argument("--kappa", type=float)
        if grid:
            p.add_argument("--theta", help="comma-separated radii")
            p.add_argument("--theta-grid", dest="theta_grid",
                           help="radii as start:stop:step")
        if mc:
            p.add_argument("--n", help="comma-separated sample sizes")
            p.add_argument("--n-list", dest="n_list",
                           help="comma-separated sample sizes")
            p.add_argument("--trials", type=int)
            p.add_argument("--seed", type=int)

    p = sub.add_parser("modulation", help="measured vs predicted modulation")
    add_common(p)

    p = sub.add_parser("variance-profile",
                       help="variance of the S2 circle distribution")
    add_common(p, manifold=False, mc=False)
    p.add_argument("--phi-grid", dest="phi_grid",
                   help="latitudes as start:stop:step")
    p.add_argument("--phi", help="comma-separated latitudes")

    p = sub.add_parser("expansion-check",
                       help="decay orders of the series residuals")
    add_common(p, grid=False, mc=False)
    p.add_argument("--scales", help="comma-separated expansion scales")

    p = sub.add_parser("bias-check", help="null test of the mean bias")
    add_common(p)

    p = sub.add_parser("mean", help="Frechet mean of a points file")
    add_common(p, grid=False, mc=False)
    p.add_argument("points_file", help="one point per line")
    return parser


def _merge_config(args):
    if getattr(args, "config", None):
        file_values = _read_config_file(args.config)
        for key, value in file_values.items():
            if getattr(args, key, None) is None:
                if not hasattr(args, key):
                    raise ConfigError(f"unknown config key {key!r}")
                setattr(args, key, value)
    return args


def _thetas(args):
    if getattr(args, "theta_grid", None) and getattr(args, "theta", None):
        raise ConfigError("give either --theta or --theta-grid, not both")
    if getattr(args, "theta_grid", None):
        return _parse_grid(args.theta_grid)
    if getattr(args, "theta", None):
        return _parse_float_list(args.theta)
    raise ConfigError("a theta value or grid is required")


def _ns(args):
    if getattr(args, "n_list", None) and getattr(args, "n", None):
        raise ConfigError("give either --n or --n-list, not both")
    text = getattr(args, "n_list", None) or getattr(args, "n", None)
    if not text:
        raise ConfigError("a sample size or list is required")
    return _parse_int_list(text)


def _experiment_config(args):
    if not getattr(args, "manifold", None):
        raise ConfigError("--manifold is required")
    return ExperimentConfig(
        manifold=args.manifold,
        dim=int(args.dim) if args.dim is not None else None,
        kappa=float(args.kappa) if args.kappa is not None else None,
        theta_grid=_thetas(args),
        n_list=_ns(args),
        trials=int(args.trials) if args.trials is not None else 5000,
        seed=int(args.seed) if args.seed is not None else 0,
        out=args.out,
    )


def _cmd_modulation(args):
    records = run_modulation_experiment(_experiment_config(args))
    if args.out:
        write_modulation_csv(records, args.out)
    else:
        _emit(format_rows(MODULATION_CSV_HEADER, [
            (r.manifold, r.d, r.kappa, r.theta, r.n, r.trials, r.alpha_mc,
             r.alpha_stderr, r.alpha_eq19, r.alpha_eq20, r.seed)
            for r in records]), None)
    return 0


def _cmd_variance_profile(args):
    thetas = _thetas(args)
    if getattr(args, "phi_grid", None):
        phis = _parse_grid(args.phi_grid)
    elif getattr(args, "phi", None):
        phis = _parse_float_list(args.phi)
    else:
        raise ConfigError("a phi value or grid is required")
    rows = []
    for theta in thetas:
        rows.extend((theta, phi, var)
                    for phi, var in variance_profile_s2(theta, phis))
    if args.out:
        write_variance_profile_csv(rows, args.out)
    else:
        _emit(format_rows(VARIANCE_PROFILE_CSV_HEADER, rows), None)
    return 0


def _cmd_expansion_check(args):
    manifolds = (args.manifold or "s3,h3").split(",")
    scales = None
    if getattr(args, "scales", None):
        scales = _parse_float_list(args.scales)
    records = []
    for name in manifolds:
        space = space_form(name.strip(), args.dim, args.kappa)
        if scales is None:
            records.extend(expansion_convergence_study(space))
        else:
            records.extend(expansion_convergence_study(space, scales))
    if args.out:
        write_expansion_csv(records, args.out)
    else:
        _emit(format_rows(EXPANSION_CSV_HEADER, [
            (r.manifold, r.name, r.order,
             "" if r.slope is None else r.slope, r.max_residual)
            for r in records]), None)
    return 0


def _cmd_bias_check(args):
    config = _experiment_config(args)
    record = bias_null_check(config)
    line = (f"manifold={record.manifold} theta={record.theta} n={record.n} "
            f"trials={record.trials} |bias|={record.bias_norm:.6e} "
            f"stderr={record.bias_stderr:.6e} "
            f"{'PASS' if record.ok else 'FAIL'}\n")
    sys.stderr.write(line)
    if args.out:
        header = "manifold,d,kappa,theta,n,trials,bias_norm,bias_stderr,ok,seed"
        _emit(format_rows(header, [
            (record.manifold, record.d, record.kappa, record.theta, record.n,
             record.trials, record.bias_norm, record.bias_stderr, record.ok,
             record.seed)]), args.out)
    if not record.ok:
        raise ExperimentError(
            f"bias {record.bias_norm:.3e} exceeds 4 x stderr "
            f"{record.bias_stderr:.3e}")
    return 0


def _cmd_mean(args):
    if not getattr(args, "manifold", None):
        raise ConfigError("--manifold is required")
    space = space_form(args.manifold, args.dim, args.kappa)
    points = _read_points_file(args.points_file)
    report = frechet_mean(space, points)
    coords = ",".join(f"{v:.17g}" for v in report.mean)
    sys.stderr.write(
        f"iterations={report.iterations} grad_norm={report.final_grad_norm:.3e} "
        f"variance={report.variance_at_mean:.17g} converged={report.converged}\n")
    _emit(coords + "\n", args.out)
    if not report.converged:
        raise ConvergenceError(
            f"mean estimation stopped at gradient norm "
            f"{report.final_grad_norm:.3e}")
    return 0


_COMMANDS = {
    "modulation": _cmd_modulation,
    "variance-profile": _cmd_variance_profile,
    "expansion-check": _cmd_expansion_check,
    "bias-check": _cmd_bias_check,
    "mean": _cmd_mean,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        args = _merge_config(args)
        return _COMMANDS[args.command](args)
    except _NUMERIC_ERRORS as exc:
        sys.stderr.write(f"error: {exc}\n")
        return _NUMERIC_EXIT
    except (ConfigError, InvalidInputError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return _CONFIG_EXIT
    except CurvmeanError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return _NUMERIC_EXIT


if __name__ == "__main__":
    sys.exit(main())
