"""Figure builders for the experiment CSVs.

Three kinds: per-``n`` panels of measured modulation factors with their
error bars and both prediction curves; the variance-versus-latitude profile
of the circle distribution on the 2-sphere; and the archetypal modulation
curve.  The builders draw only values read from the CSV or evaluated from
the closed-form prediction formulas -- no statistics happen here -- so a
figure is a deterministic function of its inputs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvio import SchemaError, read_modulation_csv, read_variance_profile_csv
from .formulas import (
    QUARTER_PI_SQ,
    modulation_archetype,
    modulation_asymptotic,
    modulation_small_sample,
)

# fixed hash salt so SVG element ids do not change between runs
matplotlib.rcParams["svg.hashsalt"] = "curvmean-figures"

MEASURED_LABEL = "measured"
SMALL_SAMPLE_LABEL = "small-sample prediction"
ASYMPTOTIC_LABEL = "asymptotic prediction"

_CURVE_POINTS = 256


def build_modulation_panel(csv_paths, ylim=None):
    """One panel per sample size, measured points with +-1 stderr bars and
    both prediction curves overlaid.  All rows must come from one manifold
    (one curvature and dimension)."""
    rows = []
    for path in csv_paths:
        rows.extend(read_modulation_csv(path))
    keys = {(r.manifold, r.d, r.kappa) for r in rows}
    if len(keys) != 1:
        raise SchemaError(
            f"modulation panel needs a single manifold, got {sorted(keys)}")
    manifold, d, kappa = keys.pop()
    n_values = sorted({r.n for r in rows})
    fig, axes = plt.subplots(
        1, len(n_values), figsize=(4.2 * len(n_values), 3.6),
        sharey=True, squeeze=False)
    theta_max = max(r.theta for r in rows)
    theta_min = min(r.theta for r in rows)
    span = np.linspace(min(theta_min, theta_max / _CURVE_POINTS),
                       theta_max, _CURVE_POINTS)
    for ax, n in zip(axes[0], n_values):
        cell = sorted((r for r in rows if r.n == n), key=lambda r: r.theta)
        thetas = np.array([r.theta for r in cell])
        measured = np.array([r.alpha_mc for r in cell])
        stderr = np.array([r.alpha_stderr for r in cell])
        ax.plot(span, modulation_small_sample(kappa, span, d, n),
                color="green", label=SMALL_SAMPLE_LABEL)
        ax.plot(span, modulation_asymptotic(kappa, span, d),
                color="grey", label=ASYMPTOTIC_LABEL)
        ax.errorbar(thetas, measured, yerr=stderr, fmt="o", color="crimson",
                    markersize=4, capsize=2, label=MEASURED_LABEL)
        ax.set_title(f"{manifold}, n={n}")
        ax.set_xlabel(r"$\theta$")
        if ylim is not None:
            ax.set_ylim(*ylim)
        ax.grid(True, alpha=0.3)
    axes[0][0].set_ylabel(r"$n\,\mathrm{Var}/\theta^2$")
    axes[0][-1].legend(fontsize=8)
    fig.tight_layout()
    return fig


def build_variance_profile(csv_paths):
    """Variance against latitude, one curve per circle radius in the CSV."""
    rows = []
    for path in csv_paths:
        rows.extend(read_variance_profile_csv(path))
    thetas = sorted({r.theta for r in rows})
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for theta in thetas:
        curve = sorted((r for r in rows if r.theta == theta),
                       key=lambda r: r.phi)
        ax.plot([r.phi for r in curve], [r.variance for r in curve],
                label=rf"$\theta$={theta:.4g}")
    ax.set_xlabel(r"latitude $\phi$")
    ax.set_ylabel("variance")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def build_archetypal(t_min=-10.0, t_max=QUARTER_PI_SQ, ymax=25.0):
    """The archetypal modulation curve with its divergence asymptote."""
    if not t_min < t_max <= QUARTER_PI_SQ:
        raise ValueError(
            f"need t_min < t_max <= pi^2/4, got [{t_min}, {t_max}]")
    t_hi = min(t_max, QUARTER_PI_SQ - 1e-4)
    t = np.linspace(t_min, t_hi, 2048)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(t, modulation_archetype(t), color="tab:blue",
            label=r"$\tan^2(\sqrt{t})/t$")
    ax.axvline(QUARTER_PI_SQ, color="red", linestyle="--",
               label=r"$t=\pi^2/4$")
    ax.plot([0.0], [1.0], "ko", markersize=4)
    ax.annotate("(0, 1)", xy=(0.0, 1.0), xytext=(0.4, 1.6), fontsize=8)
    ax.axhline(1.0, color="black", linewidth=0.5, alpha=0.4)
    ax.set_ylim(0.0, ymax)
    ax.set_xlabel(r"curvature $\times$ squared radius $t$")
    ax.set_ylabel("modulation factor")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def save_figure(fig, out_path):
    """Write SVG (default) or PNG depending on the output suffix."""
    out_path = str(out_path)
    if out_path.endswith(".png"):
        fig.savefig(out_path, format="png", dpi=150)
    else:
        fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
