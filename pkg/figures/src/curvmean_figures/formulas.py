"""Closed-form prediction curves overlaid on the measured points.

Pure scalar formulas only; every curve drawn by the plotting layer is a
direct evaluation of one of these (the measured points come verbatim from
the CSV).
"""

from __future__ import annotations

import numpy as np

QUARTER_PI_SQ = np.pi**2 / 4.0


def hessian_weight(t):
    """``sqrt(t) cot(sqrt(t))`` continued through 0 (coth branch for t < 0)."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    small = np.abs(t) < 1e-8
    out[small] = 1.0 - t[small] / 3.0
    pos = (~small) & (t > 0)
    s = np.sqrt(t[pos])
    out[pos] = s / np.tan(s)
    neg = (~small) & (t < 0)
    s = np.sqrt(-t[neg])
    out[neg] = s / np.tanh(s)
    return out


def modulation_small_sample(kappa, theta, d, n):
    """Small-sample prediction ``1 + (2/3) k theta^2 (1-1/d)(1-1/n)`` for the
    uniform sphere of radius ``theta`` (variance ``theta^2``)."""
    theta = np.asarray(theta, dtype=float)
    return 1.0 + (2.0 / 3.0) * kappa * theta**2 * (1.0 - 1.0 / d) * (1.0 - 1.0 / n)


def modulation_asymptotic(kappa, theta, d):
    """Asymptotic prediction ``(1/d + (1-1/d) h(k theta^2))^-2``."""
    theta = np.asarray(theta, dtype=float)
    gamma = 1.0 / d + (1.0 - 1.0 / d) * hessian_weight(kappa * theta**2)
    return gamma**-2


def modulation_archetype(t):
    """Large-d, large-n modulation ``tan(sqrt(t))^2 / t``; 1 at t = 0 and
    diverging at ``pi^2 / 4``."""
    return hessian_weight(np.asarray(t, dtype=float)) ** -2.0
