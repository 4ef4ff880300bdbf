"""Exact geometry of constant-curvature spaces.

Three families are supported, all embedded in a flat ambient space:

* ``Euclidean(d)`` -- flat space, ambient dimension ``d``;
* ``Sphere(d, kappa)`` -- the radius ``1/sqrt(kappa)`` sphere in ``R^{d+1}``;
* ``Hyperbolic(d, kappa)`` -- the positive sheet (last coordinate > 0) of the
  hyperboloid ``<x, x>_* = 1/kappa`` in Minkowski space ``R^{d,1}``, where
  ``<x, y>_* = sum_i x_i y_i - x_t y_t`` and the time axis is the last one.

Points and tangent vectors are plain ``numpy`` arrays in ambient coordinates;
all operations broadcast over leading axes.  Arbitrary curvature magnitude is
handled by scaling the unit-curvature closed forms through the radius
``R = 1/sqrt(|kappa|)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    CutLocusError,
    DegeneratePlaneError,
    InvalidInputError,
)

__all__ = [
    "SpaceForm",
    "Euclidean",
    "Sphere",
    "Hyperbolic",
    "space_form",
    "KKCReport",
    "kkc_check",
]

# Below this geodesic angle, sin/sinh ratios switch to their quadratic
# Taylor polynomials to avoid 0/0 loss near coincident points.
_SMALL_ANGLE = 1e-6

# Distance tolerance around the antipode under which the sphere log is
# refused: the cut locus is genuinely multivalued there.
ANTIPODE_TOL = 1e-8


def _require_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise InvalidInputError("non-finite coordinates")


def _sinc_like(angle, series_coeff):
    """sin(a)/a (coeff=-1/6) or sinh(a)/a (coeff=+1/6), safe at a=0."""
    small = np.abs(angle) < _SMALL_ANGLE
    safe = np.where(small, 1.0, angle)
    ratio = (np.sin(safe) if series_coeff < 0 else np.sinh(safe)) / safe
    return np.where(small, 1.0 + series_coeff * angle**2, ratio)


def _inv_sinc(angle, series_coeff):
    """a/sin(a) (coeff=+1/6) or a/sinh(a) (coeff=-1/6), safe at a=0."""
    small = np.abs(angle) < _SMALL_ANGLE
    safe = np.where(small, 1.0, angle)
    ratio = safe / (np.sin(safe) if series_coeff > 0 else np.sinh(safe))
    return np.where(small, 1.0 + series_coeff * angle**2, ratio)


class SpaceForm:
    """Common interface of the three constant-curvature geometries.

    Subclasses implement the ambient (possibly indefinite) inner product and
    the closed-form exponential/logarithm; everything else -- transport,
    distances, tangent bases, sampling -- is shared or thinly specialised.
    All operations are pure; the sampler mutates only the caller's generator.
    """

    kind: str
    dim: int
    kappa: float

    def __init__(self, dim: int, kappa: float):
        if dim < 1 or int(dim) != dim:
            raise InvalidInputError(f"dim must be a positive integer, got {dim}")
        self.dim = int(dim)
        self.kappa = float(kappa)

    # -- ambient metric -------------------------------------------------

    def ambient_inner(self, u, v):
        """Inner product of ambient vectors (signature-aware)."""
        raise NotImplementedError

    @property
    def ambient_dim(self) -> int:
        raise NotImplementedError

    @property
    def radius(self) -> float:
        k = abs(self.kappa)
        return 1.0 / np.sqrt(k) if k > 0 else np.inf

    @property
    def injectivity_radius(self) -> float:
        return np.inf

    # -- validation -----------------------------------------------------

    def _embedding_defect(self, x):
        """Deviation of <x, x> from its on-manifold value (0 if flat)."""
        return np.zeros(np.shape(x)[:-1])

    def check_point(self, x, atol: float = 1e-12):
        """Validate ambient coordinates; return ``x`` as a float array.

        The tolerance is relative to the squared coordinate magnitude so that
        far-away hyperboloid points (huge coordinates) remain checkable.
        """
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.ambient_dim:
            raise InvalidInputError(
                f"expected ambient dimension {self.ambient_dim}, got {x.shape[-1]}")
        _require_finite(x)
        scale = np.maximum(1.0, np.sum(x * x, axis=-1))
        if np.any(np.abs(self._embedding_defect(x)) > atol * scale):
            raise InvalidInputError(f"point is not on the manifold ({self.kind})")
        return x

    def check_tangent(self, x, v, atol: float = 1e-10):
        """Validate that ``v`` lies in the tangent space at ``x``."""
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.ambient_dim:
            raise InvalidInputError(
                f"expected ambient dimension {self.ambient_dim}, got {v.shape[-1]}")
        _require_finite(v)
        scale = np.maximum(1.0, np.sqrt(np.sum(x * x, axis=-1) * np.sum(v * v, axis=-1)))
        if np.any(np.abs(self.ambient_inner(x, v)) > atol * scale):
            raise InvalidInputError("vector is not tangent at the base point")
        return v

    def project_tangent(self, x, v):
        """Orthogonal projection of an ambient vector onto the tangent space."""
        return np.asarray(v, dtype=float)

    # -- metric on tangent vectors ---------------------------------------

    def inner(self, x, u, v):
        """Riemannian inner product of tangent vectors at ``x``.

        Positive definite on tangent spaces even when the ambient metric is
        indefinite (hyperboloid).
        """
        return self.ambient_inner(u, v)

    def norm(self, x, v):
        sq = self.inner(x, v, v)
        return np.sqrt(np.maximum(sq, 0.0))

    # -- core maps --------------------------------------------------------

    def exp(self, x, v):
        raise NotImplementedError

    def log(self, x, y):
        raise NotImplementedError

    def distance(self, x, y):
        raise NotImplementedError

    def transport(self, x, w, v):
        """Parallel transport of ``v`` along the geodesic ``t -> exp_x(t w)``
        from ``t = 0`` to ``t = 1``."""
        raise NotImplementedError

    # -- curvature --------------------------------------------------------

    def curvature_operator(self, x, u, v, w):
        """Constant-curvature tensor ``R(u, v)w = kappa (<v,w> u - <u,w> v)``
        acting on tangent vectors at ``x``."""
        k = self.kappa
        if k == 0.0:
            return np.zeros_like(np.asarray(w, dtype=float))
        vw = self.inner(x, v, w)[..., None]
        uw = self.inner(x, u, w)[..., None]
        return k * (vw * u - uw * v)

    def sectional_curvature(self, x, u, v):
        """Gaussian curvature of the 2-plane spanned by ``u`` and ``v``."""
        uu = self.inner(x, u, u)
        vv = self.inner(x, v, v)
        uv = self.inner(x, u, v)
        denom = uu * vv - uv**2
        if np.any(denom <= 1e-12 * np.maximum(uu * vv, 1e-300)):
            raise DegeneratePlaneError("u and v do not span a 2-plane")
        num = self.inner(x, self.curvature_operator(x, u, v, v), u)
        return num / denom

    # -- tangent frames ---------------------------------------------------

    def tangent_basis(self, x):
        """Deterministic orthonormal basis of the tangent space at ``x``.

        Gram-Schmidt over the projected ambient axes, taken in index order,
        so the frame is reproducible across runs.  Returns a ``(dim,
        ambient_dim)`` array of row vectors.
        """
        x = np.asarray(x, dtype=float)
        rows = []
        for i in range(self.ambient_dim):
            e = np.zeros(self.ambient_dim)
            e[i] = 1.0
            b = self.project_tangent(x, e)
            for r in rows:
                b = b - self.inner(x, b, r) * r
            n = self.norm(x, b)
            if n > 1e-6:
                rows.append(b / n)
            if len(rows) == self.dim:
                break
        if len(rows) != self.dim:
            raise InvalidInputError("could not complete a tangent basis")
        return np.stack(rows)

    def tangent_coords(self, x, v, basis=None):
        """Coordinates of tangent vectors in an orthonormal frame at ``x``."""
        if basis is None:
            basis = self.tangent_basis(x)
        v = np.asarray(v, dtype=float)
        return np.stack(
            [self.inner(x, v, basis[i]) for i in range(self.dim)], axis=-1)

    def tangent_from_coords(self, x, coords, basis=None):
        if basis is None:
            basis = self.tangent_basis(x)
        coords = np.asarray(coords, dtype=float)
        return coords @ basis

    # -- sampling ---------------------------------------------------------

    def sample_on_sphere(self, center, theta, rng, size=None):
        """Uniform samples on the geodesic sphere of radius ``theta``.

        The direction is an isotropic Gaussian in the tangent space at
        ``center``, normalised to the unit sphere, so it is uniform on the
        unit ``(dim-1)``-sphere of directions.  Deterministic given the
        generator state.
        """
        theta = float(theta)
        if not np.isfinite(theta) or theta < 0:
            raise InvalidInputError(f"theta must be finite and >= 0, got {theta}")
        if theta >= self.injectivity_radius:
            raise InvalidInputError(
                f"theta={theta} reaches the injectivity radius "
                f"{self.injectivity_radius}")
        center = self.check_point(center)
        basis = self.tangent_basis(center)
        shape = () if size is None else (tuple(size) if np.iterable(size) else (size,))
        if theta == 0.0:
            return np.broadcast_to(center, shape + center.shape).copy()
        g = rng.standard_normal(shape + (self.dim,))
        g /= np.maximum(np.linalg.norm(g, axis=-1, keepdims=True), 1e-300)
        v = (theta * g) @ basis
        return self.exp(center, v)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, kappa={self.kappa})"


class Euclidean(SpaceForm):
    kind = "euclidean"

    def __init__(self, dim: int):
        super().__init__(dim, 0.0)

    @property
    def ambient_dim(self) -> int:
        return self.dim

    def ambient_inner(self, u, v):
        return np.sum(np.asarray(u, float) * np.asarray(v, float), axis=-1)

    def check_point(self, x, atol: float = 1e-12):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.ambient_dim:
            raise InvalidInputError(
                f"expected ambient dimension {self.ambient_dim}, got {x.shape[-1]}")
        _require_finite(x)
        return x

    def check_tangent(self, x, v, atol: float = 1e-10):
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.ambient_dim:
            raise InvalidInputError(
                f"expected ambient dimension {self.ambient_dim}, got {v.shape[-1]}")
        _require_finite(v)
        return v

    def exp(self, x, v):
        _require_finite(x, v)
        return np.asarray(x, float) + np.asarray(v, float)

    def log(self, x, y):
        _require_finite(x, y)
        return np.asarray(y, float) - np.asarray(x, float)

    def distance(self, x, y):
        _require_finite(x, y)
        d = np.asarray(y, float) - np.asarray(x, float)
        return np.linalg.norm(d, axis=-1)

    def transport(self, x, w, v):
        return np.asarray(v, dtype=float).copy()


class Sphere(SpaceForm):
    kind = "sphere"

    def __init__(self, dim: int, kappa: float = 1.0):
        if kappa <= 0:
            raise InvalidInputError("sphere requires kappa > 0")
        super().__init__(dim, kappa)

    @property
    def ambient_dim(self) -> int:
        return self.dim + 1

    @property
    def injectivity_radius(self) -> float:
        return np.pi * self.radius

    def ambient_inner(self, u, v):
        return np.sum(np.asarray(u, float) * np.asarray(v, float), axis=-1)

    def _embedding_defect(self, x):
        return np.sum(x * x, axis=-1) - self.radius**2

    def project_tangent(self, x, v):
        x = np.asarray(x, float)
        v = np.asarray(v, float)
        coeff = self.ambient_inner(x, v) / self.radius**2
        return v - coeff[..., None] * x

    def exp(self, x, v):
        _require_finite(x, v)
        x = np.asarray(x, float)
        v = np.asarray(v, float)
        r = self.radius
        alpha = self.norm(x, v)[..., None] / r
        return np.cos(alpha) * x + _sinc_like(alpha, -1.0 / 6.0) * v

    def _angle_parts(self, x, y):
        r = self.radius
        c = self.ambient_inner(x, y) / r**2
        p = np.asarray(y, float) - c[..., None] * np.asarray(x, float)
        s = np.sqrt(np.maximum(np.sum(p * p, axis=-1), 0.0)) / r
        return np.arctan2(s, c), p

    def distance(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        _require_finite(x, y)
        alpha, _ = self._angle_parts(x, y)
        return self.radius * alpha

    def log(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        _require_finite(x, y)
        alpha, p = self._angle_parts(x, y)
        if np.any(alpha > np.pi - ANTIPODE_TOL / self.radius):
            raise CutLocusError(
                "log is multivalued at an antipodal pair on the sphere")
        return _inv_sinc(alpha[..., None], 1.0 / 6.0) * p

    def transport(self, x, w, v):
        x = np.asarray(x, float)
        w = np.asarray(w, float)
        v = np.asarray(v, float)
        _require_finite(x, w, v)
        r = self.radius
        wn = self.norm(x, w)
        moving = wn > 0.0
        wn_safe = np.where(moving, wn, 1.0)[..., None]
        wu = w / wn_safe
        alpha = (wn / r)[..., None]
        a = self.ambient_inner(v, wu)[..., None]
        shifted = v + a * ((np.cos(alpha) - 1.0) * wu - np.sin(alpha) * x / r)
        return np.where(moving[..., None], shifted, v)


class Hyperbolic(SpaceForm):
    kind = "hyperbolic"

    def __init__(self, dim: int, kappa: float = -1.0):
        if kappa >= 0:
            raise InvalidInputError("hyperbolic space requires kappa < 0")
        super().__init__(dim, kappa)

    @property
    def ambient_dim(self) -> int:
        return self.dim + 1

    def ambient_inner(self, u, v):
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        return np.sum(u[..., :-1] * v[..., :-1], axis=-1) - u[..., -1] * v[..., -1]

    def _embedding_defect(self, x):
        return self.ambient_inner(x, x) + self.radius**2

    def check_point(self, x, atol: float = 1e-12):
        x = super().check_point(x, atol=atol)
        if np.any(x[..., -1] <= 0):
            raise InvalidInputError("point is not on the positive sheet")
        return x

    def project_tangent(self, x, v):
        x = np.asarray(x, float)
        v = np.asarray(v, float)
        coeff = self.ambient_inner(x, v) / (-self.radius**2)
        return v - coeff[..., None] * x

    def exp(self, x, v):
        _require_finite(x, v)
        x = np.asarray(x, float)
        v = np.asarray(v, float)
        r = self.radius
        alpha = self.norm(x, v)[..., None] / r
        return np.cosh(alpha) * x + _sinc_like(alpha, 1.0 / 6.0) * v

    def _angle_parts(self, x, y):
        r = self.radius
        c = -self.ambient_inner(x, y) / r**2
        p = np.asarray(y, float) - c[..., None] * np.asarray(x, float)
        # <p, p>_* = r^2 sinh^2(alpha) >= 0; asinh keeps full accuracy near 0.
        s = np.sqrt(np.maximum(self.ambient_inner(p, p), 0.0)) / r
        return np.arcsinh(s), p

    def distance(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        _require_finite(x, y)
        alpha, _ = self._angle_parts(x, y)
        return self.radius * alpha

    def log(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        _require_finite(x, y)
        alpha, p = self._angle_parts(x, y)
        return _inv_sinc(alpha[..., None], -1.0 / 6.0) * p

    def transport(self, x, w, v):
        x = np.asarray(x, float)
        w = np.asarray(w, float)
        v = np.asarray(v, float)
        _require_finite(x, w, v)
        r = self.radius
        wn = self.norm(x, w)
        moving = wn > 0.0
        wn_safe = np.where(moving, wn, 1.0)[..., None]
        wu = w / wn_safe
        alpha = (wn / r)[..., None]
        a = self.ambient_inner(v, wu)[..., None]
        shifted = v + a * ((np.cosh(alpha) - 1.0) * wu + np.sinh(alpha) * x / r)
        return np.where(moving[..., None], shifted, v)


_KINDS = ("euclidean", "sphere", "hyperbolic")


def space_form(kind, dim=None, kappa=None) -> SpaceForm:
    """Build a space form from a kind name or a shortcut such as ``"s2"``.

    Shortcuts ``s<d>``, ``h<d>`` and ``e<d>`` select the unit-curvature
    sphere, unit-curvature hyperbolic space and Euclidean space of manifold
    dimension ``d``; explicit ``dim``/``kappa`` override.
    """
    name = str(kind).lower()
    if name not in _KINDS:
        if len(name) >= 2 and name[0] in "she" and name[1:].isdigit():
            d = int(name[1:])
            if dim is not None and dim != d:
                raise InvalidInputError(
                    f"dim={dim} conflicts with shortcut {name!r}")
            dim = d
            name = {"s": "sphere", "h": "hyperbolic", "e": "euclidean"}[name[0]]
        else:
            raise InvalidInputError(f"unknown manifold kind {kind!r}")
    if dim is None:
        raise InvalidInputError("manifold dimension is required")
    if name == "euclidean":
        if kappa not in (None, 0, 0.0):
            raise InvalidInputError("euclidean space has kappa = 0")
        return Euclidean(dim)
    if name == "sphere":
        return Sphere(dim, 1.0 if kappa is None else kappa)
    return Hyperbolic(dim, -1.0 if kappa is None else kappa)


@dataclass(frozen=True)
class KKCReport:
    """Outcome of the concentration check guaranteeing a unique mean.

    ``binding`` names the tighter of the two constraints; ``slack`` is the
    margin (bound minus support radius) of that constraint, negative when the
    check fails.
    """

    ok: bool
    support_radius: float
    injectivity_bound: float
    curvature_bound: float
    binding: str
    slack: float

    def __bool__(self):
        return self.ok


def kkc_check(support_radius: float, kappa_max: float,
              injectivity_radius: float) -> KKCReport:
    """Check the concentration conditions for a unique minimiser of the
    variance: support radius below half the injectivity radius and, under
    positive curvature, below ``pi / (2 sqrt(kappa_max))``.
    """
    r = float(support_radius)
    if not np.isfinite(r) or r < 0:
        raise InvalidInputError(f"support radius must be >= 0, got {r}")
    inj_bound = float(injectivity_radius) / 2.0
    if kappa_max > 0:
        curv_bound = np.pi / (2.0 * np.sqrt(kappa_max))
    else:
        curv_bound = np.inf
    if inj_bound <= curv_bound:
        binding, bound = "injectivity", inj_bound
    else:
        binding, bound = "curvature", curv_bound
    ok = r < inj_bound and r < curv_bound
    return KKCReport(ok=bool(ok), support_radius=r, injectivity_bound=inj_bound,
                     curvature_bound=curv_bound, binding=binding,
                     slack=bound - r)
