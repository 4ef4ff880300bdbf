"""Curvature callbacks in an orthonormal tangent frame.

An oracle evaluates the (1,3) curvature tensor ``R(u, v)w`` and its covariant
derivative ``(grad_t R)(u, v)w`` on coordinate vectors of length ``dim``.  The
index convention is ``[R(u, v)w]^a = R^a_bcd u^c v^d w^b`` and
``[(grad_t R)(u, v)w]^a = G^a_bcde t^e u^c v^d w^b``, with dense components
laid out as ``R[a, b, c, d]`` and ``G[a, b, c, d, e]``.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .exceptions import InvalidInputError

__all__ = ["CurvatureOracle"]

Trilinear = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
Quadrilinear = Callable[
    [np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]


class CurvatureOracle:
    """Pointwise curvature operator ``R`` with optional derivative ``grad R``.

    ``apply_r(u, v, w)`` and ``apply_grad_r(t, u, v, w)`` take and return
    coordinate vectors; a missing derivative callback means ``grad R == 0``
    (space forms and, more generally, symmetric spaces).
    """

    def __init__(self, dim: int, apply_r: Trilinear,
                 apply_grad_r: Optional[Quadrilinear] = None):
        if dim < 1:
            raise InvalidInputError(f"dim must be >= 1, got {dim}")
        self.dim = int(dim)
        self._apply_r = apply_r
        self._apply_grad_r = apply_grad_r

    # -- constructors -----------------------------------------------------

    @classmethod
    def space_form(cls, dim: int, kappa: float) -> "CurvatureOracle":
        """Constant-curvature oracle ``R(u,v)w = kappa (<v,w> u - <u,w> v)``,
        with identically zero covariant derivative."""
        k = float(kappa)

        def apply_r(u, v, w):
            u = np.asarray(u, float)
            v = np.asarray(v, float)
            w = np.asarray(w, float)
            return k * (np.dot(v, w) * u - np.dot(u, w) * v)

        return cls(dim, apply_r, None)

    @classmethod
    def flat(cls, dim: int) -> "CurvatureOracle":
        return cls.space_form(dim, 0.0)

    @classmethod
    def from_components(cls, r_components,
                        grad_r_components=None) -> "CurvatureOracle":
        """Oracle backed by dense component arrays ``R[a,b,c,d]`` and
        optionally ``G[a,b,c,d,e]``."""
        rt = np.asarray(r_components, dtype=float)
        if rt.ndim != 4 or len(set(rt.shape)) != 1:
            raise InvalidInputError("R components must have shape (d, d, d, d)")
        dim = rt.shape[0]
        gt = None
        if grad_r_components is not None:
            gt = np.asarray(grad_r_components, dtype=float)
            if gt.shape != (dim,) * 5:
                raise InvalidInputError(
                    "grad R components must have shape (d, d, d, d, d)")

        def apply_r(u, v, w):
            return np.einsum("abcd,c,d,b->a", rt, u, v, w)

        apply_grad_r = None
        if gt is not None:
            def apply_grad_r(t, u, v, w):
                return np.einsum("abcde,e,c,d,b->a", gt, t, u, v, w)

        oracle = cls(dim, apply_r, apply_grad_r)
        oracle._r_cache = rt
        if gt is not None:
            oracle._grad_cache = gt
        return oracle

    # -- evaluation ---------------------------------------------------------

    @property
    def has_grad(self) -> bool:
        return self._apply_grad_r is not None

    def r(self, u, v, w) -> np.ndarray:
        return np.asarray(self._apply_r(u, v, w), dtype=float)

    def grad_r(self, t, u, v, w) -> np.ndarray:
        if self._apply_grad_r is None:
            return np.zeros(self.dim)
        return np.asarray(self._apply_grad_r(t, u, v, w), dtype=float)

    # -- dense components ---------------------------------------------------

    def r_components(self) -> np.ndarray:
        """Dense ``R[a, b, c, d] = [R(e_c, e_d) e_b]^a``."""
        cached = getattr(self, "_r_cache", None)
        if cached is not None:
            return cached
        d = self.dim
        eye = np.eye(d)
        rt = np.empty((d, d, d, d))
        for b in range(d):
            for c in range(d):
                for dd in range(d):
                    rt[:, b, c, dd] = self.r(eye[c], eye[dd], eye[b])
        self._r_cache = rt
        return rt

    def grad_r_components(self) -> np.ndarray:
        """Dense ``G[a, b, c, d, e] = [(grad_{e_e} R)(e_c, e_d) e_b]^a``."""
        cached = getattr(self, "_grad_cache", None)
        if cached is not None:
            return cached
        d = self.dim
        gt = np.zeros((d, d, d, d, d))
        if self.has_grad:
            eye = np.eye(d)
            for b in range(d):
                for c in range(d):
                    for dd in range(d):
                        for e in range(d):
                            gt[:, b, c, dd, e] = self.grad_r(
                                eye[e], eye[c], eye[dd], eye[b])
        self._grad_cache = gt
        return gt
