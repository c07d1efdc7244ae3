"""Unit-sphere primitives: points, tangent vectors, projection and retraction.

The sphere is ``S = {x : ||x||_2 = 1}``. The tangent space at ``x`` is the
set of vectors orthogonal to ``x`` and the retraction is add-then-normalize::

    R_x(v) = (x + v) / ||x + v||

All objects are immutable; arrays held by them are flagged read-only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BaseMismatch, DimensionMismatch, HemisphereViolation, ZeroVector

ZERO_NORM = 1e-12
UNIT_TOL = 1e-9
HEMISPHERE_MARGIN = 1e-9


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpherePoint:
    """A unit-norm vector. Inputs off the sphere are re-normalized."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float).ravel()
        nrm = np.linalg.norm(c)
        if not nrm > ZERO_NORM:
            raise ZeroVector(f"cannot place a vector of norm {nrm:g} on the sphere")
        if abs(nrm - 1.0) > 1e-12:
            c = c / nrm
        object.__setattr__(self, "coords", _frozen(c))

    @property
    def dim(self) -> int:
        return self.coords.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)

    def __neg__(self) -> "SpherePoint":
        return SpherePoint(-self.coords)

    def __repr__(self):
        return f"SpherePoint({np.array2string(self.coords, precision=6)})"


@dataclass(frozen=True, eq=False)
class TangentVector:
    """A vector ``dir`` in the tangent space at ``base``."""

    base: SpherePoint
    dir: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.dir, dtype=float).ravel()
        if d.shape != self.base.coords.shape:
            raise DimensionMismatch(f"tangent of length {d.size} at a point of length {self.base.dim}")
        object.__setattr__(self, "dir", _frozen(d))

    def norm(self) -> float:
        return float(np.linalg.norm(self.dir))

    def scaled(self, alpha: float) -> "TangentVector":
        return TangentVector(self.base, alpha * self.dir)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.dir, dtype=dtype)


def _same_base(x: SpherePoint, v: TangentVector) -> bool:
    return v.base is x or np.array_equal(v.base.coords, x.coords)


def _check_dim(x: SpherePoint, w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float).ravel()
    if w.shape != x.coords.shape:
        raise DimensionMismatch(f"vector of length {w.size} at a point of length {x.dim}")
    return w


def normalize(v) -> SpherePoint:
    """Scale a nonzero vector onto the sphere.

    >>> normalize([3.0, 4.0]).coords
    array([0.6, 0.8])
    """
    v = np.asarray(v, dtype=float).ravel()
    nrm = np.linalg.norm(v)
    if not nrm > ZERO_NORM:
        raise ZeroVector(f"cannot normalize a vector of norm {nrm:g}")
    return SpherePoint(v / nrm)


def tangent_project(x: SpherePoint, w) -> TangentVector:
    """Orthogonal projection ``(I - x x^T) w`` onto the tangent space at ``x``."""
    w = _check_dim(x, w)
    xc = x.coords
    return TangentVector(x, w - np.dot(xc, w) * xc)


def riemannian_gradient(x: SpherePoint, euclid_grad) -> TangentVector:
    """Riemannian gradient of a function whose Euclidean gradient at ``x`` is given."""
    return tangent_project(x, euclid_grad)


def retract(x: SpherePoint, v: TangentVector) -> SpherePoint:
    if not _same_base(x, v):
        raise BaseMismatch("tangent vector is not based at the retraction point")
    # ||x + v|| = sqrt(1 + ||v||^2) >= 1 for tangent v, so this never divides by ~0
    y = x.coords + v.dir
    return SpherePoint(y / np.linalg.norm(y))


def inverse_retract(anchor: SpherePoint, target: SpherePoint) -> TangentVector:
    """Tangent vector ``v`` at ``anchor`` with ``retract(anchor, v) == target``.

    Only defined when the two points lie in the same open hemisphere.
    """
    ip = float(np.dot(target.coords, anchor.coords))
    if not ip > HEMISPHERE_MARGIN:
        raise HemisphereViolation(f"<target, anchor> = {ip:.3g} is not positive")
    return TangentVector(anchor, target.coords / ip - anchor.coords)
