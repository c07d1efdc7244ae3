"""Smooth costs on the sphere.

Every application in this package reduces to the Rayleigh quotient
``g(x) = x^T A x`` for a small dense symmetric ``A``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch
from .manifold import SpherePoint
from .regularizers import Regularizer

EIGENGAP_TOL = 1e-10


class EigengapWarning(UserWarning):
    """The smallest eigenvalue is (numerically) repeated."""


class SmoothCost:
    """Interface for the smooth part ``g`` of the objective.

    Subclasses provide ``value``, ``euclid_grad`` and optionally a
    Lipschitz-type constant ``lipschitz`` (``None`` when unknown).
    """

    lipschitz = None

    def value(self, x) -> float:
        raise NotImplementedError

    def euclid_grad(self, x) -> np.ndarray:
        raise NotImplementedError


class QuadraticCost(SmoothCost):
    """``g(x) = x^T A x``; ``A`` is symmetrized on construction.

    For Gram matrices pass ``factor`` with ``A = factor^T factor``; the value
    is then evaluated as ``||factor x||^2``, which stays accurate near zero
    where ``x^T A x`` bottoms out at about ``eps ||A||``.
    """

    def __init__(self, A, factor=None):
        A = np.array(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionMismatch(f"A must be square, got shape {A.shape}")
        A = 0.5 * (A + A.T)
        A.setflags(write=False)
        self.A = A
        if factor is not None:
            factor = np.array(factor, dtype=float)
            if factor.ndim != 2 or factor.shape[1] != A.shape[0]:
                raise DimensionMismatch(f"factor must have {A.shape[0]} columns, got shape {factor.shape}")
            factor.setflags(write=False)
        self.factor = factor

    @classmethod
    def gram(cls, factor):
        """``A = factor^T factor`` with the factored value evaluation."""
        factor = np.asarray(factor, dtype=float)
        return cls(factor.T @ factor, factor=factor)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def _vec(self, x):
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.dim:
            raise DimensionMismatch(f"expected a vector of length {self.dim}, got {x.size}")
        return x

    def value(self, x):
        x = self._vec(x)
        if self.factor is not None:
            r = self.factor @ x
            return float(r @ r)
        return float(x @ self.A @ x)

    def euclid_grad(self, x):
        return 2.0 * (self.A @ self._vec(x))

    @cached_property
    def lipschitz(self):
        return quad_lipschitz(self)

    def __repr__(self):
        return f"QuadraticCost(dim={self.dim})"


def quad_value(q: QuadraticCost, x) -> float:
    return q.value(x)


def quad_grad(q: QuadraticCost, x) -> np.ndarray:
    return q.euclid_grad(x)


def quad_lipschitz(q: QuadraticCost) -> float:
    """``2 sigma_max(A)``, the pullback constant for add-then-normalize retraction.

    The bound is guaranteed when ``A`` is positive semi-definite. For
    indefinite ``A`` it can fail at points of negative curvature, and the
    line-search is what keeps the iterations safe.
    """
    return 2.0 * float(np.max(np.abs(np.linalg.eigvalsh(q.A))))


def bottom_eigenvector(q: QuadraticCost) -> SpherePoint:
    """Unit eigenvector of the smallest eigenvalue of ``A``.

    The sign is fixed so that the first nonzero coordinate is positive. An
    :class:`EigengapWarning` is emitted when the bottom eigenvalue is repeated.
    """
    w, V = np.linalg.eigh(q.A)
    if w.size > 1 and w[1] - w[0] < EIGENGAP_TOL * max(1.0, abs(w[0])):
        warnings.warn(f"bottom eigengap {w[1] - w[0]:.3g} below {EIGENGAP_TOL:g}", EigengapWarning, stacklevel=2)
    v = V[:, 0]
    nz = np.flatnonzero(np.abs(v) > 1e-14)
    if nz.size and v[nz[0]] < 0:
        v = -v
    return SpherePoint(v)


@dataclass(frozen=True)
class ProblemInstance:
    """The objective ``f = g + h`` on the unit sphere of ``R^dim``."""

    g: SmoothCost
    h: Regularizer
    dim: int

    def f(self, x) -> float:
        return self.g.value(x) + self.h.value(x)
