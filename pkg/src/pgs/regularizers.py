"""Convex, absolutely homogeneous regularizers and their proximal operators.

Every regularizer ``h`` here satisfies ``h(a x) = |a| h(x)``. The proximal
operator is::

    prox_{t h}(w) = argmin_x  t h(x) + 0.5 ||x - w||^2

and every ``prox`` below is closed-form. Matrix norms act on a vector state
through a :class:`Matricizer` that maps vectors to matrices and back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import isotonic_regression

from .errors import DimensionMismatch, NegativeScale


class Matricizer:
    """Bijection between state vectors and matrices."""

    size: int

    def mat(self, x) -> np.ndarray:
        raise NotImplementedError

    def vec(self, M) -> np.ndarray:
        raise NotImplementedError

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.size:
            raise DimensionMismatch(f"expected a vector of length {self.size}, got {x.size}")
        return x


@dataclass(frozen=True)
class Full(Matricizer):
    """Column-wise (Fortran order) vectorization of a ``rows x cols`` matrix."""

    rows: int
    cols: int

    @property
    def size(self):
        return self.rows * self.cols

    def mat(self, x):
        return self._check(x).reshape(self.rows, self.cols, order="F")

    def vec(self, M):
        M = np.asarray(M, dtype=float)
        if M.shape != (self.rows, self.cols):
            raise DimensionMismatch(f"expected shape {(self.rows, self.cols)}, got {M.shape}")
        return M.ravel(order="F").copy()


@dataclass(frozen=True)
class SymUpperTri(Matricizer):
    """Upper-triangular entries of a symmetric ``dim x dim`` matrix, row by row.

    By default no weighting is applied to off-diagonal entries, so the map is
    not an isometry between the vector 2-norm and the Frobenius norm and the
    matrix-space prox of a matrix norm is only approximately the prox of
    ``x -> ||mat(x)||``. With ``weighted=True`` off-diagonal entries are
    scaled by ``sqrt(2)``; the map is then an isometry and the prox is exact.
    """

    dim: int
    weighted: bool = False

    @property
    def size(self):
        return self.dim * (self.dim + 1) // 2

    def _index(self):
        return np.triu_indices(self.dim)

    def _weights(self):
        i, j = self._index()
        return np.where(i == j, 1.0, np.sqrt(2.0) if self.weighted else 1.0)

    def mat(self, x):
        x = self._check(x) / self._weights()
        M = np.zeros((self.dim, self.dim))
        iu = self._index()
        M[iu] = x
        M.T[iu] = x
        return M

    def vec(self, M):
        M = np.asarray(M, dtype=float)
        if M.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"expected shape {(self.dim, self.dim)}, got {M.shape}")
        return M[self._index()] * self._weights()

    def pairing(self, M):
        """Vector ``r`` with ``r @ x = <M, mat(x)>_F`` for every ``x``."""
        M = np.asarray(M, dtype=float)
        i, j = self._index()
        S = M + M.T
        r = np.where(i == j, M[i, j], S[i, j])
        return r / self._weights()


def _check_scale(s):
    if s < 0:
        raise NegativeScale(f"proximal scale must be nonnegative, got {s}")


def l1_prox(w, s):
    """Soft thresholding ``sign(w) * max(|w| - s, 0)``.

    >>> l1_prox([1.0, -0.2, 0.7], 0.5)
    array([0.5, 0. , 0.2])
    """
    _check_scale(s)
    w = np.asarray(w, dtype=float)
    if s == 0:
        return w.copy()
    return np.sign(w) * np.maximum(np.abs(w) - s, 0.0)


def _shrink_singular_values(w, m: Matricizer, shrink):
    w = m._check(w)
    U, S, Vt = np.linalg.svd(m.mat(w), full_matrices=False)
    return m.vec((U * shrink(S)) @ Vt)


def nuclear_prox(w, s, m: Matricizer):
    """Singular value soft thresholding of ``m.mat(w)`` by ``s``."""
    _check_scale(s)
    if s == 0:
        return m._check(w).copy()
    return _shrink_singular_values(w, m, lambda S: np.maximum(S - s, 0.0))


def _nuclear_spectral_values(S, s1, s2, exact=True):
    # S sorted descending (numpy SVD convention)
    weights = np.full(S.shape, float(s1))
    weights[0] += s2
    if not exact:
        return np.maximum(S - weights, 0.0)
    # Weights are non-increasing, so the penalty is an ordered weighted l1 norm
    # of the singular values: shrink, project onto non-increasing sequences, clip.
    fit = isotonic_regression(S - weights, increasing=False).x
    return np.maximum(fit, 0.0)


def nuclear_spectral_prox(w, s1, s2, m: Matricizer, exact=True):
    """Proximal operator of ``s1 ||mat(w)||_* + s2 ||mat(w)||_2``.

    The singular values are shrunk by ``s1``, and the largest by an extra
    ``s2``. When the largest value falls below the second one after this
    shift (``sigma_1 - sigma_2 < s2``), the exact proximal point levels the
    top values instead; pass ``exact=False`` to get the plain shifted values
    ``(sigma - s1 - s2 e_1)_+`` regardless of ordering.
    """
    _check_scale(s1)
    _check_scale(s2)
    if s1 == 0 and s2 == 0:
        return m._check(w).copy()
    return _shrink_singular_values(w, m, lambda S: _nuclear_spectral_values(S, s1, s2, exact))


class Regularizer:
    """Interface for ``h``: ``value(x) >= 0`` and ``prox(w, t)`` for ``t >= 0``."""

    def value(self, x) -> float:
        raise NotImplementedError

    def prox(self, w, t) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x):
        return self.value(x)


@dataclass(frozen=True)
class ZeroReg(Regularizer):
    def value(self, x):
        return 0.0

    def prox(self, w, t):
        _check_scale(t)
        return np.array(w, dtype=float)


@dataclass(frozen=True)
class L1Reg(Regularizer):
    lam: float

    def value(self, x):
        return self.lam * float(np.sum(np.abs(x)))

    def prox(self, w, t):
        _check_scale(t)
        return l1_prox(w, t * self.lam)


@dataclass(frozen=True)
class NuclearReg(Regularizer):
    lam: float
    matricizer: Matricizer

    def value(self, x):
        S = np.linalg.svd(self.matricizer.mat(x), compute_uv=False)
        return self.lam * float(S.sum())

    def prox(self, w, t):
        _check_scale(t)
        return nuclear_prox(w, t * self.lam, self.matricizer)


@dataclass(frozen=True)
class NuclearSpectralReg(Regularizer):
    lam1: float
    lam2: float
    matricizer: Matricizer
    exact: bool = True

    def value(self, x):
        S = np.linalg.svd(self.matricizer.mat(x), compute_uv=False)
        return self.lam1 * float(S.sum()) + self.lam2 * float(S[0])

    def prox(self, w, t):
        _check_scale(t)
        return nuclear_spectral_prox(w, t * self.lam1, t * self.lam2, self.matricizer, self.exact)


def reg_value(h: Regularizer, x) -> float:
    return h.value(x)
