"""Fundamental matrix estimation with nuclear-norm regularization.

The algebraic cost ``(1/m) sum (p'_i^T F p_i)^2`` equals ``x^T A x`` with
``x = vec(F)`` (column-wise) and ``A = H^T H / m``, where row ``i`` of ``H``
is ``kron(p_i, p'_i)``. Adding ``lam ||F||_*`` pushes the smallest singular
value to zero during the solve instead of rounding it afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import SolverConfig, solve
from ..errors import DegenerateLine, DimensionMismatch, RankDeficiencyViolation, TooFewCorrespondences
from ..problems import ProblemInstance, QuadraticCost, bottom_eigenvector
from ..regularizers import Full, NuclearReg
from .geometry import homogenize, isotropic_normalization, look_at, skew, triangulate

VEC3 = Full(3, 3)
VARIANT_ITERS = {"full": None, "trunc5": 5, "trunc10": 10}


@dataclass(frozen=True)
class CorrespondenceSet:
    """Matched pixel coordinates ``points_a[i] <-> points_b[i]``."""

    points_a: np.ndarray
    points_b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.points_a, dtype=float)
        b = np.asarray(self.points_b, dtype=float)
        if a.shape != b.shape or a.ndim != 2 or a.shape[1] != 2:
            raise DimensionMismatch(f"expected two (m, 2) arrays, got {a.shape} and {b.shape}")
        object.__setattr__(self, "points_a", a)
        object.__setattr__(self, "points_b", b)

    @property
    def m(self) -> int:
        return self.points_a.shape[0]

    def homogeneous(self):
        return homogenize(self.points_a), homogenize(self.points_b)


def hartley_normalize(c: CorrespondenceSet):
    """Normalize each image independently.

    Returns ``(normalized_set, (T_a, T_b))``.
    """
    Ta = isotropic_normalization(c.points_a)
    Tb = isotropic_normalization(c.points_b)
    return CorrespondenceSet(Ta.apply(c.points_a), Tb.apply(c.points_b)), (Ta, Tb)


def _require_eight(c):
    if c.m < 8:
        raise TooFewCorrespondences(f"need at least 8 correspondences, got {c.m}")


def design_rows(c: CorrespondenceSet) -> np.ndarray:
    pa, pb = c.homogeneous()
    return np.einsum("mi,mj->mij", pa, pb).reshape(c.m, 9)


def build_fundmat_design(c: CorrespondenceSet) -> QuadraticCost:
    """``A = H^T H / m`` for the coordinates in ``c`` as given (no normalization)."""
    _require_eight(c)
    H = design_rows(c)
    return QuadraticCost.gram(H / np.sqrt(c.m))


def rank2(F) -> np.ndarray:
    U, S, Vt = np.linalg.svd(F)
    S[2] = 0.0
    return (U * S) @ Vt


def _canonical(F):
    F = F / np.linalg.norm(F)
    i = np.argmax(np.abs(F))
    return F if F.flat[i] > 0 else -F


def _denormalize(Fn, transforms):
    Ta, Tb = transforms
    return _canonical(Tb.matrix.T @ Fn @ Ta.matrix)


def eight_point(c: CorrespondenceSet) -> np.ndarray:
    """Normalized eight-point estimate, rank-2 and unit Frobenius norm."""
    _require_eight(c)
    cn, transforms = hartley_normalize(c)
    x = bottom_eigenvector(build_fundmat_design(cn))
    return _denormalize(rank2(VEC3.mat(x.coords)), transforms)


@dataclass
class FundmatResult:
    F: np.ndarray
    F_unrounded: np.ndarray
    trace: object
    transforms: tuple


def pgs_fundmat(c: CorrespondenceSet, lam=0.01, variant="full", cfg: SolverConfig | None = None, full_output=False):
    """Nuclear-norm regularized estimate of ``F``.

    ``variant`` is ``"full"`` (run to tolerance), ``"trunc5"`` or
    ``"trunc10"`` (cap the solver at 5 or 10 iterations). The solver starts
    from the eight-point eigenvector and works in normalized coordinates.
    The result is rank-2 rounded, de-normalized and scaled to unit
    Frobenius norm. ``full_output`` returns a :class:`FundmatResult` that
    also holds the unrounded normalized-coordinate solution and the trace.
    """
    _require_eight(c)
    if lam < 0:
        raise ValueError(f"lam must be nonnegative, got {lam}")
    try:
        cap = VARIANT_ITERS[variant]
    except KeyError:
        raise ValueError(f"unknown variant {variant!r}; choose from {sorted(VARIANT_ITERS)}") from None
    cfg = cfg or SolverConfig()
    if cap is not None:
        cfg = cfg.with_(max_iters=cap)
    cn, transforms = hartley_normalize(c)
    q = build_fundmat_design(cn)
    x0 = bottom_eigenvector(q)
    x, trace = solve(ProblemInstance(q, NuclearReg(lam, VEC3), 9), x0, cfg)
    Fn = VEC3.mat(x.coords)
    F = _denormalize(rank2(Fn), transforms)
    if full_output:
        return FundmatResult(F=F, F_unrounded=Fn.copy(), trace=trace, transforms=transforms)
    return F


def _line_distances(points, lines):
    den = lines[:, 0] ** 2 + lines[:, 1] ** 2
    if np.any(den < 1e-18):
        raise DegenerateLine("an epipolar line has vanishing normal")
    return np.abs(np.einsum("ij,ij->i", points, lines)) / np.sqrt(den)


def epipolar_distance(F, c: CorrespondenceSet) -> float:
    """Mean point-to-epipolar-line distance over both images, in pixels."""
    F = np.asarray(F, dtype=float)
    pa, pb = c.homogeneous()
    d_b = _line_distances(pb, pa @ F.T)  # l' = F p
    d_a = _line_distances(pa, pb @ F)  # l = F^T p'
    return float(0.5 * (d_a.mean() + d_b.mean()))


def canonical_cameras(F):
    """Camera pair ``[I | 0]``, ``[[e']_x F | e']`` consistent with ``F``."""
    e2 = np.linalg.svd(F)[0][:, 2]  # F^T e' = 0
    P1 = np.hstack([np.eye(3), np.zeros((3, 1))])
    P2 = np.hstack([skew(e2) @ F, e2[:, None]])
    return P1, P2


def reprojection_error(F, c: CorrespondenceSet) -> float:
    """Mean reprojection distance of DLT-triangulated points, both views, in pixels."""
    F = np.asarray(F, dtype=float)
    S = np.linalg.svd(F, compute_uv=False)
    if S[2] > 1e-6 * S[0]:
        raise RankDeficiencyViolation(f"F has sigma_3 / sigma_1 = {S[2] / S[0]:.3g}; round it to rank 2 first")
    # triangulate in normalized coordinates for conditioning, measure in pixels
    cn, (Ta, Tb) = hartley_normalize(c)
    P1, P2 = canonical_cameras(Tb.inverse.T @ F @ Ta.inverse)
    X = triangulate([P1, P2], np.stack([cn.points_a, cn.points_b]))
    err = 0.0
    for P, T, pts in ((P1, Ta, c.points_a), (P2, Tb, c.points_b)):
        proj = X @ (T.inverse @ P).T
        proj = proj[:, :2] / proj[:, 2:]
        err += np.linalg.norm(proj - pts, axis=1).mean()
    return float(err / 2)


def gen_two_view(seed, m=100, noise_px=1.0, image_size=(640, 480), focal=800.0):
    """Synthetic two-view correspondences with Gaussian pixel noise.

    Points are drawn in a box in front of two cameras sharing intrinsics.
    Returns ``(correspondences, F_true)`` with ``F_true`` of unit norm.
    """
    if m < 8:
        raise TooFewCorrespondences(f"need at least 8 correspondences, got {m}")
    rng = np.random.default_rng(seed)
    w, h = image_size
    K = np.array([[focal, 0.0, w / 2], [0.0, focal, h / 2], [0.0, 0.0, 1.0]])
    X = rng.uniform([-2.0, -1.5, 6.0], [2.0, 1.5, 10.0], size=(m, 3))
    target = np.array([0.0, 0.0, 8.0])
    c2 = np.array([rng.uniform(1.5, 3.0), rng.uniform(-0.5, 0.5), rng.uniform(0.0, 1.5)])
    R1, t1 = np.eye(3), np.zeros(3)
    R2 = look_at(c2, target)
    t2 = -R2 @ c2
    P1 = K @ np.hstack([R1, t1[:, None]])
    P2 = K @ np.hstack([R2, t2[:, None]])
    Xh = homogenize(X)
    pa = Xh @ P1.T
    pb = Xh @ P2.T
    pa = pa[:, :2] / pa[:, 2:]
    pb = pb[:, :2] / pb[:, 2:]
    pa = pa + noise_px * rng.standard_normal(pa.shape)
    pb = pb + noise_px * rng.standard_normal(pb.shape)
    Kinv = np.linalg.inv(K)
    F = Kinv.T @ skew(t2) @ R2 @ Kinv  # relative pose of camera 2 w.r.t. camera 1 = (R2, t2)
    return CorrespondenceSet(pa, pb), _canonical(F)
