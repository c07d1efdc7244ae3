"""Linear self-calibration of cameras with varying focal length.

Projective cameras ``P~_i`` differ from Euclidean ones by a common 4x4
transform ``H``. The dual absolute quadric ``Q = H diag(1,1,1,0) H^T``
projects to ``P~ Q P~^T ~ K K^T``; with square pixels and a centred
principal point each camera gives four linear constraints on the ten
upper-triangular entries of ``Q``. Stacking them yields ``x^T A x`` on the
sphere of ``R^10``.

When every principal axis passes through one point the constraint system
gains a rank-1 solution ``X X^T`` (``X`` the common point) next to the true
rank-3 one. Nuclear-norm penalties favour low rank during the solve; the
additional spectral term keeps the solver off the rank-1 solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial.transform import Rotation

from ..core import SolverConfig, solve
from ..errors import NegativeEigenvalues, RectificationDegenerate, TooFewCameras
from ..manifold import SpherePoint, normalize
from ..problems import ProblemInstance, QuadraticCost, bottom_eigenvector
from ..regularizers import Regularizer, SymUpperTri
from .geometry import dehomogenize, homogenize, look_at, procrustes_error, resect, rq, triangulate

VEC4 = SymUpperTri(4, weighted=True)
CANONICAL_DAQ = np.diag([1.0, 1.0, 1.0, 0.0])
SCENE_DIAMETER = 3.0
RECT_FLOOR = 1e-3


@dataclass(frozen=True)
class ProjectiveCameraSet:
    """Cameras and image points in normalized image coordinates.

    ``T`` maps normalized to pixel coordinates. ``frame`` accumulates the
    4x4 transforms applied to the cameras since generation, so that
    ``cameras[i] ~ original[i] @ frame``. The ``gt_*`` fields hold synthetic
    ground truth and are used only for scoring.
    """

    cameras: np.ndarray  # (n, 3, 4)
    points: np.ndarray  # (n, m, 2)
    T: np.ndarray = field(default_factory=lambda: np.eye(3))
    image_dims: tuple = (4000, 3000)
    frame: np.ndarray = field(default_factory=lambda: np.eye(4))
    gt_points: np.ndarray | None = None
    gt_K: np.ndarray | None = None
    gt_centers: np.ndarray | None = None
    gt_cameras: np.ndarray | None = None  # (n, 3, 4) Euclidean, pixel units

    @property
    def n(self) -> int:
        return len(self.cameras)


def _bilinear_row(u, w):
    """Row ``r`` with ``r @ vec_t(Q) = u^T Q w`` for symmetric ``Q``."""
    return VEC4.pairing(np.outer(u, w))


def selfcal_rows(P) -> np.ndarray:
    """The four constraint rows of one camera (4 x 10)."""
    a, b, c = P
    return np.array([
        _bilinear_row(a, a) - _bilinear_row(b, b),
        _bilinear_row(a, b),
        _bilinear_row(a, c),
        _bilinear_row(b, c),
    ])


def build_selfcal_design(p: ProjectiveCameraSet) -> QuadraticCost:
    """``A = (1/n) sum M_i^T M_i`` over the cameras of ``p``."""
    if p.n < 3:
        raise TooFewCameras(f"need at least 3 cameras, got {p.n}")
    M = np.vstack([selfcal_rows(P) for P in p.cameras])
    return QuadraticCost.gram(M / np.sqrt(p.n))


def upgrade_from_quadric(Q):
    """Rank-3 rounding of a dual absolute quadric and the upgrading transform.

    The eigenvalue of smallest magnitude is set to zero and the overall sign
    chosen so that the other three are positive. Returns ``(Q3, H)`` with
    ``Q3 = H diag(1,1,1,0) H^T``. Raises :class:`NegativeEigenvalues` when
    the three remaining eigenvalues do not share a sign, which is what a
    rank-1 or otherwise non-physical estimate looks like.
    """
    Q = np.asarray(Q, dtype=float)
    w, U = np.linalg.eigh(0.5 * (Q + Q.T))
    order = np.argsort(-np.abs(w))
    w, U = w[order], U[:, order]
    if np.all(w[:3] < 0):
        w = -w
    if not np.all(w[:3] > 0):
        raise NegativeEigenvalues(f"quadric eigenvalues {w} do not have three of one sign after rank-3 rounding")
    w[3] = 0.0
    Q3 = (U * w) @ U.T
    H = U * np.array([np.sqrt(w[0]), np.sqrt(w[1]), np.sqrt(w[2]), 1.0])
    return Q3, H


def _psd_upgrade(Q):
    """Upgrade from the closest rank-3 positive semi-definite quadric.

    Eigenvalues in a projective frame carry no metric meaning, so unlike
    :func:`upgrade_from_quadric` the sign is chosen by majority and the
    algebraically smallest eigenvalue is dropped. A mixed-sign estimate falls
    back to the three largest magnitudes, floored at ``RECT_FLOOR`` times the
    largest so the frame change stays well conditioned.
    """
    w, U = np.linalg.eigh(Q)
    if np.sum(w > 0) < np.sum(w < 0) or (np.sum(w > 0) == np.sum(w < 0) and w.sum() < 0):
        w = -w[::-1]
        U = U[:, ::-1]
    w, U = w[::-1], U[:, ::-1]
    if not np.all(w[:3] > 0):
        # nearly rank-deficient estimate: any invertible frame change will do, so
        # keep the three largest magnitudes, floored relative to the largest
        order = np.argsort(-np.abs(w))
        w, U = np.abs(w[order]), U[:, order]
        if not w[0] > 0:
            raise RectificationDegenerate("rectifying quadric is zero")
        w = np.maximum(w, RECT_FLOOR * w[0])
    return U * np.array([np.sqrt(w[0]), np.sqrt(w[1]), np.sqrt(w[2]), 1.0])


def _transform(p: ProjectiveCameraSet, H) -> ProjectiveCameraSet:
    """Move the cameras by ``H``; each is rescaled so its left 3x3 block has unit Frobenius norm."""
    cams = np.array([P @ H for P in p.cameras])
    cams /= np.linalg.norm(cams[:, :, :3], axis=(1, 2), keepdims=True)
    return replace(p, cameras=cams, frame=p.frame @ H)


def guessed_focal(p: ProjectiveCameraSet) -> float:
    """Focal length guess ``2 sqrt(m_x^2 + m_y^2)`` in normalized units.

    ``m_x`` and ``m_y`` are the largest coordinate magnitudes an image point
    can take, i.e. the half image size divided by the normalization scale.
    """
    s = p.T[0, 0]
    mx, my = 0.5 * p.image_dims[0] / s, 0.5 * p.image_dims[1] / s
    return 2.0 * np.hypot(mx, my)


def quasi_euclidean_rectify(p: ProjectiveCameraSet, image_dims=None) -> ProjectiveCameraSet:
    """Bring the cameras close to a Euclidean frame using a guessed focal length.

    With ``K = diag(f, f, 1)`` fixed, ``K^-1 P~ Q P~^T K^-T ~ I`` gives five
    linear equations per camera, solved in a frame where the triangulated
    cloud is centred with mean radius ``sqrt(3)``. The least-squares ``Q`` is
    rounded to rank 3 and the cameras are moved to the frame of its
    upgrading transform, then scaled so the cloud has unit mean spread.
    """
    if p.n < 3:
        raise TooFewCameras(f"need at least 3 cameras, got {p.n}")
    if image_dims is not None:
        p = replace(p, image_dims=tuple(image_dims))
    p = _transform(p, _projective_conditioning(p))
    Kinv = np.diag([1.0 / guessed_focal(p), 1.0 / guessed_focal(p), 1.0])
    rows = []
    for P in p.cameras:
        a, b, c = Kinv @ P
        rows += [
            _bilinear_row(a, b),
            _bilinear_row(a, c),
            _bilinear_row(b, c),
            _bilinear_row(a, a) - _bilinear_row(c, c),
            _bilinear_row(b, b) - _bilinear_row(c, c),
        ]
    D = np.array(rows)
    _, S, Vt = np.linalg.svd(D)
    if S[-2] <= 1e-10 * S[0]:
        raise RectificationDegenerate(f"rectification system has a null space of dimension > 1 (singular values {S[-3:]})")
    H = _psd_upgrade(VEC4.mat(Vt[-1]))
    r = _transform(p, orient_upgrade(p, H))
    return _transform(r, _similarity_normalization(r))


def _projective_conditioning(p: ProjectiveCameraSet) -> np.ndarray:
    """Frame change taking the triangulated cloud to zero centroid and mean radius ``sqrt(3)``."""
    X = dehomogenize(triangulate(p.cameras, p.points))
    c = X.mean(axis=0)
    d = np.linalg.norm(X - c, axis=1).mean() / np.sqrt(3.0)
    G = np.eye(4)
    G[:3, :3] *= d
    G[:3, 3] = c
    return G


def _similarity_normalization(p: ProjectiveCameraSet) -> np.ndarray:
    """Isotropic scaling about the origin giving the triangulated cloud unit mean distance to its centroid."""
    X = dehomogenize(triangulate(p.cameras, p.points))
    d = np.linalg.norm(X - X.mean(axis=0), axis=1).mean()
    return np.diag([d, d, d, 1.0])


@dataclass
class SelfCalResult:
    """Rounded quadric ``Q``, upgrade ``H`` with ``Q = H diag(1,1,1,0) H^T``, and per-camera ``K`` in pixels."""

    Q: np.ndarray
    H: np.ndarray
    K: np.ndarray
    x: SpherePoint
    trace: object = None


def initial_daq() -> SpherePoint:
    return normalize(VEC4.vec(CANONICAL_DAQ))


def selfcal_solve(p: ProjectiveCameraSet, reg: Regularizer | None = None, cfg: SolverConfig | None = None, early_stop=None):
    """Estimate the dual absolute quadric and the metric upgrade.

    ``reg=None`` is the classical linear method (bottom eigenvector of
    ``A``). Otherwise the regularized problem is solved from the canonical
    quadric; ``early_stop`` caps the number of solver iterations.
    """
    q = build_selfcal_design(p)
    trace = None
    if reg is None:
        x = bottom_eigenvector(q)
    else:
        cfg = cfg or SolverConfig()
        if early_stop is not None:
            cfg = cfg.with_(max_iters=int(early_stop))
        x, trace = solve(ProblemInstance(q, reg, VEC4.size), initial_daq(), cfg)
    Q, H = upgrade_from_quadric(VEC4.mat(x.coords))
    H = orient_upgrade(p, H)
    K = np.array([_intrinsics(p.T @ P @ H) for P in p.cameras])
    return SelfCalResult(Q=Q, H=H, K=K, x=x, trace=trace)


def orient_upgrade(p: ProjectiveCameraSet, H) -> np.ndarray:
    """Resolve the mirror ambiguity of ``H`` so that most points lie in front of the cameras.

    ``H`` and ``H diag(1,1,1,-1)`` give the same quadric but mirror-image
    scenes; exactly one of them has positive depths.
    """
    Xp = triangulate(p.cameras, p.points)
    X = Xp @ np.linalg.inv(H).T
    votes = 0.0
    for P in p.cameras:
        M = (P @ H)[:, :3]
        votes += np.sum(np.sign(np.linalg.det(M)) * np.sign(Xp @ P[2]) * np.sign(X[:, 3]))
    return H if votes >= 0 else H * np.array([1.0, 1.0, 1.0, -1.0])


def _intrinsics(P):
    K, _ = rq(P[:, :3])
    return K / K[2, 2]


def metric_cameras(p: ProjectiveCameraSet, H) -> np.ndarray:
    return np.array([P @ H for P in p.cameras])


def reconstruction_error(p: ProjectiveCameraSet, H) -> float:
    """Procrustes RMS of the triangulated cloud as a fraction of the scene diameter."""
    if p.gt_points is None:
        raise ValueError("camera set carries no ground-truth points")
    # triangulate in the given frame, where the cameras are conditioned, then upgrade the points
    X = triangulate(p.cameras, p.points) @ np.linalg.inv(H).T
    with np.errstate(divide="ignore", invalid="ignore"):
        est = dehomogenize(X)
    if not np.all(np.isfinite(est)):
        return float("inf")
    return procrustes_error(est, p.gt_points) / SCENE_DIAMETER


def gen_cms_scene(seed, n_pts=50, n_cams=7, delta_cam=0.0, delta_img=0.0, image_dims=(4000, 3000), radius=30.0):
    """Synthetic projective reconstruction around a critical motion sequence.

    Points fill a ball of diameter 3 and the cameras sit on a circle of
    radius ``radius`` around the cloud (small random elevation, random
    roll), each aimed at the centroid and then rotated by axis-angle noise
    with standard deviation ``delta_cam`` radians. Focal lengths vary per
    camera; principal points are at the image centre. Image points receive
    Gaussian noise ``delta_img`` pixels. The projective cameras are resected
    from the noisy normalized image points in a projective frame where the
    first camera is ``[I | 0]``.
    """
    if n_cams < 3:
        raise TooFewCameras(f"need at least 3 cameras, got {n_cams}")
    rng = np.random.default_rng(seed)
    d = rng.standard_normal((n_pts, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    X = d * (0.5 * SCENE_DIAMETER * rng.uniform(size=(n_pts, 1)) ** (1 / 3))
    centroid = X.mean(axis=0)

    Ix, Iy = image_dims
    azim = 2 * np.pi * (np.arange(n_cams) + rng.uniform(-0.25, 0.25, n_cams)) / n_cams
    elev = rng.uniform(-0.3, 0.3, n_cams)
    centers = centroid + radius * np.column_stack([np.cos(elev) * np.cos(azim), np.sin(elev), np.cos(elev) * np.sin(azim)])
    focal = rng.uniform(4000.0, 6500.0, n_cams)
    Ks, Ps = [], []
    for C, f in zip(centers, focal):
        R = look_at(C, centroid)
        roll = Rotation.from_euler("z", rng.uniform(-np.pi, np.pi)).as_matrix()
        R = roll @ R
        if delta_cam > 0:
            R = R @ Rotation.from_rotvec(delta_cam * rng.standard_normal(3)).as_matrix()
        K = np.array([[f, 0.0, Ix / 2], [0.0, f, Iy / 2], [0.0, 0.0, 1.0]])
        Ks.append(K)
        Ps.append(K @ np.hstack([R, (-R @ C)[:, None]]))

    Xh = homogenize(X)
    pix = np.array([dehomogenize(Xh @ P.T) for P in Ps])
    pix = pix + delta_img * rng.standard_normal(pix.shape)

    s = np.linalg.norm(pix - [Ix / 2, Iy / 2], axis=2).mean()
    T = np.array([[s, 0.0, Ix / 2], [0.0, s, Iy / 2], [0.0, 0.0, 1.0]])
    norm_pts = (pix - [Ix / 2, Iy / 2]) / s

    # projective frame in the gauge of the first camera: P~_1 ~ [I | 0]
    P1 = np.linalg.inv(T) @ Ps[0]
    P1 /= np.linalg.norm(P1)
    Hp = np.vstack([P1, rng.standard_normal(4) / 2.0])
    Xp = Xh @ Hp.T
    Xp /= np.linalg.norm(Xp, axis=1, keepdims=True)
    cams = np.array([resect(Xp, norm_pts[i]) for i in range(n_cams)])
    return ProjectiveCameraSet(
        cameras=cams,
        points=norm_pts,
        T=T,
        image_dims=(Ix, Iy),
        gt_points=X,
        gt_K=np.array(Ks),
        gt_centers=centers,
        gt_cameras=np.array(Ps),
    )
