"""Projective-geometry helpers shared by the applications."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import rq as _rq

from ..errors import DegenerateCloud, DimensionMismatch


def homogenize(points) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    return np.hstack([points, np.ones((points.shape[0], 1))])


def dehomogenize(points) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    return points[:, :-1] / points[:, -1:]


def skew(v) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


@dataclass(frozen=True)
class NormalizationTransform:
    """Similarity ``T`` taking pixel coordinates to normalized coordinates."""

    matrix: np.ndarray

    @property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.matrix)

    def apply(self, points) -> np.ndarray:
        return dehomogenize(homogenize(points) @ self.matrix.T)

    def unapply(self, points) -> np.ndarray:
        return dehomogenize(homogenize(points) @ self.inverse.T)


def isotropic_normalization(points) -> NormalizationTransform:
    """Centroid to the origin, mean distance to the origin ``sqrt(2)``."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        raise DimensionMismatch(f"expected an (m, 2) array, got shape {points.shape}")
    centroid = points.mean(axis=0)
    mean_dist = np.linalg.norm(points - centroid, axis=1).mean()
    if not mean_dist > 1e-12:
        raise DegenerateCloud("all points coincide")
    s = np.sqrt(2.0) / mean_dist
    T = np.array([[s, 0.0, -s * centroid[0]], [0.0, s, -s * centroid[1]], [0.0, 0.0, 1.0]])
    return NormalizationTransform(T)


def triangulate(cameras, points) -> np.ndarray:
    """Linear (DLT) triangulation of one 3D point per track.

    ``cameras`` is a sequence of ``3 x 4`` matrices and ``points`` an array
    of shape ``(n_cams, n_points, 2)``. Returns homogeneous points with
    shape ``(n_points, 4)`` and unit norm.
    """
    cameras = np.asarray(cameras, dtype=float)
    points = np.asarray(points, dtype=float)
    n_pts = points.shape[1]
    out = np.empty((n_pts, 4))
    for j in range(n_pts):
        rows = []
        for P, (u, v) in zip(cameras, points[:, j]):
            rows.append(u * P[2] - P[0])
            rows.append(v * P[2] - P[1])
        D = np.array(rows)
        D /= np.linalg.norm(D, axis=1, keepdims=True)
        out[j] = np.linalg.svd(D)[2][-1]
    return out


def look_at(center, target, up=(0.0, 1.0, 0.0)) -> np.ndarray:
    """World-to-camera rotation whose optical axis points from ``center`` to ``target``."""
    z = np.asarray(target, dtype=float) - np.asarray(center, dtype=float)
    z = z / np.linalg.norm(z)
    x = np.cross(up, z)
    x /= np.linalg.norm(x)
    return np.vstack([x, np.cross(z, x), z])


def project(P, X) -> np.ndarray:
    """Project homogeneous or Euclidean 3D points with camera ``P``."""
    X = np.asarray(X, dtype=float)
    if X.shape[1] == 3:
        X = homogenize(X)
    return dehomogenize(X @ np.asarray(P).T)


def similarity_align(src, dst):
    """Least-squares similarity ``dst ~ s R src + t`` (Umeyama's closed form).

    Returns ``(s, R, t)``.
    """
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    mu_s, mu_d = src.mean(axis=0), dst.mean(axis=0)
    a, b = src - mu_s, dst - mu_d
    var_s = (a * a).sum() / len(a)
    if not var_s > 1e-24 or not (b * b).sum() > 1e-24:
        raise DegenerateCloud("point cloud has no spread")
    U, S, Vt = np.linalg.svd(b.T @ a / len(a))
    D = np.eye(src.shape[1])
    if np.linalg.det(U) * np.linalg.det(Vt) < 0:
        D[-1, -1] = -1.0
    R = U @ D @ Vt
    s = np.trace(np.diag(S) @ D) / var_s
    t = mu_d - s * R @ mu_s
    return s, R, t


def procrustes_error(est_points, gt_points) -> float:
    """RMS distance, in ground-truth units, after similarity alignment of ``est`` onto ``gt``."""
    est = np.asarray(est_points, dtype=float)
    gt = np.asarray(gt_points, dtype=float)
    if est.shape != gt.shape:
        raise DimensionMismatch(f"shapes differ: {est.shape} vs {gt.shape}")
    if est.shape[0] < 4:
        raise DegenerateCloud("need at least 4 points")
    s, R, t = similarity_align(est, gt)
    resid = gt - (s * est @ R.T + t)
    return float(np.sqrt((resid * resid).sum(axis=1).mean()))


def rq(M):
    """RQ decomposition with a positive-diagonal upper-triangular factor."""
    K, R = _rq(M)
    s = np.sign(np.diag(K))
    s[s == 0] = 1.0
    return K * s, s[:, None] * R


def resect(world, image) -> np.ndarray:
    """Linear (DLT) camera from homogeneous world points ``(n, 4)`` and image points ``(n, 2)``.

    Returns a ``3 x 4`` matrix with unit Frobenius norm.
    """
    world = np.asarray(world, dtype=float)
    image = np.asarray(image, dtype=float)
    if world.shape[0] != image.shape[0] or world.shape[1] != 4 or image.shape[1] != 2:
        raise DimensionMismatch(f"expected (n, 4) and (n, 2) arrays, got {world.shape} and {image.shape}")
    if world.shape[0] < 6:
        raise DegenerateCloud("need at least 6 points to resect a camera")
    n = world.shape[0]
    D = np.zeros((2 * n, 12))
    D[0::2, 0:4] = world
    D[0::2, 8:12] = -image[:, :1] * world
    D[1::2, 4:8] = world
    D[1::2, 8:12] = -image[:, 1:] * world
    D /= np.linalg.norm(D, axis=1, keepdims=True)
    return np.linalg.svd(D)[2][-1].reshape(3, 4)
