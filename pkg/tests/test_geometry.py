import numpy as np
import pytest
from scipy.spatial import procrustes as scipy_procrustes
from scipy.spatial.transform import Rotation

from pgs.apps.geometry import isotropic_normalization, procrustes_error, resect, rq, triangulate
from pgs.errors import DegenerateCloud


def test_procrustes_examples(rng):
    X = rng.standard_normal((20, 3))
    assert procrustes_error(X, X) == pytest.approx(0, abs=1e-12)
    R = Rotation.from_rotvec([0.3, -0.5, 1.1]).as_matrix()
    assert procrustes_error(2 * X @ R.T + [1, 2, 3], X) < 1e-10
    with pytest.raises(DegenerateCloud):
        procrustes_error(X[:3], X[:3])


def test_procrustes_matches_scipy_oracle(rng):
    # scipy standardizes both clouds; rescale its disparity to ground-truth units
    X = rng.standard_normal((40, 3))
    Y = X + 0.05 * rng.standard_normal(X.shape)
    _, _, disparity = scipy_procrustes(X, Y)
    Xc = X - X.mean(axis=0)
    oracle = np.sqrt(disparity * (Xc**2).sum() / len(X))
    assert procrustes_error(Y, X) == pytest.approx(oracle, rel=1e-6)


def test_isotropic_normalization():
    pts = np.array([[0, 0], [2, 0], [0, 2], [2, 2.0]])
    T = isotropic_normalization(pts)
    q = T.apply(pts)
    np.testing.assert_allclose(q.mean(axis=0), 0, atol=1e-12)
    assert np.linalg.norm(q, axis=1).mean() == pytest.approx(np.sqrt(2))
    np.testing.assert_allclose(T.matrix @ T.inverse, np.eye(3), atol=1e-10)


def test_rq_and_resect_and_triangulate(rng):
    K = np.array([[800, 2, 300], [0, 900, 200], [0, 0, 1.0]])
    R = Rotation.from_rotvec([0.1, 0.2, -0.3]).as_matrix()
    P = K @ np.hstack([R, [[0.5], [0.1], [5.0]]])
    Kr, Rr = rq(P[:, :3])
    np.testing.assert_allclose(Kr / Kr[2, 2], K, rtol=1e-10)
    X = np.hstack([rng.standard_normal((12, 3)), np.ones((12, 1))])
    x = X @ P.T
    Pr = resect(X, x[:, :2] / x[:, 2:])
    np.testing.assert_allclose(Pr / Pr[2, 3], P / P[2, 3], rtol=1e-8)
    P2 = P @ np.vstack([np.hstack([Rotation.from_rotvec([0, 0.4, 0]).as_matrix(), [[1.0], [0], [0]]]), [0, 0, 0, 1]])
    pts = np.stack([(X @ Q.T)[:, :2] / (X @ Q.T)[:, 2:] for Q in (P, P2)])
    Xt = triangulate([P, P2], pts)
    np.testing.assert_allclose(Xt[:, :3] / Xt[:, 3:], X[:, :3], atol=1e-8)
