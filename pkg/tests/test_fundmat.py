import numpy as np
import pytest

from pgs.apps.fundmat import (
    CorrespondenceSet,
    build_fundmat_design,
    design_rows,
    eight_point,
    epipolar_distance,
    gen_two_view,
    hartley_normalize,
    pgs_fundmat,
    reprojection_error,
)
from pgs.errors import DegenerateCloud, RankDeficiencyViolation, TooFewCorrespondences
from pgs.problems import bottom_eigenvector, quad_value


def sign_dist(A, B):
    return min(np.linalg.norm(A - B), np.linalg.norm(A + B))


def oracle_distance(F, c):
    """Second implementation: explicit loop over the line equations."""
    total_a = total_b = 0.0
    for (x, y), (u, v) in zip(c.points_a, c.points_b):
        p, q = np.array([x, y, 1.0]), np.array([u, v, 1.0])
        l2 = F @ p
        l1 = F.T @ q
        total_b += abs(u * l2[0] + v * l2[1] + l2[2]) / np.hypot(l2[0], l2[1])
        total_a += abs(x * l1[0] + y * l1[1] + l1[2]) / np.hypot(l1[0], l1[1])
    return 0.5 * (total_a + total_b) / c.m


def test_hartley_normalize(rng):
    c, _ = gen_two_view(1)
    cn, (Ta, Tb) = hartley_normalize(c)
    for pts in (cn.points_a, cn.points_b):
        np.testing.assert_allclose(pts.mean(axis=0), 0, atol=1e-9)
        assert np.linalg.norm(pts, axis=1).mean() == pytest.approx(np.sqrt(2), abs=1e-9)
    np.testing.assert_allclose(Ta.unapply(cn.points_a), c.points_a, atol=1e-10)
    # already normalized: scale ~ 1
    _, (Ta2, _) = hartley_normalize(cn)
    assert Ta2.matrix[0, 0] == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(DegenerateCloud):
        hartley_normalize(CorrespondenceSet(np.ones((8, 2)), np.ones((8, 2))))


def test_design_row_layout(rng):
    c = CorrespondenceSet([[1.0, 0.0]] * 8, [[0.0, 1.0]] * 8)
    row = design_rows(c)[0]
    for _ in range(5):
        F = rng.standard_normal((3, 3))
        assert row @ F.ravel(order="F") == pytest.approx(np.array([0, 1, 1.0]) @ F @ np.array([1, 0, 1.0]))


def test_design_noise_free():
    c, F = gen_two_view(2, noise_px=0)
    cn, (Ta, Tb) = hartley_normalize(c)
    q = build_fundmat_design(cn)
    assert np.linalg.eigvalsh(q.A)[0] <= 1e-15
    Fn = Tb.inverse.T @ F @ Ta.inverse
    x = Fn.ravel(order="F") / np.linalg.norm(Fn)
    assert quad_value(q, x) <= 1e-18
    with pytest.raises(TooFewCorrespondences):
        build_fundmat_design(CorrespondenceSet(c.points_a[:7], c.points_b[:7]))


def test_eight_point():
    c, F = gen_two_view(4, noise_px=0)
    E = eight_point(c)
    assert sign_dist(E, F) < 1e-6
    S = np.linalg.svd(E, compute_uv=False)
    assert S[2] == 0.0 or S[2] < 1e-15 * S[0]
    assert np.linalg.norm(E) == pytest.approx(1.0)
    c, F = gen_two_view(4, noise_px=1.0)
    assert epipolar_distance(eight_point(c), c) < 2.0


def test_pgs_fundmat_variants():
    c, _ = gen_two_view(5)
    r = pgs_fundmat(c, full_output=True)
    S = np.linalg.svd(r.F_unrounded, compute_uv=False)
    assert S[2] <= 1e-4 * S[0]
    assert np.linalg.norm(r.F) == pytest.approx(1.0)
    for v in ("trunc5", "trunc10", "full"):
        F = pgs_fundmat(c, variant=v)
        assert np.linalg.svd(F, compute_uv=False)[2] < 1e-12
    assert epipolar_distance(r.F, c) <= epipolar_distance(eight_point(c), c) + 1e-9
    assert sign_dist(pgs_fundmat(c, lam=0), eight_point(c)) < 1e-6
    with pytest.raises(ValueError):
        pgs_fundmat(c, variant="trunc3")


def test_epipolar_distance():
    c, F = gen_two_view(6, noise_px=0)
    assert epipolar_distance(F, c) < 1e-9
    c, F = gen_two_view(6, noise_px=1)
    E = eight_point(c)
    assert epipolar_distance(-3.5 * E, c) == pytest.approx(epipolar_distance(E, c), rel=1e-12)
    assert epipolar_distance(E, c) == pytest.approx(oracle_distance(E, c), rel=1e-12)


def test_reprojection_error():
    c, F = gen_two_view(7, noise_px=0)
    assert reprojection_error(F, c) <= 1e-6
    with pytest.raises(RankDeficiencyViolation):
        reprojection_error(np.eye(3), c)
    c, _ = gen_two_view(7, noise_px=1)
    E = eight_point(c)
    e_rep, e_dist = reprojection_error(E, c), epipolar_distance(E, c)
    assert 0 < e_rep < e_dist and np.isfinite(e_rep)


def test_gen_two_view_deterministic():
    a, Fa = gen_two_view(9)
    b, Fb = gen_two_view(9)
    assert np.array_equal(a.points_a, b.points_a) and np.array_equal(Fa, Fb)
    with pytest.raises(TooFewCorrespondences):
        gen_two_view(0, m=7)
