import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pgs.errors import BaseMismatch, DimensionMismatch, HemisphereViolation, ZeroVector
from pgs.manifold import SpherePoint, TangentVector, inverse_retract, normalize, retract, riemannian_gradient, tangent_project

from conftest import nonzero_vectors, vectors

S2 = 1 / np.sqrt(2)


def test_normalize_examples():
    np.testing.assert_allclose(normalize([3, 4]).coords, [0.6, 0.8])
    np.testing.assert_array_equal(normalize([1, 0, 0]).coords, [1, 0, 0])
    with pytest.raises(ZeroVector):
        normalize([0, 0])


def test_spherepoint_renormalizes_and_rejects_zero():
    assert np.linalg.norm(SpherePoint([2.0, 0.0]).coords) == 1.0
    with pytest.raises(ZeroVector):
        SpherePoint([0.0, 1e-13])


def test_tangent_project_examples():
    x = SpherePoint([1, 0])
    np.testing.assert_allclose(tangent_project(x, [2, 3]).dir, [0, 3])
    np.testing.assert_allclose(tangent_project(x, [5, 0]).dir, [0, 0])
    np.testing.assert_allclose(tangent_project(SpherePoint([S2, S2]), [1, 0]).dir, [0.5, -0.5])
    with pytest.raises(DimensionMismatch):
        tangent_project(x, [1, 2, 3])


def test_riemannian_gradient_examples():
    np.testing.assert_allclose(riemannian_gradient(SpherePoint([1, 0]), [2, 0]).dir, [0, 0])
    np.testing.assert_allclose(riemannian_gradient(SpherePoint([1, 0]), [0, 4]).dir, [0, 4])
    np.testing.assert_allclose(riemannian_gradient(SpherePoint([0, 1]), [1, 1]).dir, [1, 0])


def test_retract_examples():
    x = SpherePoint([1, 0])
    np.testing.assert_allclose(retract(x, TangentVector(x, [0, 0])).coords, [1, 0])
    np.testing.assert_allclose(retract(x, TangentVector(x, [0, 1])).coords, [S2, S2])
    y = SpherePoint([0, 1])
    np.testing.assert_allclose(retract(y, TangentVector(y, [1, 0])).coords, [S2, S2])
    with pytest.raises(BaseMismatch):
        retract(x, TangentVector(y, [1, 0]))


def test_inverse_retract_examples():
    x = SpherePoint([1, 0])
    np.testing.assert_allclose(inverse_retract(x, x).dir, [0, 0])
    np.testing.assert_allclose(inverse_retract(x, SpherePoint([S2, S2])).dir, [0, 1], atol=1e-15)
    with pytest.raises(HemisphereViolation):
        inverse_retract(x, SpherePoint([0, 1]))


@given(nonzero_vectors(5), vectors(5))
def test_round_trip(xv, w):
    x = normalize(xv)
    v = tangent_project(x, w)
    if v.norm() > 2:
        v = v.scaled(2 / v.norm())
    back = inverse_retract(x, retract(x, v))
    np.testing.assert_allclose(back.dir, v.dir, atol=1e-8)
    assert abs(np.dot(back.dir, x.coords)) <= 1e-9 * max(1, back.norm())


@given(nonzero_vectors(4), vectors(4))
def test_projection_idempotent_and_nonexpansive(xv, w):
    x = normalize(xv)
    v = tangent_project(x, w)
    np.testing.assert_allclose(tangent_project(x, v.dir).dir, v.dir, atol=1e-12)
    assert riemannian_gradient(x, w).norm() <= np.linalg.norm(w) + 1e-12
    assert abs(np.dot(v.dir, x.coords)) <= 1e-9 * max(1, v.norm())


@given(nonzero_vectors(3), vectors(3))
def test_retraction_denominator_at_least_one(xv, w):
    x = normalize(xv)
    v = tangent_project(x, w)
    assert np.linalg.norm(x.coords + v.dir) >= 1 - 1e-12
    np.testing.assert_allclose(np.linalg.norm(x.coords + v.dir), np.sqrt(1 + v.norm() ** 2), rtol=1e-12)
