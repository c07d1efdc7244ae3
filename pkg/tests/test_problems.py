import warnings

import numpy as np
import pytest

from pgs.core import SolverConfig, solve
from pgs.errors import DimensionMismatch
from pgs.manifold import normalize, riemannian_gradient
from pgs.problems import EigengapWarning, ProblemInstance, QuadraticCost, bottom_eigenvector, quad_grad, quad_lipschitz, quad_value
from pgs.regularizers import ZeroReg


def central_diff(fn, x, h=1e-6):
    return np.array([(fn(x + h * e) - fn(x - h * e)) / (2 * h) for e in np.eye(len(x))])


def test_quad_value_examples():
    q = QuadraticCost(np.diag([1.0, 2.0, 3.0]))
    assert quad_value(q, [1, 0, 0]) == 1.0
    assert quad_value(q, [2**-0.5, 2**-0.5, 0]) == pytest.approx(1.5)
    M = np.ones((3, 3)) - np.eye(3)
    assert quad_value(QuadraticCost(-M), [0, 1, 0]) == 0.0
    with pytest.raises(DimensionMismatch):
        quad_value(q, [1, 0])


def test_quad_grad_examples(rng):
    q = QuadraticCost(np.diag([1.0, 2.0]))
    x = normalize([1, 0])
    np.testing.assert_allclose(quad_grad(q, x.coords), [2, 0])
    np.testing.assert_allclose(riemannian_gradient(x, quad_grad(q, x.coords)).dir, [0, 0])
    y = normalize(rng.standard_normal(4))
    I = QuadraticCost(np.eye(4))
    np.testing.assert_allclose(riemannian_gradient(y, quad_grad(I, y.coords)).dir, 0, atol=1e-15)
    B = rng.standard_normal((5, 5))
    q = QuadraticCost(B)
    z = rng.standard_normal(5)
    np.testing.assert_allclose(quad_grad(q, z), central_diff(lambda u: quad_value(q, u), z), rtol=1e-6)
    np.testing.assert_allclose(riemannian_gradient(normalize(z), quad_grad(q, normalize(z).coords)).dir,
                               2 * q.A @ normalize(z).coords - 2 * quad_value(q, normalize(z).coords) * normalize(z).coords, atol=1e-12)


def test_symmetrized(rng):
    B = rng.standard_normal((4, 4))
    q = QuadraticCost(B)
    assert np.linalg.norm(q.A - q.A.T) <= 1e-9 * np.linalg.norm(q.A)


def test_lipschitz_examples(rng):
    assert quad_lipschitz(QuadraticCost(np.diag([3.0, 1.0]))) == 6.0
    assert quad_lipschitz(QuadraticCost(np.diag([-4.0, 1.0]))) == 8.0


def test_lipschitz_pullback_inequality(rng):
    # g(R_x(v)) <= g(x) + <grad, v> + L/2 ||v||^2 for PSD A
    B = rng.standard_normal((6, 6))
    q = QuadraticCost(B @ B.T)
    L = quad_lipschitz(q)
    for _ in range(1000):
        x = normalize(rng.standard_normal(6))
        w = rng.standard_normal(6) * rng.uniform(0, 3)
        v = w - (w @ x.coords) * x.coords
        y = normalize(x.coords + v).coords
        rg = riemannian_gradient(x, quad_grad(q, x.coords)).dir
        assert quad_value(q, y) <= quad_value(q, x.coords) + rg @ v + 0.5 * L * v @ v + 1e-10


def test_bottom_eigenvector_examples():
    np.testing.assert_allclose(bottom_eigenvector(QuadraticCost(np.diag([1.0, 2.0, 3.0]))).coords, [1, 0, 0])
    with pytest.warns(EigengapWarning):
        x = bottom_eigenvector(QuadraticCost(np.diag([5.0, 5.0])))
    assert np.sort(np.abs(x.coords)).tolist() == [0.0, 1.0] or np.linalg.norm(x.coords) == pytest.approx(1)


def test_bottom_eigenvector_residual_and_sign(rng):
    from pgs.apps.fundmat import build_fundmat_design, gen_two_view, hartley_normalize

    c, _ = gen_two_view(3)
    q = build_fundmat_design(hartley_normalize(c)[0])
    x = bottom_eigenvector(q).coords
    lam = np.linalg.eigvalsh(q.A)[0]
    assert np.linalg.norm(q.A @ x - lam * x) <= 1e-8
    assert x[np.flatnonzero(np.abs(x) > 1e-14)[0]] > 0


def test_pgs_reaches_eigen_oracle(rng):
    for _ in range(5):
        B = rng.standard_normal((7, 7))
        q = QuadraticCost(B + B.T)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            x, _ = solve(ProblemInstance(q, ZeroReg(), 7), normalize(rng.standard_normal(7)), SolverConfig(tol_v=1e-10, tol_vt=1e-8))
        assert quad_value(q, x.coords) == pytest.approx(np.linalg.eigvalsh(q.A)[0], abs=1e-6)


def test_gram_factor_matches_dense(rng):
    H = rng.standard_normal((30, 5))
    q = QuadraticCost.gram(H)
    x = rng.standard_normal(5)
    assert q.value(x) == pytest.approx(x @ H.T @ H @ x, rel=1e-12)
    np.testing.assert_allclose(q.euclid_grad(x), 2 * H.T @ H @ x, rtol=1e-12)
    with pytest.raises(DimensionMismatch):
        QuadraticCost(np.eye(5), factor=np.ones((3, 4)))
