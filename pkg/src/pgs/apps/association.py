"""Correspondence association by pairwise distance consistency.

Every candidate match ``(i, i')`` between point clouds ``Q`` and ``Q'`` is a
hypothesis. The affinity of two hypotheses rewards preserved distances::

    M[(i,i'), (j,j')] = 4.5 - (d_ij - d_i'j')^2 / (2 delta_d^2)   if |d_ij - d_i'j'| < 3 delta_d
                        0                                         otherwise

and the hypothesis weights maximize ``x^T M x`` on the sphere, i.e. the
Rayleigh quotient with ``A = -M``. An l1 penalty sparsifies ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ..core import SolverConfig, solve
from ..manifold import SpherePoint
from ..problems import ProblemInstance, QuadraticCost, bottom_eigenvector
from ..regularizers import L1Reg

MAX_AFFINITY = 4.5


@dataclass(frozen=True)
class AssociationProblem:
    """Affinity matrix over hypotheses; hypothesis ``k`` is ``divmod(k, n_b)``."""

    M: np.ndarray
    n_a: int
    n_b: int
    delta_d: float

    @property
    def n(self) -> int:
        return self.M.shape[0]

    def hypothesis(self, k):
        return divmod(int(k), self.n_b)

    def cost(self) -> QuadraticCost:
        return QuadraticCost(-self.M)


def build_association(qa, qb, delta_d=5.0) -> AssociationProblem:
    if not delta_d > 0:
        raise ValueError(f"delta_d must be positive, got {delta_d}")
    qa = np.asarray(qa, dtype=float)
    qb = np.asarray(qb, dtype=float)
    na, nb = len(qa), len(qb)
    da = cdist(qa, qa)
    db = cdist(qb, qb)
    # diff[i, i', j, j'] = d_ij - d_i'j'
    diff = da[:, None, :, None] - db[None, :, None, :]
    M = np.where(np.abs(diff) < 3 * delta_d, MAX_AFFINITY - diff**2 / (2 * delta_d**2), 0.0)
    M = M.reshape(na * nb, na * nb)
    np.fill_diagonal(M, 0.0)
    return AssociationProblem(M=M, n_a=na, n_b=nb, delta_d=float(delta_d))


def lambda_auto(p: AssociationProblem) -> float:
    """Largest l1 weight for which some point beats every basis vector: ``sigma_max(M) / (sqrt(n) - 1)``."""
    if p.n < 2:
        raise ValueError("need at least two hypotheses")
    return float(np.max(np.abs(np.linalg.eigvalsh(p.M)))) / (np.sqrt(p.n) - 1.0)


def extract_matches(x, p: AssociationProblem, min_mass=1e-6):
    """Greedy one-to-one matches from hypothesis weights.

    Repeatedly takes the largest remaining ``|x|`` entry (lowest index on
    ties) and discards every hypothesis sharing either of its points.
    """
    w = np.abs(np.asarray(x, dtype=float).ravel()).reshape(p.n_a, p.n_b).copy()
    matches = []
    while w.size and w.max() >= min_mass:
        i, j = np.unravel_index(np.argmax(w), w.shape)
        matches.append((int(i), int(j)))
        w[i, :] = -1.0
        w[:, j] = -1.0
    return matches


def spectral_solution(p: AssociationProblem) -> SpherePoint:
    """Principal eigenvector of ``M``, signed to have a nonnegative sum."""
    x = bottom_eigenvector(p.cost())
    return x if x.coords.sum() >= 0 else -x


def solve_association(p: AssociationProblem, lam=None, cfg: SolverConfig | None = None):
    """l1-regularized hypothesis weights, started from the spectral solution.

    ``lam=None`` uses :func:`lambda_auto`; ``lam=0`` returns the spectral
    solution itself. Returns ``(x, trace)`` with ``trace`` None when no solve
    was needed.
    """
    x0 = spectral_solution(p)
    lam = lambda_auto(p) if lam is None else lam
    if lam == 0:
        return x0, None
    return solve(ProblemInstance(p.cost(), L1Reg(lam), p.n), x0, cfg or SolverConfig())


def simulate_association(seed, m=20, m_out=0, delta_pts=0.0):
    """Point clouds for a synthetic association trial.

    ``Q`` has ``m`` points uniform in ``[0, 256 sqrt(m / 10)]^2``; ``Q'`` is
    ``Q`` plus Gaussian noise, rigidly moved. ``m_out`` independent uniform
    outliers are appended to each cloud and ``Q'`` is shuffled. Returns
    ``(Q, Q', true_matches)`` with matches as ``(index in Q, index in Q')``.
    """
    if m < 2:
        raise ValueError("need at least two inliers")
    rng = np.random.default_rng(seed)
    side = 256.0 * np.sqrt(m / 10.0)
    qa = rng.uniform(0.0, side, size=(m, 2))
    theta = rng.uniform(0.0, 2 * np.pi)
    R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    shift = rng.uniform(-side, side, size=2)
    qb = (qa + delta_pts * rng.standard_normal(qa.shape)) @ R.T + shift
    qa = np.vstack([qa, rng.uniform(0.0, side, size=(m_out, 2))])
    qb = np.vstack([qb, rng.uniform(0.0, side, size=(m_out, 2))])
    perm = rng.permutation(m + m_out)
    qb = qb[perm]
    where = np.argsort(perm)
    truth = [(i, int(where[i])) for i in range(m)]
    return qa, qb, truth


def count_correct(matches, truth) -> int:
    return len(set(matches) & set(truth))
