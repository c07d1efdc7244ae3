"""The three regularized Rayleigh-quotient instances used for solver diagnostics.

Each instance comes with its eigenvector initialization, the solution of
the unregularized problem.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..manifold import SpherePoint
from ..problems import ProblemInstance, bottom_eigenvector
from ..regularizers import L1Reg, NuclearReg, NuclearSpectralReg
from . import association as assoc
from . import fundmat as fm
from . import selfcal as sc

KINDS = ("nuclear", "l1", "nuclear-spectral")


@dataclass(frozen=True)
class Benchmark:
    kind: str
    problem: ProblemInstance
    x0: SpherePoint


def fundmat_instance(seed, lam=0.01, m=100, noise_px=1.0) -> Benchmark:
    c, _ = fm.gen_two_view(seed, m=m, noise_px=noise_px)
    q = fm.build_fundmat_design(fm.hartley_normalize(c)[0])
    return Benchmark("nuclear", ProblemInstance(q, NuclearReg(lam, fm.VEC3), 9), bottom_eigenvector(q))


def association_instance(seed, lam=None, m=20, m_out=5, delta_pts=4.0) -> Benchmark:
    qa, qb, _ = assoc.simulate_association(seed, m=m, m_out=m_out, delta_pts=delta_pts)
    p = assoc.build_association(qa, qb)
    lam = assoc.lambda_auto(p) if lam is None else lam
    return Benchmark("l1", ProblemInstance(p.cost(), L1Reg(lam), p.n), assoc.spectral_solution(p))


def selfcal_instance(seed, lam1=0.01, lam2=0.02, delta_img=4.0, delta_cam=0.0) -> Benchmark:
    p = sc.quasi_euclidean_rectify(sc.gen_cms_scene(seed, delta_cam=delta_cam, delta_img=delta_img))
    q = sc.build_selfcal_design(p)
    reg = NuclearSpectralReg(lam1, lam2, sc.VEC4)
    return Benchmark("nuclear-spectral", ProblemInstance(q, reg, sc.VEC4.size), bottom_eigenvector(q))


def benchmark_instances(seed) -> dict:
    """``{kind: Benchmark}`` for the nuclear, l1 and nuclear-spectral instances."""
    return {
        "nuclear": fundmat_instance(seed),
        "l1": association_instance(seed),
        "nuclear-spectral": selfcal_instance(seed),
    }
