"""Proximal gradient on the unit sphere with a proxy step-size.

Minimizes ``g(x) + h(x)`` subject to ``||x|| = 1`` for a smooth ``g`` and a
convex, absolutely homogeneous ``h``, with PGS, A-PGS and AM-PGS.
"""

from .core import (
    LineSearchResult,
    Method,
    ProxyStepResult,
    SolverConfig,
    SolverTrace,
    Strategy,
    line_search,
    nesterov_alpha_next,
    phi_diagnostics,
    proxy_step,
    search_max_proxy_stepsize,
    solve,
)
from .errors import (
    BaseMismatch,
    ConfigError,
    DegenerateProx,
    DimensionMismatch,
    HemisphereViolation,
    LineSearchExhausted,
    NegativeScale,
    PGSError,
    SearchExhausted,
    ZeroVector,
)
from .manifold import SpherePoint, TangentVector, inverse_retract, normalize, retract, riemannian_gradient, tangent_project
from .problems import (
    EigengapWarning,
    ProblemInstance,
    QuadraticCost,
    SmoothCost,
    bottom_eigenvector,
    quad_grad,
    quad_lipschitz,
    quad_value,
)
from .regularizers import (
    Full,
    L1Reg,
    Matricizer,
    NuclearReg,
    NuclearSpectralReg,
    Regularizer,
    SymUpperTri,
    ZeroReg,
    l1_prox,
    nuclear_prox,
    nuclear_spectral_prox,
    reg_value,
)

__version__ = "0.1.0"
