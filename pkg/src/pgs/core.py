"""Proximal gradient on the sphere driven by a proxy step-size.

For a proxy step-size ``t'`` the tangent subproblem at ``x``::

    v = argmin_{v perp x}  <grad g(x), v> + ||v||^2 / (2 t) + h(x + v)

is solved in closed form::

    z = prox_{|t'| h}(x - t' grad g(x))
    c = <x, z>,   t = t' / c,   v = z / c - x

so ``t'`` indirectly sets the actual step-size ``t``. The mapping
``t' -> t`` is increasing on ``|t'| < 1 / h(x)``, which is what makes a
backtracking search on ``t'`` well defined.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateProx, HemisphereViolation, LineSearchExhausted, SearchExhausted
from .manifold import SpherePoint, TangentVector, inverse_retract, retract, riemannian_gradient
from .problems import ProblemInstance
from .regularizers import Regularizer

DEGENERATE_C = 1e-12


class Method(enum.Enum):
    PGS = "pgs"
    APGS = "apgs"
    AMPGS = "ampgs"


class Strategy(enum.Enum):
    LIPSCHITZ_FIXED = "lipschitz-fixed"
    LIPSCHITZ_ADAPTIVE = "lipschitz-adaptive"
    SEARCHED_FIXED = "searched-fixed"
    SEARCHED_ADAPTIVE = "searched-adaptive"

    @property
    def adaptive(self) -> bool:
        return self in (Strategy.LIPSCHITZ_ADAPTIVE, Strategy.SEARCHED_ADAPTIVE)

    @property
    def searched(self) -> bool:
        return self in (Strategy.SEARCHED_FIXED, Strategy.SEARCHED_ADAPTIVE)


@dataclass(frozen=True)
class SolverConfig:
    method: Method = Method.PGS
    strategy: Strategy = Strategy.LIPSCHITZ_FIXED
    tol_v: float = 1e-5
    tol_vt: float = 1e-3
    max_iters: int = 10000
    shrink: float = 0.8
    max_linesearch_iters: int = 100
    # t' is capped at interval_cap / h(x); 1.0 reproduces the plain 1 / h(x) bound
    interval_cap: float = 1.0
    max_search_iters: int = 60

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        if not (self.tol_v > 0 and self.tol_vt > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")
        if not 0 < self.interval_cap <= 1:
            raise ValueError("interval_cap must lie in (0, 1]")
        if self.max_iters < 1 or self.max_linesearch_iters < 1 or self.max_search_iters < 1:
            raise ValueError("iteration caps must be positive")

    def with_(self, **kw) -> "SolverConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class ProxyStepResult:
    z: np.ndarray
    v: TangentVector
    t: float
    t_prime: float
    c: float


def proxy_step(x: SpherePoint, rgrad: TangentVector, t_prime: float, h: Regularizer) -> ProxyStepResult:
    """Closed-form tangent update for a given proxy step-size.

    Raises :class:`DegenerateProx` when ``<x, z>`` is not safely positive,
    in which case the caller should shrink ``t_prime``.
    """
    xc = x.coords
    z = h.prox(xc - t_prime * rgrad.dir, abs(t_prime))
    c = float(np.dot(xc, z))
    if not c > DEGENERATE_C:
        raise DegenerateProx(f"c(t') = {c:.3g} at t' = {t_prime:.3g}")
    d = z / c - xc
    # remove the O(eps) radial residue so the update is tangent to working precision
    d -= np.dot(xc, d) * xc
    return ProxyStepResult(z=z, v=TangentVector(x, d), t=t_prime / c, t_prime=t_prime, c=c)


def phi_diagnostics(x: SpherePoint, rgrad: TangentVector, h: Regularizer, grid):
    """Sample ``c(t')`` and ``phi(t') = t' / c(t')`` on a grid of nonzero ``t'``.

    Non-positive ``c`` is reported (with ``phi = nan`` when ``c == 0``)
    rather than rejected.
    """
    xc = x.coords
    out = []
    for tp in grid:
        tp = float(tp)
        z = h.prox(xc - tp * rgrad.dir, abs(tp))
        c = float(np.dot(xc, z))
        out.append((tp, c, tp / c if c != 0 else math.nan))
    return out


def _criterion(g, x: SpherePoint, gx: float, rgrad: TangentVector, step: ProxyStepResult):
    """Sufficient-decrease test on the pullback of ``g``; returns ``(ok, R_x(v), g(R_x(v)))``."""
    v = step.v.dir
    y = retract(x, step.v)
    gy = g.value(y.coords)
    bound = gx + float(np.dot(rgrad.dir, v)) + float(np.dot(v, v)) / (2.0 * step.t)
    # absorb rounding in g itself when v is at machine-precision scale; for a
    # quadratic the evaluation error is about dim * eps * ||A|| = dim * eps * L / 2
    scale = max(1.0, abs(gx), 0.5 * (g.lipschitz or 0.0))
    slack = 4 * x.dim * np.finfo(float).eps * scale
    return gy <= bound + slack, y, gy


@dataclass(frozen=True)
class LineSearchResult:
    step: ProxyStepResult
    x_new: SpherePoint
    g_new: float
    trials: int


def line_search(x: SpherePoint, t_max: float, p: ProblemInstance, cfg: SolverConfig = SolverConfig()) -> LineSearchResult:
    """Backtrack on the proxy step-size until the sufficient-decrease test holds.

    Starts at ``min(t_max, interval_cap / h(x))`` and multiplies by
    ``cfg.shrink`` after each failure. On success,
    ``f(R_x(v)) <= f(x) - ||v||^2 / (2 t)``.
    """
    if not t_max > 0:
        raise ValueError(f"t_max must be positive, got {t_max}")
    xc = x.coords
    gx = p.g.value(xc)
    rgrad = riemannian_gradient(x, p.g.euclid_grad(xc))
    hx = p.h.value(xc)
    tp = min(t_max, cfg.interval_cap / hx) if hx > 0 else t_max
    for trial in range(1, cfg.max_linesearch_iters + 1):
        try:
            step = proxy_step(x, rgrad, tp, p.h)
        except DegenerateProx:
            tp *= cfg.shrink
            continue
        ok, y, gy = _criterion(p.g, x, gx, rgrad, step)
        if ok:
            return LineSearchResult(step=step, x_new=y, g_new=gy, trials=trial)
        tp *= cfg.shrink
    raise LineSearchExhausted(f"no acceptable proxy step-size after {cfg.max_linesearch_iters} trials")


def search_max_proxy_stepsize(x0: SpherePoint, p: ProblemInstance, max_iters: int = 60, full_output=False):
    """Initial maximum proxy step-size by an expanding/contracting search.

    The upper bound is ``0.7 / h(x0)``; when ``h(x0) == 0`` this falls back
    to ``1 / L`` if the smooth cost knows its Lipschitz-type constant. With
    ``full_output`` the number of trial steps is returned as well.
    """
    t, trials = _search_max_proxy_stepsize(x0, p, max_iters)
    return (t, trials) if full_output else t


def _search_max_proxy_stepsize(x0, p, max_iters):
    xc = x0.coords
    hx = p.h.value(xc)
    if not hx > 0:
        L = p.g.lipschitz
        if L:
            return 1.0 / L, 0
        raise SearchExhausted("h(x0) = 0 and no Lipschitz constant is available")
    gx = p.g.value(xc)
    rgrad = riemannian_gradient(x0, p.g.euclid_grad(xc))
    ub = 0.7 / hx
    tp = ub
    found = False
    for trial in range(1, max_iters + 1):
        try:
            step = proxy_step(x0, rgrad, tp, p.h)
            ok = _criterion(p.g, x0, gx, rgrad, step)[0]
        except DegenerateProx:
            ok = False
        if ok:
            if tp == ub:
                return ub, trial
            found = True
            tp = min(2.0 * tp, ub)
        elif found:
            return 0.5 * tp, trial
        else:
            tp *= 0.1
    raise SearchExhausted(f"no proxy step-size found in {max_iters} trials")


def nesterov_alpha_next(alpha: float) -> float:
    """Next term of the momentum sequence ``(1 + sqrt(1 + 4 a^2)) / 2``."""
    if alpha < 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    return 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * alpha * alpha))


@dataclass
class IterationRecord:
    k: int
    f: float
    g: float
    h: float
    v_norm: float
    vt_norm: float
    t: float
    t_prime: float
    linesearch: int
    accepted: bool


@dataclass
class SolverTrace:
    """Per-iteration history of one :func:`solve` call.

    ``f0`` is the cost at the starting point and ``records[k].f`` the cost
    of ``x_{k+1}``. ``accepted`` is False only for AM-PGS iterations that
    kept the previous estimate.
    """

    f0: float
    records: list = field(default_factory=list)
    converged: bool = False
    t_max_initial: float = math.nan
    search_trials: int = 0

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def linesearch_total(self) -> int:
        return sum(r.linesearch for r in self.records)

    @property
    def costs(self) -> np.ndarray:
        return np.array([self.f0] + [r.f for r in self.records])

    @property
    def final_cost(self) -> float:
        return self.records[-1].f if self.records else self.f0

    COLUMNS = ("k", "f", "g", "h", "v_norm", "vt_norm", "t", "t_prime", "linesearch", "accepted")

    def rows(self):
        for r in self.records:
            yield tuple(getattr(r, c) for c in self.COLUMNS)


def initial_max_proxy_stepsize(p: ProblemInstance, x0: SpherePoint, cfg: SolverConfig):
    if cfg.strategy.searched:
        return _search_max_proxy_stepsize(x0, p, cfg.max_search_iters)
    L = p.g.lipschitz
    if not L:
        raise ValueError(f"strategy {cfg.strategy.value} needs a smooth cost with a Lipschitz constant")
    return 1.0 / L, 0


def solve(p: ProblemInstance, x0: SpherePoint, cfg: SolverConfig = SolverConfig(), t_max: float | None = None):
    """Minimize ``g + h`` on the sphere from ``x0``.

    Runs PGS, A-PGS (momentum through retraction and its inverse) or AM-PGS
    (momentum that keeps the previous estimate when the cost does not
    improve) per ``cfg.method``. Stops when ``||v|| < tol_v`` and
    ``||v / t|| < tol_vt`` or after ``max_iters`` iterations; in the latter
    case ``trace.converged`` is False.

    ``t_max`` overrides the strategy's initial maximum proxy step-size.

    Returns ``(x, trace)``.
    """
    x0 = x0 if isinstance(x0, SpherePoint) else SpherePoint(x0)
    if t_max is None:
        t_max, search_trials = initial_max_proxy_stepsize(p, x0, cfg)
    else:
        search_trials = 0
    g, h = p.g, p.h
    x = y = x0
    gx, hx = g.value(x.coords), h.value(x.coords)
    fx = gx + hx
    trace = SolverTrace(f0=fx, t_max_initial=t_max, search_trials=search_trials)
    alpha = 1.0
    for k in range(cfg.max_iters):
        ls = line_search(y, t_max, p, cfg)
        step = ls.step
        y_star = ls.x_new
        if cfg.strategy.adaptive:
            t_max = step.t_prime
        g_star = ls.g_new
        h_star = h.value(y_star.coords)
        f_star = g_star + h_star
        accepted = True

        if cfg.method is Method.PGS:
            x = y = y_star
            gx, hx, fx = g_star, h_star, f_star
        else:
            alpha_next = nesterov_alpha_next(alpha)
            if cfg.method is Method.AMPGS and not f_star < fx:
                # keep x_k; pull the auxiliary point toward y_star from x_k
                accepted = False
                y = _extrapolate(x, y_star, alpha / alpha_next, fallback=x)
            else:
                y = _extrapolate(y_star, x, (1.0 - alpha) / alpha_next, fallback=y_star)
                x = y_star
                gx, hx, fx = g_star, h_star, f_star
            alpha = alpha_next

        v_norm = step.v.norm()
        vt_norm = v_norm / step.t
        trace.records.append(IterationRecord(k, fx, gx, hx, v_norm, vt_norm, step.t, step.t_prime, ls.trials, accepted))
        if v_norm < cfg.tol_v and vt_norm < cfg.tol_vt:
            trace.converged = True
            break
    return x, trace


def _extrapolate(anchor: SpherePoint, other: SpherePoint, coef: float, fallback: SpherePoint) -> SpherePoint:
    """``R_anchor(coef * R_anchor^{-1}(other))``, resetting momentum when undefined."""
    try:
        d = inverse_retract(anchor, other)
    except HemisphereViolation:
        return fallback
    return retract(anchor, d.scaled(coef))
