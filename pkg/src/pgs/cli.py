"""Seeded Monte-Carlo experiments written to CSV.

``pgs <subcommand> [options]`` runs ``runs`` trials for every value of the
swept parameter and writes, under ``--out``:

* ``runs.csv``: one row per (run, pipeline);
* ``summary.csv``: count / mean / std of each numeric column per
  (param, pipeline);
* ``timing.csv``: wall time per (run, pipeline), kept apart so the other
  files are byte-identical across reruns;
* ``trace_<run>.csv`` with ``--traces``: the per-iteration solver history.

Run ``i`` uses the seed ``seed + i``. Settings come from defaults, then an
optional ``key = value`` file (``--config``), then the command line.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from .core import Method, SolverConfig, SolverTrace, Strategy, search_max_proxy_stepsize, solve
from .errors import ConfigError, PGSError
from .manifold import SpherePoint, normalize
from .problems import ProblemInstance, QuadraticCost, bottom_eigenvector
from .regularizers import L1Reg, NuclearReg, NuclearSpectralReg, ZeroReg

SUBCOMMANDS = ("rayleigh", "fundmat", "assoc", "selfcal", "diagnostics")
COMMON_COLUMNS = ("run", "seed", "param", "pipeline", "status", "f", "g", "h", "iterations", "linesearch", "converged")
METRIC_COLUMNS = {
    "rayleigh": ("lambda_min", "cost_gap", "optimality"),
    "fundmat": ("e_dist", "e_rep", "sigma3_ratio"),
    "assoc": ("lambda", "correct"),
    "selfcal": ("recon_error", "success", "failure"),
    "diagnostics": ("t_max_ratio", "search_trials", "optimality"),
}
# the parameter each subcommand sweeps, and the config field holding its values
SWEEP_FIELD = {"rayleigh": "delta_init", "fundmat": "noise", "assoc": "noise", "selfcal": "noise", "diagnostics": "delta_init"}
DEFAULT_NOISE = {"fundmat": (1.0,), "assoc": (0.0, 2.0, 4.0, 6.0, 8.0, 10.0), "selfcal": (4.0,)}
DEFAULT_DELTA_INIT = (0.0, 0.1, 0.5, 1.0)
DEFAULT_LAMBDA = {"rayleigh": 0.0, "fundmat": 0.01, "selfcal": 0.01}
DEFAULT_M = {"fundmat": 100, "assoc": 20}
SUCCESS_ERROR = 0.05
FAILURE_ERROR = 0.1
SEED_LIMIT = 2**64


@dataclass(frozen=True)
class ExperimentConfig:
    subcommand: str
    method: str = "pgs"
    strategy: str = "lipschitz-fixed"
    tol_v: float = 1e-5
    tol_vt: float = 1e-3
    max_iters: int = 10000
    seed: int = 0
    runs: int = 20
    jobs: int = 1
    out: str = "results"
    traces: bool = False
    # None picks the subcommand default; for assoc it means lambda_auto
    lam: float | None = None
    lam2: float | None = None
    delta_init: tuple | None = None
    noise: tuple | None = None
    dim: int = 9
    m: int | None = None
    outliers: int = 5
    delta_cam: float = 0.0
    early_stop: int = 1000

    def solver(self) -> SolverConfig:
        return SolverConfig(method=self.method, strategy=self.strategy, tol_v=self.tol_v, tol_vt=self.tol_vt, max_iters=self.max_iters)

    @property
    def sweep(self) -> tuple:
        return tuple(getattr(self, SWEEP_FIELD[self.subcommand]))

    @property
    def columns(self) -> tuple:
        return COMMON_COLUMNS + METRIC_COLUMNS[self.subcommand]


def _resolve(cfg: ExperimentConfig) -> ExperimentConfig:
    """Fill subcommand-dependent defaults."""
    sub = cfg.subcommand
    kw = {}
    if cfg.noise is None:
        kw["noise"] = DEFAULT_NOISE.get(sub, (0.0,))
    if cfg.delta_init is None:
        kw["delta_init"] = DEFAULT_DELTA_INIT if SWEEP_FIELD[sub] == "delta_init" else (0.0,)
    if cfg.lam is None and sub in DEFAULT_LAMBDA:
        kw["lam"] = DEFAULT_LAMBDA[sub]
    if cfg.m is None:
        kw["m"] = DEFAULT_M.get(sub, 0)
    cfg = replace(cfg, **kw)
    if cfg.lam2 is None and sub == "selfcal":
        cfg = replace(cfg, lam2=2.0 * cfg.lam)
    return cfg


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    """Resolve defaults and check every field; raises :class:`ConfigError`."""
    if cfg.subcommand not in SUBCOMMANDS:
        raise ConfigError("subcommand", f"unknown subcommand {cfg.subcommand!r}")
    cfg = _resolve(cfg)
    for name, enum in (("method", Method), ("strategy", Strategy)):
        try:
            enum(getattr(cfg, name))
        except ValueError:
            raise ConfigError(name, f"must be one of {[e.value for e in enum]}") from None
    checks = [
        ("tol_v", cfg.tol_v > 0, "must be positive"),
        ("tol_vt", cfg.tol_vt > 0, "must be positive"),
        ("max_iters", cfg.max_iters >= 1, "must be at least 1"),
        ("seed", 0 <= cfg.seed < SEED_LIMIT, "must lie in [0, 2^64)"),
        ("runs", cfg.runs >= 1, "must be at least 1"),
        ("jobs", cfg.jobs >= 1, "must be at least 1"),
        ("lam", cfg.lam is None or cfg.lam >= 0, "must be nonnegative"),
        ("lam2", cfg.lam2 is None or cfg.lam2 >= 0, "must be nonnegative"),
        ("delta_init", len(cfg.delta_init) > 0 and all(d >= 0 for d in cfg.delta_init), "needs nonnegative values"),
        ("noise", len(cfg.noise) > 0 and all(d >= 0 for d in cfg.noise), "needs nonnegative values"),
        ("dim", cfg.dim >= 2, "must be at least 2"),
        ("outliers", cfg.outliers >= 0, "must be nonnegative"),
        ("delta_cam", cfg.delta_cam >= 0, "must be nonnegative"),
        ("early_stop", cfg.early_stop >= 1, "must be at least 1"),
    ]
    if cfg.subcommand == "fundmat":
        checks.append(("m", cfg.m >= 8, "needs at least 8 correspondences"))
    if cfg.subcommand == "assoc":
        checks.append(("m", cfg.m >= 2, "needs at least 2 inliers"))
    for name, ok, msg in checks:
        if not ok:
            raise ConfigError(name, msg)
    return cfg


def init_from_sigma(x_ref, delta_init, seed) -> SpherePoint:
    """Perturb every coordinate of ``x_ref`` by ``N(0, delta_init^2)`` and normalize.

    ``delta_init = 0`` returns ``x_ref`` unchanged. ``seed`` may be an
    integer or a ``numpy.random.Generator``.
    """
    if delta_init < 0:
        raise ValueError(f"delta_init must be nonnegative, got {delta_init}")
    x_ref = x_ref if isinstance(x_ref, SpherePoint) else SpherePoint(x_ref)
    if delta_init == 0:
        return x_ref
    rng = np.random.default_rng(seed)
    while True:
        xi = x_ref.coords + delta_init * rng.standard_normal(x_ref.dim)
        if np.linalg.norm(xi) > 1e-12:
            return normalize(xi)


# ---------------------------------------------------------------- one run


def _solver_fields(p: ProblemInstance, x, trace) -> dict:
    row = {"g": p.g.value(x.coords), "h": p.h.value(x.coords)}
    row["f"] = row["g"] + row["h"]
    if trace is not None:
        row.update(iterations=trace.iterations, linesearch=trace.linesearch_total, converged=trace.converged)
    return row


def _pipeline(rows, traces, pipeline, fn):
    """Run one pipeline, turning library errors into a status string."""
    t0 = time.perf_counter()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            row, trace = fn()
        row["status"] = "ok"
    except (PGSError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        row, trace = {"status": type(exc).__name__}, None
    row["pipeline"] = pipeline
    rows.append(row)
    if trace is not None:
        traces.extend((pipeline,) + r for r in trace.rows())
    return time.perf_counter() - t0


def _rayleigh(cfg, rng, param, rows, traces):
    B = rng.standard_normal((cfg.dim, cfg.dim))
    q = QuadraticCost(B + B.T)
    lam_min = float(np.linalg.eigvalsh(q.A)[0])
    p = ProblemInstance(q, L1Reg(cfg.lam) if cfg.lam > 0 else ZeroReg(), cfg.dim)
    xi = bottom_eigenvector(q)
    x0 = init_from_sigma(xi, param, rng)

    def run():
        x, trace = solve(p, x0, cfg.solver())
        row = _solver_fields(p, x, trace)
        _, ref = solve(p, xi, cfg.solver())
        row.update(lambda_min=lam_min, cost_gap=row["f"] - lam_min, optimality=row["f"] / ref.final_cost)
        return row, trace

    return {cfg.method: _pipeline(rows, traces, cfg.method, run)}


def _fundmat(cfg, run_seed, param, rows, traces):
    from .apps import fundmat as fm

    c, _ = fm.gen_two_view(run_seed, m=cfg.m, noise_px=param)
    timing = {}

    def metrics(F, unrounded):
        S = np.linalg.svd(unrounded, compute_uv=False)
        return {"e_dist": fm.epipolar_distance(F, c), "e_rep": fm.reprojection_error(F, c), "sigma3_ratio": S[2] / S[0]}

    def eight():
        cn, _ = fm.hartley_normalize(c)
        q = fm.build_fundmat_design(cn)
        x = bottom_eigenvector(q)
        row = _solver_fields(ProblemInstance(q, ZeroReg(), 9), x, None)
        row.update(metrics(fm.eight_point(c), fm.VEC3.mat(x.coords)))
        return row, None

    timing["8pt"] = _pipeline(rows, traces, "8pt", eight)
    for name, variant in (("pgs5", "trunc5"), ("pgs10", "trunc10"), ("pgs", "full")):

        def run(variant=variant):
            res = fm.pgs_fundmat(c, lam=cfg.lam, variant=variant, cfg=cfg.solver(), full_output=True)
            cn, _ = fm.hartley_normalize(c)
            q = fm.build_fundmat_design(cn)
            x = SpherePoint(fm.VEC3.vec(res.F_unrounded))
            row = _solver_fields(ProblemInstance(q, NuclearReg(cfg.lam, fm.VEC3), 9), x, res.trace)
            row.update(metrics(res.F, res.F_unrounded))
            return row, res.trace

        timing[name] = _pipeline(rows, traces, name, run)
    return timing


def _assoc(cfg, run_seed, param, rows, traces):
    from .apps import association as assoc

    qa, qb, truth = assoc.simulate_association(run_seed, m=cfg.m, m_out=cfg.outliers, delta_pts=param)
    p = assoc.build_association(qa, qb)
    lam = assoc.lambda_auto(p) if cfg.lam is None else cfg.lam

    def unreg():
        x = assoc.spectral_solution(p)
        row = _solver_fields(ProblemInstance(p.cost(), ZeroReg(), p.n), x, None)
        row.update({"lambda": 0.0, "correct": assoc.count_correct(assoc.extract_matches(x.coords, p), truth)})
        return row, None

    def l1():
        x, trace = assoc.solve_association(p, lam, cfg.solver())
        row = _solver_fields(ProblemInstance(p.cost(), L1Reg(lam), p.n), x, trace)
        row.update({"lambda": lam, "correct": assoc.count_correct(assoc.extract_matches(x.coords, p), truth)})
        return row, trace

    return {"unregularized": _pipeline(rows, traces, "unregularized", unreg), "l1": _pipeline(rows, traces, "l1", l1)}


def _selfcal(cfg, run_seed, param, rows, traces):
    from .apps import selfcal as sc

    scene = sc.gen_cms_scene(run_seed, delta_cam=cfg.delta_cam, delta_img=param)
    timing = {}
    try:
        r = sc.quasi_euclidean_rectify(scene)
    except PGSError as exc:
        for name in ("none", "nuclear-spectral", "nuclear-early-stop", "nuclear"):
            rows.append({"pipeline": name, "status": type(exc).__name__, "success": 0, "failure": 1})
            timing[name] = 0.0
        return timing
    q = sc.build_selfcal_design(r)
    pipelines = {
        "none": (ZeroReg(), None),
        "nuclear-spectral": (NuclearSpectralReg(cfg.lam, cfg.lam2, sc.VEC4), None),
        "nuclear-early-stop": (NuclearReg(cfg.lam, sc.VEC4), cfg.early_stop),
        "nuclear": (NuclearReg(cfg.lam, sc.VEC4), None),
    }
    for name, (reg, es) in pipelines.items():

        def run(reg=reg, es=es):
            res = sc.selfcal_solve(r, None if isinstance(reg, ZeroReg) else reg, cfg.solver(), early_stop=es)
            row = _solver_fields(ProblemInstance(q, reg, sc.VEC4.size), res.x, res.trace)
            err = sc.reconstruction_error(r, res.H)
            row.update(recon_error=err, success=int(err < SUCCESS_ERROR), failure=int(not err <= FAILURE_ERROR))
            return row, res.trace

        timing[name] = _pipeline(rows, traces, name, run)
        if rows[-1]["status"] != "ok":
            rows[-1].update(success=0, failure=1)
    return timing


def _diagnostics(cfg, run_seed, param, rows, traces):
    from .apps.benchmarks import benchmark_instances

    timing = {}
    scfg = cfg.solver()
    for kind, b in benchmark_instances(run_seed).items():
        x0 = init_from_sigma(b.x0, param, run_seed)
        try:
            t_max, trials = search_max_proxy_stepsize(x0, b.problem, full_output=True)
            ratio = t_max * b.problem.g.lipschitz
        except PGSError:
            ratio, trials = math.nan, math.nan
        for method in Method:
            name = f"{kind}/{method.value}"

            def run(method=method):
                mcfg = scfg.with_(method=method)
                x, trace = solve(b.problem, x0, mcfg)
                _, ref = solve(b.problem, b.x0, mcfg)
                row = _solver_fields(b.problem, x, trace)
                row.update(t_max_ratio=ratio, search_trials=trials, optimality=row["f"] / ref.final_cost)
                return row, trace

            timing[name] = _pipeline(rows, traces, name, run)
    return timing


RUNNERS = {"rayleigh": _rayleigh, "fundmat": _fundmat, "assoc": _assoc, "selfcal": _selfcal, "diagnostics": _diagnostics}


def run_one(cfg: ExperimentConfig, run: int):
    """Rows, trace rows and timings of run ``run`` (an index into the sweep)."""
    param = cfg.sweep[run // cfg.runs]
    run_seed = cfg.seed + run
    rows, traces = [], []
    arg = np.random.default_rng(run_seed) if cfg.subcommand == "rayleigh" else run_seed
    timing = RUNNERS[cfg.subcommand](cfg, arg, param, rows, traces)
    for row in rows:
        row.update(run=run, seed=run_seed, param=param)
    return rows, traces, timing


# ---------------------------------------------------------------- output


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def summarize(rows, metrics):
    """``(param, pipeline, metric, count, mean, std)`` over finite values, in first-seen order."""
    groups = {}
    for r in rows:
        groups.setdefault((r["param"], r["pipeline"]), []).append(r)
    out = []
    for (param, pipeline), grp in groups.items():
        for m in metrics:
            vals = np.array([float(r[m]) for r in grp if r.get(m) is not None], dtype=float)
            vals = vals[np.isfinite(vals)]
            mean = float(vals.mean()) if vals.size else math.nan
            std = float(vals.std()) if vals.size else math.nan
            out.append((param, pipeline, m, vals.size, mean, std))
    return out


def run_experiment(cfg: ExperimentConfig) -> int:
    """Run every trial and write the CSV files; returns the exit status."""
    cfg = validate(cfg)
    total = cfg.runs * len(cfg.sweep)
    try:
        os.makedirs(cfg.out, exist_ok=True)
    except OSError as exc:
        raise ConfigError("out", f"cannot create output directory: {exc}") from None
    if cfg.jobs == 1:
        results = [run_one(cfg, i) for i in range(total)]
    else:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(run_one, [cfg] * total, range(total)))
    cols = cfg.columns
    rows = [r for res in results for r in res[0]]
    _write_csv(os.path.join(cfg.out, "runs.csv"), cols, ([r.get(c) for c in cols] for r in rows))
    numeric = [c for c in cols[5:] if c != "converged"]
    _write_csv(os.path.join(cfg.out, "summary.csv"), ("param", "pipeline", "metric", "count", "mean", "std"), summarize(rows, numeric))
    timing = [(i, name, sec) for i, res in enumerate(results) for name, sec in res[2].items()]
    _write_csv(os.path.join(cfg.out, "timing.csv"), ("run", "pipeline", "seconds"), timing)
    if cfg.traces:
        for i, res in enumerate(results):
            _write_csv(os.path.join(cfg.out, f"trace_{i}.csv"), ("pipeline",) + SolverTrace.COLUMNS, res[1])
    return 0


# ---------------------------------------------------------------- parsing

_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}
_LIST_FIELDS = {"delta_init", "noise"}
_ALIASES = {"lambda": "lam", "lambda2": "lam2"}


def _convert(key, text):
    text = text.strip()
    try:
        if key in _LIST_FIELDS:
            return tuple(float(t) for t in text.split(",") if t.strip())
        if key in ("lam", "lam2"):
            return None if text.lower() == "auto" else float(text)
        if key == "traces":
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        kind = _FIELD_TYPES[key]
        if "int" in kind:
            return int(text)
        if "float" in kind:
            return float(text)
        return text
    except ValueError:
        raise ConfigError(key, f"cannot parse {text!r}") from None


def read_config_file(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("config", f"line {n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        key = _ALIASES.get(key, key)
        if key not in _FIELD_TYPES or key == "subcommand":
            raise ConfigError(key, f"unknown key on line {n}")
        out[key] = _convert(key, value)
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    a = common.add_argument
    a("--config", help="key = value file; command-line flags take precedence")
    a("--seed", help="base seed; run i uses seed + i")
    a("--runs", help="runs per swept value")
    a("--jobs", help="worker processes")
    a("--out", help="output directory")
    a("--method", help="pgs | apgs | ampgs")
    a("--strategy", help="lipschitz-fixed | lipschitz-adaptive | searched-fixed | searched-adaptive")
    a("--tol-v", dest="tol_v")
    a("--tol-vt", dest="tol_vt")
    a("--max-iters", dest="max_iters")
    a("--lambda", dest="lam", help="regularization weight (assoc: 'auto' uses lambda_auto)")
    a("--lambda2", dest="lam2", help="spectral weight for selfcal (default 2 * lambda)")
    a("--delta-init", dest="delta_init", help="comma-separated init noise levels")
    a("--noise", help="comma-separated noise levels (pixels or point units)")
    a("--dim", help="rayleigh matrix size")
    a("--m", help="correspondences (fundmat) or inliers (assoc)")
    a("--outliers", help="outliers per cloud (assoc)")
    a("--delta-cam", dest="delta_cam", help="camera orientation noise in radians (selfcal)")
    a("--early-stop", dest="early_stop", help="iteration cap of the early-stop nuclear pipeline (selfcal)")
    a("--traces", action="store_const", const="1", help="write trace_<run>.csv files")
    parser = argparse.ArgumentParser(prog="pgs", description="Proximal gradient on the sphere: synthetic experiments.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def config_from_args(argv=None) -> ExperimentConfig:
    ns = vars(build_parser().parse_args(argv))
    values = read_config_file(ns["config"]) if ns.get("config") else {}
    for key, text in ns.items():
        if key in ("config", "subcommand") or text is None:
            continue
        values[key] = _convert(key, text)
    return ExperimentConfig(subcommand=ns["subcommand"], **values)


def main(argv=None) -> int:
    try:
        return run_experiment(config_from_args(argv))
    except ConfigError as exc:
        print(f"pgs: configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"pgs: i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
