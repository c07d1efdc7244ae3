import csv
import subprocess
import sys

import numpy as np
import pytest

from pgs.cli import (
    METRIC_COLUMNS,
    COMMON_COLUMNS,
    ExperimentConfig,
    config_from_args,
    init_from_sigma,
    main,
    run_experiment,
    validate,
)
from pgs.errors import ConfigError
from pgs.manifold import normalize


def read_rows(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def test_init_from_sigma(rng):
    x = normalize(rng.standard_normal(9))
    assert init_from_sigma(x, 0.0, 1) is x
    a, b = init_from_sigma(x, 0.5, 7), init_from_sigma(x, 0.5, 7)
    assert np.array_equal(a.coords, b.coords) and not np.array_equal(a.coords, x.coords)
    with pytest.raises(ValueError):
        init_from_sigma(x, -1.0, 0)


def test_init_from_sigma_large_is_nearly_uniform():
    # for large noise the direction is ~ uniform: mean coordinate ~ 0, mean square ~ 1/n
    x = normalize(np.eye(5)[0])
    pts = np.array([init_from_sigma(x, 1e3, s).coords for s in range(4000)])
    np.testing.assert_allclose(pts.mean(axis=0), 0, atol=0.03)
    np.testing.assert_allclose((pts**2).mean(axis=0), 0.2, atol=0.02)


def test_validate_reports_field():
    for kw, field in (({"runs": 0}, "runs"), ({"method": "newton"}, "method"), ({"seed": -1}, "seed"), ({"noise": (-1.0,)}, "noise")):
        with pytest.raises(ConfigError) as info:
            validate(ExperimentConfig("fundmat", **kw))
        assert info.value.field == field
    with pytest.raises(ConfigError):
        validate(ExperimentConfig("nope"))
    cfg = validate(ExperimentConfig("selfcal", lam=0.03))
    assert cfg.lam2 == pytest.approx(0.06) and cfg.noise == (4.0,)


def test_precedence(tmp_path):
    conf = tmp_path / "exp.conf"
    conf.write_text("# comment\nruns = 3\nseed = 11\nlambda = 0.5\nnoise = 1, 2\n")
    cfg = config_from_args(["fundmat", "--config", str(conf), "--seed", "4"])
    assert (cfg.runs, cfg.seed, cfg.lam, cfg.noise) == (3, 4, 0.5, (1.0, 2.0))
    conf.write_text("bogus = 1\n")
    with pytest.raises(ConfigError):
        config_from_args(["fundmat", "--config", str(conf)])


def test_main_exit_codes(tmp_path, capsys):
    assert main(["rayleigh", "--runs", "0", "--out", str(tmp_path)]) == 2
    assert "runs" in capsys.readouterr().err
    assert main(["rayleigh", "--runs", "1", "--delta-init", "0", "--out", str(tmp_path / "r")]) == 0


def test_rayleigh_reaches_eigen_oracle(tmp_path):
    cfg = ExperimentConfig("rayleigh", runs=20, delta_init=(0.5,), lam=0.0, tol_v=1e-9, tol_vt=1e-7, out=str(tmp_path))
    assert run_experiment(cfg) == 0
    rows = read_rows(tmp_path / "runs.csv")
    assert len(rows) == 20
    assert all(abs(float(r["cost_gap"])) <= 1e-6 for r in rows)


@pytest.mark.parametrize("sub", ["rayleigh", "fundmat", "assoc", "selfcal", "diagnostics"])
def test_schemas(sub, tmp_path):
    kw = {"noise": (2.0,)} if sub == "assoc" else {}
    cfg = ExperimentConfig(sub, runs=1, out=str(tmp_path), traces=True, delta_init=(0.1,), **kw)
    assert run_experiment(cfg) == 0
    with open(tmp_path / "runs.csv", encoding="utf-8", newline="") as fh:
        text = fh.read()
    assert "\r" not in text
    assert tuple(text.splitlines()[0].split(",")) == COMMON_COLUMNS + METRIC_COLUMNS[sub]
    summary = read_rows(tmp_path / "summary.csv")
    assert list(summary[0]) == ["param", "pipeline", "metric", "count", "mean", "std"]
    assert list(read_rows(tmp_path / "timing.csv")[0]) == ["run", "pipeline", "seconds"]
    assert (tmp_path / "trace_0.csv").exists()


def test_assoc_summary_trend(tmp_path):
    cfg = ExperimentConfig("assoc", runs=5, noise=(0.0, 6.0), out=str(tmp_path))
    run_experiment(cfg)
    means = {(r["param"], r["pipeline"]): float(r["mean"]) for r in read_rows(tmp_path / "summary.csv") if r["metric"] == "correct"}
    for noise in ("0", "6"):
        assert means[(noise, "l1")] >= means[(noise, "unregularized")]


def test_byte_identical_reruns(tmp_path):
    outs = []
    for i, jobs in enumerate((1, 1, 2)):
        out = tmp_path / f"o{i}"
        assert run_experiment(ExperimentConfig("fundmat", runs=3, jobs=jobs, traces=True, out=str(out))) == 0
        outs.append(out)
    for name in ("runs.csv", "summary.csv", "trace_0.csv", "trace_2.csv"):
        ref = (outs[0] / name).read_bytes()
        assert all((o / name).read_bytes() == ref for o in outs[1:])


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "pgs.cli", "rayleigh", "--runs", "1", "--delta-init", "0", "--out", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0 and (tmp_path / "runs.csv").exists()
