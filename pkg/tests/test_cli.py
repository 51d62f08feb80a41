import json
import os

import numpy as np
import pytest

from qnlslab.cli import main
from qnlslab.recipes import (
    ExperimentConfig,
    parse_initial,
    parse_range,
    parse_theta,
    recipe,
    recipe_names,
)
from qnlslab.runner import RunError, run


# ------------------------------------------------------------ config model

def test_config_yaml_round_trip():
    cfg = ExperimentConfig("simulate", "demo",
                           params=dict(initial="cos:30,-5.0", modes=32,
                                       dt=1e-3, t_end=0.01, theta="pi/2"),
                           post=dict(fit_window=[0.1, 0.2]))
    back = ExperimentConfig.from_yaml(cfg.to_yaml())
    assert back.to_dict() == cfg.to_dict()


def test_config_rejects_unknown_kind_and_fields():
    with pytest.raises(ValueError):
        ExperimentConfig("explode")
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"kind": "simulate", "bogus": 1})


def test_config_override():
    cfg = ExperimentConfig("simulate", params=dict(modes=16, dt=1e-3))
    cfg.override("params.modes", 64)
    assert cfg.params["modes"] == 64


def test_parse_helpers():
    assert parse_theta("pi/2") == pytest.approx(np.pi / 2)
    assert parse_theta("-pi/4") == pytest.approx(-np.pi / 4)
    assert parse_theta(0.3) == 0.3
    assert list(parse_range("-2:2:1")) == [-2, -1, 0, 1, 2]
    lo_hi = parse_range("0:5")
    assert list(lo_hi) == [0, 5]
    f = parse_initial("cos:30,-5.3070235", 8)
    assert f.mode(0) == pytest.approx(-5.3070235)
    assert f.mode(1) == pytest.approx(15.0)
    g = parse_initial("exp:300", 8)
    assert g.mode(1) == 300.0 and g.mode(-1) == 0.0
    assert parse_initial("const:2j", 4).mode(0) == 2j
    with pytest.raises(ValueError):
        parse_initial("wavelet:1", 8)


# ---------------------------------------------------------------- recipes

def test_recipe_presets_match_published_parameters():
    fig3 = recipe("fig3-blowup")
    assert fig3.params["modes"] == 4096
    assert fig3.params["dt"] == 1e-7
    assert fig3.params["initial"] == "cos:30,-5.3070235"
    assert parse_theta(fig3.params["theta"]) == pytest.approx(np.pi / 2)
    fig7 = recipe("fig7-monochromatic")
    assert fig7.params["initial"] == "exp:300"
    fig2 = recipe("fig2-sweep")
    assert fig2.params["modes"] == 256
    assert fig2.params["dt"] == 1e-4
    assert fig2.params["t_end"] == 1.0
    assert fig2.params["A"] == "-150:150:1"


def test_recipe_unknown_name_lists_available():
    with pytest.raises(KeyError) as err:
        recipe("fig9-nonexistent")
    for name in recipe_names():
        assert name in str(err.value)


def test_recipe_scale_shrinks():
    cfg = recipe("fig3-blowup", scale=0.01)
    assert cfg.params["modes"] == max(16, round(4096 * 0.01))
    assert cfg.params["dt"] == pytest.approx(1e-5)


# ------------------------------------------------------------------ runner

def test_run_simulate_artifacts_and_determinism(tmp_path):
    cfg = dict(kind="simulate", name="tiny",
               params=dict(initial="cos:1,-0.5", theta="pi/2", modes=16,
                           dt=1e-3, t_end=0.05, record_stride=10,
                           snapshot_stride=20))
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    meta1 = run(ExperimentConfig.from_dict({**cfg, "output_dir": out1}))
    meta2 = run(ExperimentConfig.from_dict({**cfg, "output_dir": out2}))
    for name in ("series.csv", "meta.json", "inverse_norm.png",
                 "energy_fractions.png"):
        assert os.path.exists(os.path.join(out1, name))
    with open(os.path.join(out1, "series.csv"), "rb") as fh:
        s1 = fh.read()
    with open(os.path.join(out2, "series.csv"), "rb") as fh:
        s2 = fh.read()
    assert s1 == s2
    assert meta1["summary"]["outcome"]["kind"] == "reached_t_end"
    snaps = os.listdir(os.path.join(out1, "snapshots"))
    assert any(f.endswith(".csv") for f in snaps)
    # config echo suffices to re-run
    with open(os.path.join(out1, "meta.json")) as fh:
        meta = json.load(fh)
    echoed = ExperimentConfig.from_dict(meta["config"])
    assert echoed.params["initial"] == "cos:1,-0.5"


def test_run_missing_fields_reported(tmp_path):
    cfg = ExperimentConfig("simulate", params=dict(modes=8),
                           output_dir=str(tmp_path / "x"))
    with pytest.raises(RunError, match="initial"):
        run(cfg)


def test_run_sweep_and_bisect(tmp_path):
    out = str(tmp_path / "sweep")
    run(ExperimentConfig("sweep", params=dict(
        family="cos:30", A="-150:150:150", theta="pi/2", modes=16,
        dt=1e-3, t_end=0.01, record_stride=2), output_dir=out))
    lines = open(os.path.join(out, "sweep.csv")).read().splitlines()
    assert lines[0] == "A,outcome,trap_time,max_norm"
    assert len(lines) == 4
    assert os.path.exists(os.path.join(out, "sweep.png"))

    out = str(tmp_path / "bisect")
    run(ExperimentConfig("bisect", params=dict(
        family="const:0", range="-1:1", tol=0.05, modes=2, dt=2e-3),
        output_dir=out))
    doc = json.load(open(os.path.join(out, "bisect.json")))
    assert abs(doc["a_star"]) <= 0.05
    assert len(doc["history"]) >= 5


def test_run_galerkin_and_selfsim(tmp_path):
    out = str(tmp_path / "gal")
    meta = run(ExperimentConfig("galerkin", params=dict(
        N=1, theta=0.0, init="values:-1,0.1", dt=1e-3, t_end=2.0,
        record_stride=100), output_dir=out))
    assert os.path.exists(os.path.join(out, "series.csv"))
    assert meta["summary"]["outcome"]["kind"] == "reached_t_end"

    # synthetic power-law series through the selfsim pipeline
    t = np.linspace(0.05, 0.45, 200)
    inv = 2.0 * (0.5 - t) ** 1.5
    series = str(tmp_path / "series.csv")
    with open(series, "w") as fh:
        fh.write("t,sup_norm\n")
        for ti, yi in zip(t, 1.0 / inv):
            fh.write(f"{float(ti)!r},{float(yi)!r}\n")
    out = str(tmp_path / "fit")
    meta = run(ExperimentConfig("selfsim", params=dict(
        series=series, window=[0.05, 0.45]), output_dir=out))
    assert meta["summary"]["fit"]["alpha"] == pytest.approx(1.5, abs=1e-6)
    assert os.path.exists(os.path.join(out, "fit.json"))


def test_run_manifold_writes_model(tmp_path):
    out = str(tmp_path / "mani")
    meta = run(ExperimentConfig("manifold", params=dict(
        N=2, order=5, sigma="0.1,0.05"), output_dir=out))
    assert os.path.exists(os.path.join(out, "model.json"))
    assert meta["summary"]["resonances"] == 1


# --------------------------------------------------------------------- CLI

def test_cli_no_args_usage():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code != 0


def test_cli_recipe_listing(capsys):
    assert main(["recipe"]) == 0
    out = capsys.readouterr().out
    for name in recipe_names():
        assert name in out


def test_cli_recipe_show(capsys):
    assert main(["recipe", "fig2-sweep", "--show"]) == 0
    assert "kind: sweep" in capsys.readouterr().out


def test_cli_simulate_and_resonances(tmp_path, capsys):
    out = str(tmp_path / "run")
    code = main(["simulate", "--initial", "const:-1", "--theta", "0",
                 "--modes", "4", "--dt", "1e-3", "--tend", "0.01",
                 "--out", out])
    assert code == 0
    assert os.path.exists(os.path.join(out, "series.csv"))
    capsys.readouterr()
    assert main(["manifold", "resonances", "--N", "3", "--order", "20"]) == 0
    text = capsys.readouterr().out
    assert "4 resonances" in text
    assert "(9, 0, 0)" in text


def test_cli_manifold_build_and_eval(tmp_path, capsys):
    out = str(tmp_path / "m")
    assert main(["manifold", "build", "--N", "2", "--order", "4",
                 "--out", out]) == 0
    capsys.readouterr()
    model = os.path.join(out, "model.json")
    assert main(["manifold", "eval", "--model", model,
                 "--sigma", "0.0,0.0"]) == 0
    text = capsys.readouterr().out
    assert "a_0" in text


def test_cli_run_config_with_override(tmp_path, capsys):
    cfg_path = str(tmp_path / "cfg.yaml")
    out = str(tmp_path / "out")
    cfg = ExperimentConfig("simulate", "demo",
                           params=dict(initial="const:-1", theta=0.0,
                                       modes=4, dt=1e-3, t_end=0.02))
    with open(cfg_path, "w") as fh:
        fh.write(cfg.to_yaml())
    assert main(["run", cfg_path, "--set", "params.t_end=0.01",
                 "--out", out]) == 0
    meta = json.load(open(os.path.join(out, "meta.json")))
    assert meta["config"]["params"]["t_end"] == 0.01
