import json
import os

import pytest

from crossblock.cli import UsageError, load_sweep_config, main
from crossblock.core import read_graph_file
from crossblock.infer import read_posterior_file
from crossblock.scbm import CrossSpec


def run(*argv):
    return main(list(argv))


def test_construct_writes_spec(tmp_path, capsys):
    out = tmp_path / "spec.json"
    rc = run("construct", "--mu", "0.1", "--lambda", "0.1", "--n", "400", "--c", "10", "--out", str(out))
    assert rc == 0
    printed = capsys.readouterr().out
    assert "consistency residual" in printed
    spec = CrossSpec.from_json(out.read_text())
    assert spec.n_cross_blocks == 4
    assert spec.theta_scbm.entries[0, 0] == pytest.approx(0.081)


def test_construct_zero_strength_is_usage_error(capsys):
    assert run("construct", "--mu", "0", "--lambda", "0.1") == 2


def test_construct_general_sizes(capsys):
    rc = run("construct", "--mu", "0.1", "--lambda", "0.1", "--sizes", "120,80,80,120")
    assert rc == 0
    printed = capsys.readouterr().out
    assert "sizes: [120, 80, 80, 120]" in printed


def test_unknown_flag_is_usage_error(capsys):
    assert run("construct", "--mu", "0.1", "--lambda", "0.1", "--bogus", "1") == 2


def test_generate_then_infer_round_trip(tmp_path, capsys):
    spec_path = tmp_path / "spec.json"
    graph_path = tmp_path / "g.tsv"
    report_path = tmp_path / "rep.json"
    post_path = tmp_path / "post.txt"
    assert run("construct", "--mu", "0.1", "--lambda", "0.1", "--out", str(spec_path)) == 0
    rc = run(
        "generate", "--spec", str(spec_path), "--variant", "canonical",
        "--seed", "3", "--out", str(graph_path), "--report", str(report_path),
    )
    assert rc == 0
    g = read_graph_file(str(graph_path))
    assert g.n_nodes == 400
    assert json.loads(report_path.read_text())["variant"] == "canonical"

    rc = run(
        "infer", "--graph", str(graph_path), "--variant", "dc", "--samples", "5",
        "--burn-in", "80", "--spacing", "5", "--seed", "7", "--out", str(post_path),
    )
    assert rc == 0
    samples = read_posterior_file(str(post_path))
    assert len(samples) == 5
    assert all(s.variant == "dc" for s in samples)


def test_infer_missing_graph_is_runtime_error(tmp_path, capsys):
    rc = run("infer", "--graph", str(tmp_path / "nope.tsv"), "--variant", "dc", "--out", str(tmp_path / "x"))
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def write_small_cfg(path):
    path.write_text(
        "mu_values=0.1,0.45\n"
        "lambda_values=0.1,0.45\n"
        "replicas=1\n"
        "samples_per_graph=3\n"
        "burn_in_sweeps=80\n"
        "sweeps_between_samples=5\n"
        "variants=ndc\n"
    )


def test_sweep_analyze_plot_pipeline(tmp_path, capsys):
    cfg_path = tmp_path / "small.cfg"
    write_small_cfg(cfg_path)
    out_dir = tmp_path / "run"
    assert run("sweep", "--config", str(cfg_path), "--out", str(out_dir)) == 0
    assert (out_dir / "results.csv").exists()
    assert (out_dir / "summary.csv").exists()
    assert (out_dir / "metadata.txt").exists()

    summary = tmp_path / "sum.csv"
    rc = run("analyze", "--results", str(out_dir / "results.csv"), "--omega-t", "0.85", "--out", str(summary))
    assert rc == 0
    lines = summary.read_text().splitlines()
    assert lines[0].startswith("lambda,mu,c,generator,omega_t,q1,q2,alpha")
    assert len(lines) == 5

    svg = tmp_path / "map.svg"
    rc = run("plot", "--results", str(out_dir / "results.csv"), "--metric", "alpha", "--out", str(svg))
    assert rc == 0
    assert svg.read_text().startswith("<svg ")


def test_load_sweep_config_overrides_and_validation(tmp_path, monkeypatch):
    cfg_path = tmp_path / "c.cfg"
    write_small_cfg(cfg_path)
    cfg = load_sweep_config(str(cfg_path), replicas=4)
    assert cfg.replicas == 4  # flag beats file
    assert cfg.samples_per_graph == 3
    assert cfg.variants == ("ndc",)

    monkeypatch.setenv("SCBM_SEED", "99")
    assert load_sweep_config(str(cfg_path)).base_seed == 99
    assert load_sweep_config(str(cfg_path), base_seed=7).base_seed == 7

    bad = tmp_path / "bad.cfg"
    bad.write_text("not_a_field=1\n")
    with pytest.raises(UsageError):
        load_sweep_config(str(bad))


def test_sweep_bad_config_is_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("mystery=1\n")
    rc = run("sweep", "--config", str(bad), "--out", str(tmp_path / "r"))
    assert rc == 2
    assert "usage error" in capsys.readouterr().err
