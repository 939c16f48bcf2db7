import hashlib
import json

import pytest

from levelset_gibbs.cli import main as cli_main
from levelset_gibbs.harness import (ConfigError, ExperimentConfig,
                                    experiment_ids, parse_config_file,
                                    run_experiment)
from levelset_gibbs.svg import Series, emit_svg

# small-but-real override sets so the schema checks run quickly
FAST_OVERRIDES = {
    "fig1": {"eps_grid": [1e-2, 1e-3, 1e-4]},
    "fig2": {"chains": 64, "steps": 60, "burn_in": 10},
    "fig3": {"chains": 16, "total_steps": 8000, "burn_in": 50},
    "w1rate": {"eps_grid": [1e-4, 1e-3, 1e-2], "grid_n": 1024},
    "coarea": {"eps_grid": [0.1]},
    "lemma_a1": {},
    "prop10": {"n_grid": [10, 50], "trials": 50},
    "barrier": {"mixture_eps_grid": [1e-5, 1e-4, 1e-3]},
    "sgld": {"total_steps": 4000, "chains": 20, "eps_grid": [0.1],
             "burn_in": 50},
}

EXPECTED_HEADERS = {
    "fig1.csv": "eps,moment,ratio",
    "fig2_roots.csv": ("root,target_corrected,empirical_corrected,"
                       "target_plain,empirical_plain"),
    "fig2_summary.csv": "chain,tv_vs_uniform,tv_vs_inverse_slope_weights",
    "fig3_hist.csv": ("bin_left,bin_right,corrected_emp,plain_emp,"
                      "target_uniform,target_weighted"),
    "fig3_summary.csv": "chain,tv_own,tv_other",
    "w1rate.csv": "eps,w1_psi_one,w1_psi_jf",
    "w1rate_fit.csv": "weight,slope,intercept,r_squared",
    "coarea.csv": "map,a1,a2,k,eps,lhs,rhs,rel_residual",
    "lemma_a1.csv": ("map,x1,x2,jf,normal_hessian_det,expected,rel_error"),
    "prop10.csv": "n,trials,mean_excess,bound,positive_side_fraction",
    "barrier_point.csv": "k_index,z,eps,w1",
    "barrier_mixture.csv": "k_index,eps,w1,lower_bound",
    "barrier_rates.csv": "k_index,slope,expected_slope",
    "sgld.csv": "eps,w1_to_gibbs,w1_to_atoms",
}


def test_unknown_experiment():
    with pytest.raises(ConfigError):
        run_experiment(ExperimentConfig(experiment="nosuch"))


def test_unknown_override():
    with pytest.raises(ConfigError):
        run_experiment(ExperimentConfig(experiment="fig1",
                                        overrides={"bogus": 1}))


def test_override_type_check():
    with pytest.raises(ConfigError):
        run_experiment(ExperimentConfig(experiment="prop10",
                                        overrides={"trials": "many"}))


def test_prop10_zero_trials_rejected(tmp_path):
    with pytest.raises(ConfigError, match="trials"):
        run_experiment(ExperimentConfig(experiment="prop10",
                                        out_dir=str(tmp_path),
                                        overrides={"trials": 0}))


@pytest.mark.parametrize("experiment", sorted(FAST_OVERRIDES))
def test_csv_headers_pinned(experiment, tmp_path):
    man = run_experiment(ExperimentConfig(
        experiment=experiment, seed=0, out_dir=str(tmp_path),
        overrides=FAST_OVERRIDES[experiment]))
    assert man.experiment == experiment
    for name in man.outputs:
        if name.endswith(".csv"):
            first = (tmp_path / name).read_text().splitlines()[0]
            assert first == EXPECTED_HEADERS[name], name


def test_experiment_ids_stable():
    assert experiment_ids() == ["barrier", "coarea", "fig1", "fig2", "fig3",
                                "lemma_a1", "prop10", "sgld", "w1rate"]


def test_manifest_reproducibility(tmp_path):
    cfg = dict(experiment="prop10", seed=3,
               overrides={"n_grid": [10], "trials": 40})
    m1 = run_experiment(ExperimentConfig(out_dir=str(tmp_path / "a"), **cfg))
    m2 = run_experiment(ExperimentConfig(out_dir=str(tmp_path / "b"), **cfg))
    assert m1.outputs == m2.outputs
    m3 = run_experiment(ExperimentConfig(out_dir=str(tmp_path / "c"),
                                         experiment="prop10", seed=4,
                                         overrides={"n_grid": [10],
                                                    "trials": 40}))
    assert m3.outputs != m1.outputs


def test_chain_experiment_bitwise_reproducible(tmp_path):
    over = {"chains": 16, "total_steps": 4000, "burn_in": 50}
    m1 = run_experiment(ExperimentConfig(experiment="fig3", seed=2,
                                         out_dir=str(tmp_path / "a"),
                                         overrides=over))
    m2 = run_experiment(ExperimentConfig(experiment="fig3", seed=2,
                                         out_dir=str(tmp_path / "b"),
                                         overrides=over))
    assert m1.outputs == m2.outputs


def test_manifest_checksums_match_files(tmp_path):
    man = run_experiment(ExperimentConfig(
        experiment="barrier", out_dir=str(tmp_path),
        overrides=FAST_OVERRIDES["barrier"]))
    for name, digest in man.outputs.items():
        assert hashlib.sha256((tmp_path / name).read_bytes()).hexdigest() == digest
    stored = json.loads((tmp_path / "manifest.json").read_text())
    assert stored["outputs"] == man.outputs


def test_parse_config_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("""
# comment
seed = 4
[fig3]
eps = 1e-3
chains = 8
paper_scale = false
grid = 1, 2, 3.5
name = hello
""")
    cfg = parse_config_file(p)
    assert cfg["seed"] == 4
    assert cfg["fig3.eps"] == 1e-3
    assert cfg["fig3.chains"] == 8
    assert cfg["fig3.paper_scale"] is False
    assert cfg["fig3.grid"] == [1, 2, 3.5]
    assert cfg["fig3.name"] == "hello"


def test_parse_config_rejects_garbage(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("not a key value line\n")
    with pytest.raises(ConfigError):
        parse_config_file(p)


def test_emit_svg_single_point(tmp_path):
    path = tmp_path / "one.svg"
    emit_svg([Series([1.0], [2.0], kind="points", label="pt")], path)
    text = path.read_text()
    assert text.startswith("<svg")
    assert "<circle" in text


def test_emit_svg_empty_series_rejected(tmp_path):
    with pytest.raises(ValueError):
        emit_svg([], tmp_path / "x.svg")
    with pytest.raises(ValueError):
        Series([], [], kind="line")


def test_cli_catalog_exit_zero(capsys):
    assert cli_main(["catalog"]) == 0
    out = capsys.readouterr().out
    assert "quartic" in out and "experiments" in out


def test_cli_run_success(tmp_path):
    rc = cli_main(["run", "lemma_a1", "--out", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "manifest.json").exists()


def test_cli_unknown_experiment_exit_one(tmp_path, capsys):
    assert cli_main(["run", "nosuch", "--out", str(tmp_path)]) == 1


def test_cli_config_error_exit_one(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("trials = 0\n")
    rc = cli_main(["run", "prop10", "--config", str(cfg), "--out",
                   str(tmp_path)])
    assert rc == 1


def test_cli_numeric_failure_exit_two(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    # a step size this large diverges immediately
    cfg.write_text("[fig3]\ngamma = 1000.0\ntotal_steps = 2000\nchains = 4\n"
                   "burn_in = 10\n")
    rc = cli_main(["run", "fig3", "--config", str(cfg), "--out",
                   str(tmp_path)])
    assert rc == 2


def test_cli_env_var_output_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("LEVELSET_GIBBS_OUT", str(tmp_path / "envout"))
    rc = cli_main(["run", "lemma_a1"])
    assert rc == 0
    assert (tmp_path / "envout" / "lemma_a1.csv").exists()


def test_config_section_prefix_optional(tmp_path):
    cfg = tmp_path / "p.cfg"
    cfg.write_text("[prop10]\ntrials = 40\nn_grid = 10\n")
    rc = cli_main(["run", "prop10", "--config", str(cfg), "--out",
                   str(tmp_path)])
    assert rc == 0
    rows = (tmp_path / "prop10.csv").read_text().splitlines()
    assert rows[1].startswith("10,40,")
