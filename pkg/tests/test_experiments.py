import numpy as np
import pytest

from conftest import SAMPLE_DATASET, VALID_RESPONSE, FakeChatClient
from config.experiment import build_experiment_config, load_experiment_config
from experiments.herding import run_herding_experiment
from experiments.llm_probe import probe_llm
from experiments.rbm_training import train_rbm
from experiments.structure import run_structure_check
from experiments.threshold import best_threshold, run_threshold_experiment, solve_oracle
from social_learning.exceptions import ConfigError
from utils.database import TranscriptCache

TOXIC = {
    "n_states": 2,
    "cost": {"preset": "type-one-error"},
    "likelihood": {"source": "preset", "preset": "toxic"},
}


# Configuration

def test_config_defaults():
    config = build_experiment_config({})
    assert config.kind == "herding"
    assert config.n_states == 6
    assert config.prior_values()[0] == pytest.approx(0.05)
    assert config.prior_values()[-1] == pytest.approx(0.95)
    assert len(config.prior_values()) == 19
    assert config.state_values() == list(range(6))
    assert config.stopping.gamma_values()[:3] == [0.0, 0.05, 0.1]
    assert config.observation_model().b[0, 0] == pytest.approx(0.4)


def test_config_overrides_and_canonical_form(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("kind: herding\nseed: 3\nn_runs: 7\nout: a.csv\n", encoding="utf-8")
    config = load_experiment_config(str(path), seed=9, out="b.csv", sensor=None)
    assert config.seed == 9
    assert config.n_runs == 7
    assert config.out == "b.csv"
    assert "out" not in config.canonical()
    other = load_experiment_config(str(path), seed=9, out="c.csv")
    assert config.canonical() == other.canonical()


@pytest.mark.parametrize("data", [
    {"n_runs": 0},
    {"true_states": [7]},
    {"prior_grid": [1.5]},
    {"kind": "unknown"},
    {"stopping": {"rho": 1.0}},
    {"cost": {"preset": "custom", "path": "does/not/exist.csv"}},
    {"likelihood": {"source": "rbm"}},
])
def test_invalid_configs(data):
    with pytest.raises(ConfigError):
        build_experiment_config(data)


def test_config_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_experiment_config(str(tmp_path / "missing.yaml"))
    bad = tmp_path / "bad.yaml"
    bad.write_text("- just\n- a list\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_experiment_config(str(bad))


def test_custom_matrices_are_loaded(tmp_path):
    likelihood = tmp_path / "b.csv"
    likelihood.write_text("0.9,0.1\n0.2,0.8\n", encoding="utf-8")
    cost = tmp_path / "c.csv"
    cost.write_text("0,2\n1,0\n", encoding="utf-8")
    config = build_experiment_config({
        "n_states": 2,
        "cost": {"preset": "custom", "path": str(cost)},
        "likelihood": {"source": "matrix", "path": str(likelihood)},
    })
    assert config.cost_model().c.tolist() == [[0.0, 2.0], [1.0, 0.0]]
    assert config.observation_model().b[1].tolist() == [0.2, 0.8]


# Herding

def test_herding_experiment_writes_provenance(tmp_path):
    out = str(tmp_path / "herding.csv")
    config = build_experiment_config({"prior_grid": [0.99], "true_states": [0, 5], "n_runs": 3,
                                      "horizon": 10, "out": out})
    table = run_herding_experiment(config)
    assert len(table) == 2
    assert table.frame["mean_action"].tolist() == [0.0, 0.0]
    assert table.provenance["kind"] == "herding"
    with open(out, encoding="utf-8") as f:
        assert f.readline().startswith("# kind: herding")


def test_herding_is_independent_of_worker_count():
    data = {"n_states": 2, "cost": {"preset": "misclassification"},
            "likelihood": {"preset": "diagonal", "accuracy": 0.7},
            "prior_grid": [0.3, 0.6], "n_runs": 4, "horizon": 15, "seed": 5}
    serial = run_herding_experiment(build_experiment_config({**data, "workers": 1}))
    parallel = run_herding_experiment(build_experiment_config({**data, "workers": 2}))
    assert serial.frame.equals(parallel.frame)


# Threshold policy

def test_threshold_sweep_flag_rates():
    config = build_experiment_config({
        **TOXIC,
        "kind": "threshold",
        "prior_grid": [0.9],
        "stopping": {"gamma_step": 0.1, "n_episodes": 200, "horizon_cap": 100, "true_state": 1},
    })
    frame = run_threshold_experiment(config).frame
    pct = frame["pct_not_flagged"].tolist()
    assert frame["gamma"].tolist()[0] == 0.0
    assert pct[0] == 100.0
    assert pct[-1] == pytest.approx(30.0, abs=3.0)
    assert all(later <= earlier for earlier, later in zip(pct, pct[1:]))


def test_gamma_zero_never_flags_when_benign_is_likely():
    config = build_experiment_config({
        **TOXIC,
        "prior_grid": [0.6, 0.9],
        "stopping": {"gammas": [0.0], "n_episodes": 10, "horizon_cap": 20},
    })
    frame = run_threshold_experiment(config).frame
    assert frame["pct_not_flagged"].tolist() == [100.0, 100.0]


def test_threshold_requires_two_states():
    with pytest.raises(ConfigError):
        run_threshold_experiment(build_experiment_config({"kind": "threshold"}))


def test_best_threshold_table():
    config = build_experiment_config({**TOXIC, "prior_grid": [0.5, 0.9],
                                      "stopping": {"gamma_step": 0.25}})
    table, best = best_threshold(config)
    assert table["gamma"].tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert 0.0 <= best <= 1.0


def test_solve_oracle_with_spsa(tmp_path):
    out = str(tmp_path / "oracle.csv")
    config = build_experiment_config({
        **TOXIC,
        "kind": "solve-oracle",
        "prior_grid": [0.5, 0.9],
        "stopping": {"oracle_resolution": 64, "gamma_step": 0.05, "spsa_iterations": 3,
                     "n_episodes": 5, "horizon_cap": 20},
        "out": out,
    })
    table = solve_oracle(config)
    assert table.columns == ["belief_gridpoint", "value", "decision"]
    assert len(table) == 64
    assert set(table.frame["decision"]) <= {1, 2}
    assert 0.0 <= float(table.provenance["spsa_gamma"]) <= 1.0
    assert table.provenance["switching_points"]


# Structure report

def test_structure_report(tmp_path):
    out = tmp_path / "structure.json"
    config = build_experiment_config({**TOXIC, "kind": "check-structure", "out": str(out)})
    report = run_structure_check(config)
    assert report["S4"] is True
    assert report["S1"] is False
    assert [v for v in report["violations"] if v["assumption"] == "S1"] == [
        {"assumption": "S1", "state": 0, "action": 0, "lhs": -1.0, "rhs": 0.0}]
    assert report["observation_matrix_tp2"] is True
    assert out.exists()


# RBM training

def test_train_rbm_synthetic(tmp_path):
    out = str(tmp_path / "likelihood.csv")
    config = build_experiment_config({
        "kind": "train-rbm",
        "rbm": {"epochs": 5, "gibbs_samples": 50, "gibbs_iterations": 10, "n_per_state": 20},
        "out": out,
    })
    model = train_rbm(config)
    assert model.b.shape == (6, 6)
    np.testing.assert_allclose(model.b.sum(axis=1), 1.0)
    assert (tmp_path / "likelihood.json").exists()

    reloaded = build_experiment_config({
        "likelihood": {"source": "rbm"},
        "rbm": {"params_path": str(tmp_path / "likelihood.json"), "gibbs_samples": 50,
                "gibbs_iterations": 10},
    })
    assert reloaded.observation_model().b.shape == (6, 6)


def test_train_rbm_rejects_rbm_source(tmp_path):
    params = tmp_path / "p.json"
    params.write_text('{"states": []}', encoding="utf-8")
    config = build_experiment_config({"kind": "train-rbm", "likelihood": {"source": "rbm"},
                                      "rbm": {"params_path": str(params)}})
    with pytest.raises(ConfigError):
        train_rbm(config)


# LLM probe

def test_probe_llm_synthetic():
    config = build_experiment_config({
        "kind": "probe-llm",
        "dataset_path": SAMPLE_DATASET,
        "comments_per_user": 3,
        "user_types": [0, 3],
    })
    table = probe_llm(config)
    assert len(table) == 6
    assert table.frame["user_type"].tolist() == [0, 0, 0, 3, 3, 3]


def test_probe_llm_remote_fills_cache(tmp_path):
    cache_path = str(tmp_path / "transcripts.jsonl")
    config = build_experiment_config({
        "kind": "probe-llm",
        "sensor": "remote",
        "transcript_cache": cache_path,
        "sensor_settings": {"max_retries": 0},
        "dataset_path": SAMPLE_DATASET,
        "comments_per_user": 2,
        "user_types": [1],
    })
    fake = FakeChatClient([VALID_RESPONSE])
    table = probe_llm(config, client=fake)
    assert table.frame["observation"].tolist() == [1, 1]
    assert len(TranscriptCache(cache_path)) == 2
