import numpy as np
import pytest

from social_learning.exceptions import ConfigError, EmptyData
from social_learning.rbm_likelihood import (
    RbmParams,
    TrainConfig,
    all_visible_states,
    dump_samples,
    estimate_likelihood,
    exact_marginal,
    exact_nll,
    gibbs_sample,
    likelihood_from_rbms,
    load_rbms,
    save_rbms,
    train_cd,
    train_state_rbms,
)
from utils.sensing import N_FLAGS, synthetic_flags

PATTERN = np.array([1, 0, 1, 0, 0, 1], dtype=float)


def pattern_index(pattern: np.ndarray) -> int:
    states = all_visible_states(pattern.size)
    return int(np.flatnonzero((states == pattern).all(axis=1))[0])


# Training

def test_training_learns_a_repeated_vector():
    data = np.tile(PATTERN, (50, 1))
    params = train_cd(data, TrainConfig(epochs=200, learning_rate=0.5, rng_seed=3))
    assert int(np.argmax(exact_marginal(params))) == pattern_index(PATTERN)


def test_zero_learning_rate_keeps_initial_parameters():
    data = np.tile(PATTERN, (10, 1))
    initial = train_cd(data, TrainConfig(epochs=0, learning_rate=0.0, rng_seed=8))
    trained = train_cd(data, TrainConfig(epochs=5, learning_rate=0.0, rng_seed=8))
    np.testing.assert_array_equal(initial.weights, trained.weights)
    np.testing.assert_array_equal(initial.visible_bias, trained.visible_bias)
    np.testing.assert_array_equal(initial.hidden_bias, trained.hidden_bias)


def test_training_is_deterministic():
    data = np.random.default_rng(0).integers(0, 2, size=(40, 6))
    config = TrainConfig(epochs=20, rng_seed=4)
    first, second = train_cd(data, config), train_cd(data, config)
    np.testing.assert_array_equal(first.weights, second.weights)


def test_training_reduces_negative_log_likelihood():
    data = np.tile(PATTERN, (50, 1))
    history = []
    train_cd(data, TrainConfig(epochs=100, learning_rate=0.5, rng_seed=1),
             on_epoch=lambda epoch, params: history.append(exact_nll(params, data)))
    assert len(history) == 100
    assert np.mean(history[-10:]) < np.mean(history[:10])
    assert history[-1] < 6 * np.log(2) - 1.0


@pytest.mark.parametrize("data", [[], np.zeros((0, 6))])
def test_training_rejects_empty_data(data):
    with pytest.raises(EmptyData):
        train_cd(data, TrainConfig(epochs=1))


def test_training_rejects_non_binary_data():
    with pytest.raises(ValueError):
        train_cd(np.full((3, 6), 0.5), TrainConfig(epochs=1))


# Sampling

def test_gibbs_with_zero_parameters_is_uniform():
    samples = gibbs_sample(RbmParams.zeros(), 10_000, 5, np.random.default_rng(2))
    assert samples.shape == (10_000, 6)
    np.testing.assert_allclose(samples.mean(axis=0), 0.5, atol=0.02)


def test_gibbs_follows_strong_visible_bias():
    params = RbmParams(np.zeros((6, 4)), np.full(6, 10.0), np.zeros(4))
    samples = gibbs_sample(params, 1000, 5, np.random.default_rng(3))
    assert samples.mean() > 0.99


def test_gibbs_matches_exact_marginal():
    rng = np.random.default_rng(5)
    params = RbmParams(rng.normal(0.0, 0.5, size=(6, 4)), rng.normal(0.0, 0.5, size=6),
                       rng.normal(0.0, 0.5, size=4))
    samples = gibbs_sample(params, 10_000, 100, np.random.default_rng(6))
    indices = samples @ (2 ** np.arange(5, -1, -1))
    empirical = np.bincount(indices, minlength=64) / len(samples)
    total_variation = 0.5 * np.abs(empirical - exact_marginal(params)).sum()
    assert total_variation < 0.1


def test_exact_marginal_sums_to_one():
    params = RbmParams(np.full((6, 4), 0.3), np.linspace(-1, 1, 6), np.ones(4))
    assert exact_marginal(params).sum() == pytest.approx(1.0)


# Likelihood estimation

def test_estimate_likelihood_concentrated_rows():
    samples = [np.tile(synthetic_flags(j), (100, 1)) for j in range(N_FLAGS)]
    model = estimate_likelihood(samples)
    for j in range(N_FLAGS):
        assert model.b[j, j] > 0.98
        assert int(np.argmax(model.b[j])) == j


def test_estimate_likelihood_without_smoothing_keeps_zeros():
    samples = [np.tile(synthetic_flags(0), (10, 1)), np.tile(synthetic_flags(3), (10, 1))]
    model = estimate_likelihood(samples, alpha=0.0)
    assert model.b[0].tolist() == [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]
    assert model.b[1, 3] == 1.0


def test_estimate_likelihood_recovers_categorical():
    rng = np.random.default_rng(12)
    p = np.array([0.4, 0.1, 0.2, 0.05, 0.15, 0.1])
    draws = rng.choice(N_FLAGS, size=10_000, p=p)
    samples = np.array([synthetic_flags(int(y)) for y in draws])
    model = estimate_likelihood([samples])
    assert 0.5 * np.abs(model.b[0] - p).sum() < 0.05


def test_estimate_likelihood_rejects_empty_state():
    with pytest.raises(EmptyData):
        estimate_likelihood([np.zeros((0, 6))])


def test_per_state_pipeline_is_row_stochastic():
    rng = np.random.default_rng(0)
    data = [rng.integers(0, 2, size=(30, 6)).astype(float) for _ in range(3)]
    config = TrainConfig(epochs=5, gibbs_samples=200, gibbs_iterations=10, rng_seed=7)
    machines = train_state_rbms(data, config)
    model = likelihood_from_rbms(machines, config)
    assert model.b.shape == (3, N_FLAGS)
    np.testing.assert_allclose(model.b.sum(axis=1), 1.0)


# Persistence

def test_save_and_load_parameters(tmp_path):
    machines = [RbmParams.zeros(), RbmParams(np.ones((6, 4)), np.arange(6.0), -np.ones(4))]
    path = str(tmp_path / "rbm.json")
    save_rbms(machines, path)
    loaded = load_rbms(path)
    assert len(loaded) == 2
    np.testing.assert_array_equal(loaded[1].weights, machines[1].weights)
    np.testing.assert_array_equal(loaded[1].visible_bias, machines[1].visible_bias)


def test_load_rejects_bad_documents(tmp_path):
    with pytest.raises(ConfigError):
        load_rbms(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text('{"states": [{"n_visible": 6}]}', encoding="utf-8")
    with pytest.raises(ConfigError):
        load_rbms(str(bad))


def test_dump_samples_writes_bit_strings(tmp_path):
    path = tmp_path / "samples.txt"
    dump_samples(np.array([[0, 1, 0, 0, 0, 0], [1, 1, 1, 1, 1, 1]]), str(path))
    assert path.read_text(encoding="utf-8") == "010000\n111111\n"
