import numpy as np
import pytest

from deidkit.errors import ConfigError, NumericsError
from deidkit.numerics import (
    ParameterStore,
    TrainingConfig,
    clip_gradients,
    dropout_mask,
    finite_diff_check,
    glorot_uniform,
    sgd_step,
)


def test_sgd_step_basic_arithmetic():
    store = ParameterStore()
    w = store.add("w", np.array([1.0]))
    w.grad[...] = 2.0
    sgd_step(store, lr=0.005)
    assert w.values[0] == pytest.approx(0.99)
    assert w.grad[0] == 0.0


def test_sgd_zero_gradient_leaves_store_unchanged():
    store = ParameterStore()
    w = store.add("w", np.array([3.0, -1.5]))
    sgd_step(store, lr=0.005)
    assert np.array_equal(w.values, [3.0, -1.5])


def test_sgd_nan_gradient_names_parameter():
    store = ParameterStore()
    store.add("emit.W", np.zeros(2))
    store["emit.W"].grad[0] = np.nan
    with pytest.raises(NumericsError, match="emit.W"):
        sgd_step(store, lr=0.1)


def test_sgd_lr_zero_is_identity_on_values():
    store = ParameterStore()
    w = store.add("w", np.array([1.0, 2.0]))
    w.grad[...] = 5.0
    sgd_step(store, lr=0.0)
    assert np.array_equal(w.values, [1.0, 2.0])


def test_dropout_rate_zero_is_identity():
    mask = dropout_mask(10, 0.0, np.random.default_rng(0))
    assert np.array_equal(mask, np.ones(10))


def test_dropout_mean_preserved_at_half():
    mask = dropout_mask(10**6, 0.5, np.random.default_rng(1))
    assert abs(mask.mean() - 1.0) < 0.01
    assert set(np.unique(mask)) == {0.0, 2.0}


def test_dropout_deterministic_given_rng_state():
    a = dropout_mask(100, 0.3, np.random.default_rng(7))
    b = dropout_mask(100, 0.3, np.random.default_rng(7))
    assert np.array_equal(a, b)


def test_dropout_invalid_rate():
    with pytest.raises(ConfigError):
        dropout_mask(5, 1.0, np.random.default_rng(0))


def quadratic_loss(store):
    total = 0.0
    for array in store:
        total += float(np.sum(array.values**2))
        array.grad[...] = 2.0 * array.values
    return total


def test_finite_diff_quadratic_exact():
    store = ParameterStore()
    rng = np.random.default_rng(3)
    store.add("a", rng.normal(size=(3, 2)))
    store.add("b", rng.normal(size=4))
    assert finite_diff_check(quadratic_loss, store) < 1e-9


def test_finite_diff_constant_loss_zero_error():
    store = ParameterStore()
    store.add("a", np.array([1.0, -2.0]))

    def constant(store):
        for array in store:
            array.grad[...] = 0.0
        return 7.0

    assert finite_diff_check(constant, store) == 0.0


def test_finite_diff_order_invariant():
    rng = np.random.default_rng(9)
    a, b = rng.normal(size=3), rng.normal(size=2)
    s1 = ParameterStore()
    s1.add("a", a.copy())
    s1.add("b", b.copy())
    s2 = ParameterStore()
    s2.add("b", b.copy())
    s2.add("a", a.copy())
    assert finite_diff_check(quadratic_loss, s1) == finite_diff_check(quadratic_loss, s2)


def test_finite_diff_detects_wrong_gradient():
    store = ParameterStore()
    store.add("a", np.array([1.0]))

    def wrong(store):
        store["a"].grad[...] = 3.0 * store["a"].values  # loss is sum of squares
        return float(np.sum(store["a"].values ** 2))

    assert finite_diff_check(wrong, store) > 0.1


def test_clip_gradients_global_norm():
    store = ParameterStore()
    w = store.add("w", np.zeros(2))
    w.grad[...] = [3.0, 4.0]
    norm = clip_gradients(store, 1.0)
    assert norm == pytest.approx(5.0)
    assert np.linalg.norm(w.grad) == pytest.approx(1.0)
    w.grad[...] = [0.3, 0.4]
    clip_gradients(store, 1.0)
    assert np.allclose(w.grad, [0.3, 0.4])


def test_store_rejects_duplicates_and_clones():
    store = ParameterStore(rng_seed=5)
    store.add("w", np.arange(3.0))
    with pytest.raises(NumericsError):
        store.add("w", np.zeros(1))
    clone = store.clone()
    clone["w"].values[0] = 99.0
    assert store["w"].values[0] == 0.0
    assert clone.rng_seed == 5


def test_config_validation():
    TrainingConfig()  # defaults are the published hyperparameters
    with pytest.raises(ConfigError):
        TrainingConfig(dropout=1.0)
    with pytest.raises(ConfigError):
        TrainingConfig(lr=0.0)
    with pytest.raises(ConfigError):
        TrainingConfig(char_hidden=0)
    with pytest.raises(ConfigError):
        TrainingConfig.from_dict({"nope": 1})
    cfg = TrainingConfig()
    assert TrainingConfig.from_dict(cfg.to_dict()) == cfg
    assert (cfg.lr, cfg.max_epochs, cfg.patience) == (0.005, 100, 10)
    assert (cfg.char_emb_dim, cfg.word_emb_dim) == (25, 100)
    assert (cfg.char_hidden, cfg.token_hidden, cfg.dropout) == (25, 100, 0.5)


def test_glorot_limits():
    rng = np.random.default_rng(0)
    w = glorot_uniform(rng, (40, 60))
    limit = np.sqrt(6.0 / 100.0)
    assert np.max(np.abs(w)) <= limit
    assert np.max(np.abs(w)) > 0.5 * limit
