import dataclasses
import json

import numpy as np
import pytest

from sparsetime.exceptions import ConfigError, DataError, NonFiniteGradientError, ShapeError
from sparsetime.model import PARAM_NAMES, Gradients, init_params
from sparsetime.pipeline.dataset import build_split_dataset
from sparsetime.pipeline.synthetic import synth_series
from sparsetime.pipeline.trainer import (
    OptimizerState,
    StopReason,
    TrainConfig,
    adamw_step,
    adamw_update,
    iter_batches,
    mse_loss,
    split_loss,
    train,
)


def _dataset(length=300, window=8, kind="seasonal"):
    return build_split_dataset(synth_series(kind, length, 2, seed=0), window=window, smooth_window=3)


def _zero_grads(params):
    return Gradients(**{name: np.zeros_like(arr) for name, arr in params.tensors().items()})


def test_mse_loss_examples():
    assert mse_loss([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert mse_loss([0.0, 0.0], [1.0, -1.0]) == 1.0
    with pytest.raises(ShapeError, match="mismatch"):
        mse_loss([1.0], [1.0, 2.0])
    with pytest.raises(ShapeError, match="at least one"):
        mse_loss([], [])


def test_adamw_zero_gradient_without_decay_is_fixed_point():
    cfg = TrainConfig(weight_decay=0.0)
    param = np.array([0.5, -2.0])
    updated, _, _ = adamw_update(param, np.zeros(2), np.zeros(2), np.zeros(2), 1, cfg)
    assert np.array_equal(updated, param)


def test_adamw_first_step_moves_by_learning_rate():
    cfg = TrainConfig(weight_decay=0.0)
    updated, m, v = adamw_update(np.array([1.0]), np.array([0.3]), np.zeros(1), np.zeros(1), 1, cfg)
    assert updated[0] == pytest.approx(1.0 - 1e-3, abs=1e-9)
    assert m[0] == pytest.approx(0.03)
    assert v[0] == pytest.approx(0.001 * 0.09)


def test_adamw_zero_gradient_shrinks_by_decoupled_decay():
    cfg = TrainConfig(learning_rate=0.1, weight_decay=0.5)
    param = np.array([2.0, -4.0])
    updated, _, _ = adamw_update(param, np.zeros(2), np.zeros(2), np.zeros(2), 1, cfg)
    np.testing.assert_allclose(updated, param * (1 - 0.1 * 0.5))


def test_adamw_without_momentum_is_sign_descent():
    cfg = TrainConfig(learning_rate=0.01, weight_decay=0.0, beta1=0.0, beta2=0.0, eps=1e-12)
    grad = np.array([3.0, -0.2, 5e-3])
    updated, _, _ = adamw_update(np.zeros(3), grad, np.zeros(3), np.zeros(3), 4, cfg)
    np.testing.assert_allclose(updated, -0.01 * np.sign(grad), rtol=1e-9)


def test_adamw_l2_mode_skips_decoupled_decay():
    cfg = TrainConfig(weight_decay=0.5, decay_mode="l2")
    param = np.array([1.0])
    updated, _, _ = adamw_update(param, np.zeros(1), np.zeros(1), np.zeros(1), 1, cfg)
    assert np.array_equal(updated, param)


def test_adamw_step_rejects_non_finite_gradient():
    params = init_params(2, 3, seed=0)
    grads = dataclasses.replace(_zero_grads(params), w_m=np.full((2, 3), np.nan))
    with pytest.raises(NonFiniteGradientError, match="w_m"):
        adamw_step(params, grads, OptimizerState.zeros_like(params), TrainConfig())


def test_adamw_step_advances_step_counter():
    params = init_params(2, 3, seed=0)
    _, state = adamw_step(params, _zero_grads(params), OptimizerState.zeros_like(params), TrainConfig())
    assert state.t == 1
    assert set(state.m) == set(PARAM_NAMES)


@pytest.mark.parametrize(
    ("kwargs", "match"),
    [
        ({"learning_rate": 0.0}, "learning_rate"),
        ({"weight_decay": -1.0}, "weight_decay"),
        ({"beta1": 1.0}, "beta1"),
        ({"eps": 0.0}, "eps"),
        ({"batch_size": 0}, "batch_size"),
        ({"patience": 0}, "patience"),
        ({"decay_mode": "ridge"}, "decay_mode"),
    ],
)
def test_train_config_rejects_invalid_values(kwargs, match):
    with pytest.raises(ConfigError, match=match):
        TrainConfig(**kwargs)


def test_iter_batches_partitions_all_samples():
    batches = iter_batches(70, 32, np.random.default_rng(0))
    assert [len(b) for b in batches] == [32, 32, 6]
    assert sorted(np.concatenate(batches).tolist()) == list(range(70))


def test_train_is_deterministic_for_a_seed():
    data = _dataset()
    cfg = TrainConfig(max_epochs=3, hidden_dim=4, seed=5)
    params_a, log_a = train(init_params(data.d, 4, 5), data, cfg)
    params_b, log_b = train(init_params(data.d, 4, 5), data, cfg)
    for name in PARAM_NAMES:
        assert np.array_equal(getattr(params_a, name), getattr(params_b, name))
    assert log_a.to_jsonl() == log_b.to_jsonl()


def test_train_returns_best_validation_epoch():
    data = _dataset()
    cfg = TrainConfig(max_epochs=6, hidden_dim=4, learning_rate=0.01, seed=1)
    params, log = train(init_params(data.d, 4, 1), data, cfg)
    val_losses = [record.val_loss for record in log.epochs]
    assert log.best_epoch == int(np.argmin(val_losses)) + 1
    assert log.best_val_loss == min(val_losses)
    assert split_loss(params, data.validation) == pytest.approx(min(val_losses))
    best = log.best_so_far()
    assert all(b <= a for a, b in zip(best, best[1:]))
    for record in log.epochs:
        assert abs(sum(record.alpha) - 1.0) < 1e-12


def test_train_stops_after_patience_epochs_without_improvement(monkeypatch):
    data = _dataset()
    losses = iter([1.0, 2.0, 3.0, 4.0, 5.0])
    monkeypatch.setattr("sparsetime.pipeline.trainer.split_loss", lambda params, samples: next(losses))
    cfg = TrainConfig(max_epochs=5, patience=1, hidden_dim=4, seed=2)
    params, log = train(init_params(data.d, 4, 2), data, cfg)
    assert len(log.epochs) == 2
    assert log.best_epoch == 1
    assert log.stop_reason is StopReason.EARLY_STOP

    monkeypatch.setattr("sparsetime.pipeline.trainer.split_loss", lambda params, samples: 1.0)
    one_epoch, _ = train(init_params(data.d, 4, 2), data, dataclasses.replace(cfg, max_epochs=1))
    for name in PARAM_NAMES:
        assert np.array_equal(getattr(params, name), getattr(one_epoch, name))


def test_train_runs_to_max_epochs_when_improving(monkeypatch):
    data = _dataset()
    losses = iter([3.0, 2.0, 1.0])
    monkeypatch.setattr("sparsetime.pipeline.trainer.split_loss", lambda params, samples: next(losses))
    _, log = train(init_params(data.d, 4, 0), data, TrainConfig(max_epochs=3, hidden_dim=4))
    assert log.best_epoch == 3
    assert log.stop_reason is StopReason.MAX_EPOCHS


def test_train_rejects_empty_split():
    data = _dataset()
    empty = dataclasses.replace(
        data.validation,
        windows=data.validation.windows[:0],
        s=data.validation.s[:0],
        m=data.validation.m[:0],
        g=data.validation.g[:0],
        targets=data.validation.targets[:0],
    )
    with pytest.raises(DataError, match="non-empty"):
        train(init_params(data.d, 4, 0), dataclasses.replace(data, validation=empty), TrainConfig(hidden_dim=4))


def test_train_reduces_training_loss():
    data = _dataset(kind="trend")
    cfg = TrainConfig(max_epochs=15, hidden_dim=8, learning_rate=0.01, seed=3)
    _, log = train(init_params(data.d, 8, 3), data, cfg)
    assert log.epochs[-1].train_loss < log.epochs[0].train_loss


def test_train_l2_mode_runs():
    data = _dataset()
    cfg = TrainConfig(max_epochs=2, hidden_dim=4, decay_mode="l2", weight_decay=1e-3)
    params, log = train(init_params(data.d, 4, 0), data, cfg)
    assert len(log.epochs) == 2
    assert np.all(np.isfinite(params.w_s))


def test_train_log_jsonl_layout():
    data = _dataset()
    _, log = train(init_params(data.d, 4, 0), data, TrainConfig(max_epochs=2, hidden_dim=4))
    lines = log.to_jsonl().splitlines()
    assert len(lines) == 3
    first = json.loads(lines[0])
    assert set(first) == {"epoch", "train_loss", "val_loss", "alpha"}
    assert json.loads(lines[-1]) == {"best_epoch": log.best_epoch, "stop_reason": log.stop_reason.value}


@pytest.mark.slow
def test_noiseless_linear_trend_reaches_small_train_loss():
    data = build_split_dataset(synth_series("trend", 2000, 2, seed=0, noise=0.0), window=24, smooth_window=5)
    cfg = TrainConfig(max_epochs=100, hidden_dim=8, seed=0)
    _, log = train(init_params(data.d, 8, 0), data, cfg)
    assert min(record.train_loss for record in log.epochs) < 1e-3
