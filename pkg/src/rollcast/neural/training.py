"""Full-batch training loop with Adam, gradient clipping and dev-set
early stopping.

Per-artist window sets are small (around a hundred pairs), so every epoch
runs the whole batch; that removes shuffling as a source of nondeterminism
and makes two runs with the same seed bit-identical.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from .network import NetworkSpec, NeuralModel, forward, init_params, loss_and_grads
from .optim import Adam, clip_global_norm


class TrainingError(RuntimeError):
    """Training could not produce a usable model."""


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    betas: tuple[float, float] = (0.9, 0.999)
    adam_epsilon: float = 1e-8
    max_epochs: int = 300
    patience: int = 20
    clip_norm: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.adam_epsilon <= 0:
            raise ValueError("rates must be positive")
        if self.patience > self.max_epochs:
            raise ValueError("patience cannot exceed max_epochs")


def _mse(spec: NetworkSpec, params, windows, targets) -> float:
    pred = forward(spec, params, windows)
    return float(np.mean((pred - targets) ** 2))


def train(spec: NetworkSpec, train_inputs: np.ndarray, train_targets: np.ndarray,
          dev_inputs: np.ndarray | None, dev_targets: np.ndarray | None,
          cfg: TrainConfig) -> NeuralModel:
    """Train a network and return the parameters from the best dev epoch.

    With no dev windows the early-stopping criterion falls back to the
    training loss.  Raises TrainingError on an empty train set or a
    non-finite loss.
    """
    train_inputs = np.asarray(train_inputs, dtype=np.float64)
    train_targets = np.asarray(train_targets, dtype=np.float64)
    if train_inputs.shape[0] == 0:
        raise TrainingError("empty training set")
    use_dev = dev_inputs is not None and len(dev_inputs) > 0

    params = init_params(spec, cfg.seed)
    names = list(params)
    opt = Adam([params[n].shape for n in names], lr=cfg.learning_rate,
               betas=cfg.betas, eps=cfg.adam_epsilon)

    def monitor() -> float:
        if use_dev:
            return _mse(spec, params, dev_inputs, dev_targets)
        return _mse(spec, params, train_inputs, train_targets)

    initial_train_mse = _mse(spec, params, train_inputs, train_targets)
    best_metric = monitor()
    best_params = copy.deepcopy(params)
    best_epoch = 0
    stale = 0
    epochs_run = 0
    final_train_mse = initial_train_mse

    for epoch in range(1, cfg.max_epochs + 1):
        loss, grads = loss_and_grads(spec, params, train_inputs, train_targets)
        if not np.isfinite(loss):
            raise TrainingError(f"non-finite training loss at epoch {epoch}")
        grad_list = [grads[n] for n in names]
        clip_global_norm(grad_list, cfg.clip_norm)
        opt.step([params[n] for n in names], grad_list)
        epochs_run = epoch

        metric = monitor()
        if not np.isfinite(metric):
            raise TrainingError(f"non-finite validation loss at epoch {epoch}")
        if metric < best_metric:
            best_metric = metric
            best_params = copy.deepcopy(params)
            best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break

    final_train_mse = _mse(spec, best_params, train_inputs, train_targets)
    meta = {
        "best_epoch": best_epoch,
        "epochs_run": epochs_run,
        "initial_train_mse": initial_train_mse,
        "final_train_mse": final_train_mse,
        "best_monitor_mse": best_metric,
        "monitor": "dev" if use_dev else "train",
    }
    return NeuralModel(spec=spec, params=best_params, seed=cfg.seed, meta=meta)
