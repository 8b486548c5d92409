"""From-scratch recurrent networks: tape autodiff, RNN/GRU/LSTM cells,
bidirectional layers, dense and recurrent heads, Adam training with BPTT."""

from .network import (
    NetworkSpec,
    NeuralModel,
    ShapeError,
    forward,
    init_params,
    load_model,
    loss_and_grads,
    mf_spec,
    param_layout,
    save_model,
    sf_spec,
)
from .optim import Adam, clip_global_norm
from .training import TrainConfig, TrainingError, train

__all__ = [
    "NetworkSpec",
    "NeuralModel",
    "ShapeError",
    "forward",
    "init_params",
    "load_model",
    "loss_and_grads",
    "mf_spec",
    "param_layout",
    "save_model",
    "sf_spec",
    "Adam",
    "clip_global_norm",
    "TrainConfig",
    "TrainingError",
    "train",
]
