"""Network assembly: stacked recurrent layers with a dense or recurrent head.

Two architectures are built from the same parts:

* single-feature: cell(64) -> ReLU -> cell(32) -> ReLU -> dense layer with
  one linear output per forecast step, read off the last hidden state;
* multi-feature: cell(64) -> ReLU -> cell(32) -> ReLU -> an LSTM head whose
  hidden width equals the feature count, emitting the last ``q`` hidden
  states through a sigmoid so every forecast step carries a full feature row.

The inter-layer ReLU and the head sigmoid act on the emitted hidden-state
sequences; the gate equations inside each cell are untouched.  Bidirectional
variants swap the body layers for forward+backward cells whose per-step
outputs concatenate; the head stays unidirectional.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .cells import (
    CELL_KINDS,
    cell_param_layout,
    lstm_step,
    run_bidirectional,
    run_sequence,
)

HEAD_KINDS = ("dense", "recurrent")


class ShapeError(ValueError):
    """Input window does not match the network's expected shape."""


@dataclass(frozen=True)
class NetworkSpec:
    """Static description of one predictor network."""

    cell: str                      # rnn | gru | lstm
    bidirectional: bool
    hidden_sizes: tuple[int, ...]  # body layer widths
    head: str                      # dense | recurrent
    p: int                         # input window length
    q: int                         # output window length
    in_features: int
    out_features: int

    def __post_init__(self):
        if self.cell not in CELL_KINDS:
            raise ValueError(f"unknown cell kind {self.cell!r}")
        if self.head not in HEAD_KINDS:
            raise ValueError(f"unknown head kind {self.head!r}")
        if self.p < 1 or self.q < 1:
            raise ValueError("p and q must be >= 1")
        if not self.hidden_sizes:
            raise ValueError("need at least one body layer")
        object.__setattr__(self, "hidden_sizes", tuple(self.hidden_sizes))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden_sizes"] = list(self.hidden_sizes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkSpec":
        d = dict(d)
        d["hidden_sizes"] = tuple(d["hidden_sizes"])
        return cls(**d)


def sf_spec(cell: str = "lstm", p: int = 3, q: int = 3,
            bidirectional: bool = False,
            hidden_sizes: tuple[int, ...] = (64, 32)) -> NetworkSpec:
    """Single-feature network: play counts in, q play counts out."""
    return NetworkSpec(cell=cell, bidirectional=bidirectional,
                       hidden_sizes=hidden_sizes, head="dense",
                       p=p, q=q, in_features=1, out_features=1)


def mf_spec(cell: str = "lstm", p: int = 3, q: int = 3,
            n_features: int = 3, bidirectional: bool = False,
            hidden_sizes: tuple[int, ...] = (64, 32)) -> NetworkSpec:
    """Multi-feature network: full feature rows in and out."""
    return NetworkSpec(cell=cell, bidirectional=bidirectional,
                       hidden_sizes=hidden_sizes, head="recurrent",
                       p=p, q=q, in_features=n_features,
                       out_features=n_features)


def param_layout(spec: NetworkSpec) -> list[tuple[str, tuple[int, ...]]]:
    """Declared parameter order, used for init and flat serialization."""
    layout: list[tuple[str, tuple[int, ...]]] = []
    in_size = spec.in_features
    for idx, hidden in enumerate(spec.hidden_sizes):
        if spec.bidirectional:
            layout += cell_param_layout(spec.cell, in_size, hidden, f"layer{idx}.fwd")
            layout += cell_param_layout(spec.cell, in_size, hidden, f"layer{idx}.bwd")
            in_size = 2 * hidden
        else:
            layout += cell_param_layout(spec.cell, in_size, hidden, f"layer{idx}")
            in_size = hidden
    if spec.head == "dense":
        layout += [("head.W", (spec.q, in_size)), ("head.b", (spec.q,))]
    else:
        # the recurrent head is always an LSTM cell sized to the feature count
        layout += cell_param_layout("lstm", in_size, spec.out_features, "head")
    return layout


def init_params(spec: NetworkSpec, seed: int) -> dict[str, np.ndarray]:
    """Deterministic Glorot init drawn in declared parameter order."""
    rng = np.random.default_rng(seed)
    params: dict[str, np.ndarray] = {}
    for name, shape in param_layout(spec):
        leaf = name.split(".")[-1]
        if leaf == "b_f":
            params[name] = np.ones(shape)      # forget gate opens at init
        elif leaf.startswith("b"):
            params[name] = np.zeros(shape)
        else:
            fan_out, fan_in = shape
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            params[name] = rng.uniform(-limit, limit, size=shape)
    return params


def params_to_tensors(params: dict[str, np.ndarray]) -> dict[str, Tensor]:
    return {name: Tensor(value) for name, value in params.items()}


def _check_windows(spec: NetworkSpec, windows: np.ndarray) -> np.ndarray:
    windows = np.asarray(windows, dtype=np.float64)
    if windows.ndim != 3 or windows.shape[1] != spec.p or windows.shape[2] != spec.in_features:
        raise ShapeError(
            f"expected windows of shape (batch, {spec.p}, {spec.in_features}), "
            f"got {windows.shape}")
    return windows


def _body_outputs(spec: NetworkSpec, tensors: dict[str, Tensor],
                  xs: list[Tensor]) -> list[Tensor]:
    outs = xs
    for idx, hidden in enumerate(spec.hidden_sizes):
        if spec.bidirectional:
            outs = run_bidirectional(spec.cell, tensors, f"layer{idx}.fwd",
                                     f"layer{idx}.bwd", outs, hidden)
        else:
            outs = run_sequence(spec.cell, tensors, f"layer{idx}", outs, hidden)
        outs = [ad.relu(h) for h in outs]
    return outs


def _dense_head(tensors: dict[str, Tensor], body: list[Tensor]) -> Tensor:
    """(batch, q) linear readout of the last hidden state."""
    return ad.add(ad.matmul(body[-1], ad.transpose(tensors["head.W"])),
                  tensors["head.b"])


def _recurrent_head(spec: NetworkSpec, tensors: dict[str, Tensor],
                    body: list[Tensor]) -> list[Tensor]:
    """Last q sigmoid hidden states of an LSTM decoder over the body sequence.

    When q exceeds the input length the decoder keeps stepping on zero
    inputs, so a single-shot head can cover any horizon.
    """
    batch = body[0].data.shape[0]
    h = Tensor(np.zeros((batch, spec.out_features)))
    c = Tensor(np.zeros((batch, spec.out_features)))
    zero_x = Tensor(np.zeros((batch, body[0].data.shape[1])))
    states: list[Tensor] = []
    for t in range(max(spec.p, spec.q)):
        x = body[t] if t < len(body) else zero_x
        h, c = lstm_step(tensors, "head", h, c, x)
        states.append(h)
    return [ad.sigmoid(s) for s in states[-spec.q:]]


def build_graph(spec: NetworkSpec, tensors: dict[str, Tensor],
                windows: np.ndarray):
    """Forward graph over a (batch, p, F) stack of windows.

    Returns a (batch, q) tensor for dense heads or a q-list of
    (batch, out_features) tensors for recurrent heads.
    """
    windows = _check_windows(spec, windows)
    xs = [Tensor(windows[:, t, :]) for t in range(spec.p)]
    body = _body_outputs(spec, tensors, xs)
    if spec.head == "dense":
        return _dense_head(tensors, body)
    return _recurrent_head(spec, tensors, body)


def forward(spec: NetworkSpec, params: dict[str, np.ndarray],
            windows: np.ndarray) -> np.ndarray:
    """Pure prediction over a window batch: (batch, q, out_features)."""
    out = build_graph(spec, params_to_tensors(params), windows)
    if spec.head == "dense":
        return out.data[:, :, None]
    return np.stack([s.data for s in out], axis=1)


def mse_loss(spec: NetworkSpec, graph_out, targets: np.ndarray) -> Tensor:
    """Scalar mean-squared-error node over a forward graph's output."""
    targets = np.asarray(targets, dtype=np.float64)
    if spec.head == "dense":
        batch = graph_out.data.shape[0]
        count = batch * spec.q * spec.out_features
        diff = ad.sub(graph_out, Tensor(targets[:, :, 0]))
        return ad.scale(ad.sum_all(ad.square(diff)), 1.0 / count)
    batch = graph_out[0].data.shape[0]
    count = batch * spec.q * spec.out_features
    total = None
    for t, step in enumerate(graph_out):
        sq = ad.sum_all(ad.square(ad.sub(step, Tensor(targets[:, t, :]))))
        total = sq if total is None else ad.add(total, sq)
    return ad.scale(total, 1.0 / count)


def loss_and_grads(spec: NetworkSpec, params: dict[str, np.ndarray],
                   windows: np.ndarray, targets: np.ndarray
                   ) -> tuple[float, dict[str, np.ndarray]]:
    """One BPTT pass: MSE loss plus gradients for every parameter.

    Parameters absent from the active graph get exact zero gradients.
    """
    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape[1] != spec.q or targets.shape[2] != spec.out_features:
        raise ShapeError(
            f"expected targets of shape (batch, {spec.q}, {spec.out_features}), "
            f"got {targets.shape}")
    tensors = params_to_tensors(params)
    loss = mse_loss(spec, build_graph(spec, tensors, windows), targets)
    ad.backward(loss)
    grads = {name: (t.grad if t.grad is not None else np.zeros_like(t.data))
             for name, t in tensors.items()}
    return float(loss.data), grads


@dataclass
class NeuralModel:
    """A trained network: immutable parameters plus training provenance."""

    spec: NetworkSpec
    params: dict[str, np.ndarray]
    seed: int
    scaler_state: dict | None = None
    meta: dict = field(default_factory=dict)

    def predict(self, window: np.ndarray) -> np.ndarray:
        """Forecast one window: (p, F) -> (q, out_features)."""
        window = np.asarray(window, dtype=np.float64)
        if window.shape != (self.spec.p, self.spec.in_features):
            raise ShapeError(
                f"expected window of shape ({self.spec.p}, {self.spec.in_features}), "
                f"got {window.shape}")
        return forward(self.spec, self.params, window[None, :, :])[0]


def save_model(model: NeuralModel, path: str | Path) -> tuple[Path, Path]:
    """Write ``<path>.json`` manifest plus ``<path>.bin`` parameter blob.

    The blob is the declared-order concatenation of all parameters as
    little-endian float64.
    """
    path = Path(path)
    manifest_path = path.with_suffix(".json")
    blob_path = path.with_suffix(".bin")
    layout = param_layout(model.spec)
    blob = b"".join(np.ascontiguousarray(model.params[name]).astype("<f8").tobytes()
                    for name, _ in layout)
    manifest = {
        "spec": model.spec.to_dict(),
        "seed": model.seed,
        "scaler": model.scaler_state,
        "meta": model.meta,
        "params": [{"name": name, "shape": list(shape)} for name, shape in layout],
        "dtype": "<f8",
    }
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                             encoding="utf-8")
    blob_path.write_bytes(blob)
    return manifest_path, blob_path


def load_model(path: str | Path) -> NeuralModel:
    path = Path(path)
    manifest = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
    spec = NetworkSpec.from_dict(manifest["spec"])
    raw = np.frombuffer(path.with_suffix(".bin").read_bytes(), dtype="<f8")
    params: dict[str, np.ndarray] = {}
    offset = 0
    for entry in manifest["params"]:
        shape = tuple(entry["shape"])
        size = int(np.prod(shape)) if shape else 1
        params[entry["name"]] = raw[offset:offset + size].reshape(shape).astype(np.float64)
        offset += size
    if offset != raw.size:
        raise ValueError(f"parameter blob has {raw.size} values, expected {offset}")
    return NeuralModel(spec=spec, params=params, seed=manifest["seed"],
                       scaler_state=manifest.get("scaler"), meta=manifest.get("meta", {}))
