"""Recurrent cell steps (vanilla RNN, GRU, LSTM) built on the autodiff tape.

Each gate owns one weight matrix over the concatenated ``[h_{t-1}, x_t]``
vector of shape (hidden, hidden + input) plus a bias vector, so the left
block acts on the recurrent state and the right block on the input.
"""

from __future__ import annotations

import numpy as np

from .autodiff import Tensor, add, concat_cols, matmul, mul, sigmoid, sub, tanh, transpose

# parameter name suffixes in declared (serialization) order
GATE_NAMES = {
    "lstm": ("f", "i", "c", "o"),
    "gru": ("z", "r", "h"),
    "rnn": ("w",),
}

CELL_KINDS = tuple(GATE_NAMES)


def cell_param_layout(kind: str, input_size: int, hidden_size: int, prefix: str):
    """Ordered (name, shape) pairs for one cell: all weights, then all biases."""
    if kind not in GATE_NAMES:
        raise ValueError(f"unknown cell kind {kind!r}")
    gates = GATE_NAMES[kind]
    layout = [(f"{prefix}.W_{g}", (hidden_size, hidden_size + input_size)) for g in gates]
    layout += [(f"{prefix}.b_{g}", (hidden_size,)) for g in gates]
    return layout


def _gate(params, prefix, g, hx):
    # weights are stored (hidden, hidden+input); the batched step multiplies
    # (batch, hidden+input) @ (hidden+input, hidden)
    w = params[f"{prefix}.W_{g}"]
    b = params[f"{prefix}.b_{g}"]
    return add(matmul(hx, transpose(w)), b)


def lstm_step(params: dict[str, Tensor], prefix: str, h: Tensor, c: Tensor,
              x: Tensor) -> tuple[Tensor, Tensor]:
    """One LSTM step: forget/input/candidate/output gating over [h, x]."""
    hx = concat_cols([h, x])
    f = sigmoid(_gate(params, prefix, "f", hx))
    i = sigmoid(_gate(params, prefix, "i", hx))
    c_tilde = tanh(_gate(params, prefix, "c", hx))
    c_new = add(mul(f, c), mul(i, c_tilde))
    o = sigmoid(_gate(params, prefix, "o", hx))
    h_new = mul(o, tanh(c_new))
    return h_new, c_new


def gru_step(params: dict[str, Tensor], prefix: str, h: Tensor, x: Tensor) -> Tensor:
    """One GRU step; a saturated update gate copies the previous state."""
    hx = concat_cols([h, x])
    z = sigmoid(_gate(params, prefix, "z", hx))
    r = sigmoid(_gate(params, prefix, "r", hx))
    rhx = concat_cols([mul(r, h), x])
    h_tilde = tanh(_gate(params, prefix, "h", rhx))
    one = Tensor(np.ones_like(z.data))
    return add(mul(z, h), mul(sub(one, z), h_tilde))


def rnn_step(params: dict[str, Tensor], prefix: str, h: Tensor, x: Tensor) -> Tensor:
    hx = concat_cols([h, x])
    return tanh(_gate(params, prefix, "w", hx))


def run_sequence(kind: str, params: dict[str, Tensor], prefix: str,
                 xs: list[Tensor], hidden_size: int, reverse: bool = False) -> list[Tensor]:
    """Unroll a cell over a step list; returns per-step hidden states in input order.

    The initial hidden (and LSTM memory) state is zeros.
    """
    batch = xs[0].data.shape[0]
    h = Tensor(np.zeros((batch, hidden_size)))
    c = Tensor(np.zeros((batch, hidden_size)))
    steps = list(reversed(xs)) if reverse else xs
    outs: list[Tensor] = []
    for x in steps:
        if kind == "lstm":
            h, c = lstm_step(params, prefix, h, c, x)
        elif kind == "gru":
            h = gru_step(params, prefix, h, x)
        elif kind == "rnn":
            h = rnn_step(params, prefix, h, x)
        else:
            raise ValueError(f"unknown cell kind {kind!r}")
        outs.append(h)
    if reverse:
        outs.reverse()
    return outs


def run_bidirectional(kind: str, params: dict[str, Tensor], fwd_prefix: str,
                      bwd_prefix: str, xs: list[Tensor],
                      hidden_size: int) -> list[Tensor]:
    """Forward and backward passes whose per-step outputs concatenate."""
    fwd = run_sequence(kind, params, fwd_prefix, xs, hidden_size)
    bwd = run_sequence(kind, params, bwd_prefix, xs, hidden_size, reverse=True)
    return [concat_cols([f, b]) for f, b in zip(fwd, bwd)]
