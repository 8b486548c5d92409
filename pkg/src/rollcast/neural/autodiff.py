"""Minimal reverse-mode automatic differentiation over float64 numpy arrays.

Just enough machinery for small recurrent networks unrolled over short
windows: every operation records its parents and a backward closure on a
tape, and ``backward`` replays the tape in reverse topological order.
All arithmetic stays in 64-bit so finite-difference gradient checks at
h=1e-5 are meaningful.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Tensor",
    "add",
    "sub",
    "mul",
    "matmul",
    "sigmoid",
    "tanh",
    "relu",
    "concat_cols",
    "transpose",
    "square",
    "sum_all",
    "scale",
    "backward",
]


class Tensor:
    """A node in the computation graph wrapping a float64 ndarray."""

    __slots__ = ("data", "grad", "_parents", "_backward")

    def __init__(self, data, parents=(), backward_fn=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self._parents = parents
        self._backward = backward_fn

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.data.shape})"


def _accumulate(t: Tensor, g: np.ndarray) -> None:
    # first write copies so later in-place += never aliases another buffer
    if t.grad is None:
        t.grad = np.array(g, dtype=np.float64)
    else:
        t.grad += g


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a gradient down to `shape`, undoing numpy broadcasting."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, s in enumerate(shape):
        if s == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def add(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data + b.data, parents=(a, b))

    def bwd():
        _accumulate(a, _unbroadcast(out.grad, a.data.shape))
        _accumulate(b, _unbroadcast(out.grad, b.data.shape))

    out._backward = bwd
    return out


def sub(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data - b.data, parents=(a, b))

    def bwd():
        _accumulate(a, _unbroadcast(out.grad, a.data.shape))
        _accumulate(b, _unbroadcast(-out.grad, b.data.shape))

    out._backward = bwd
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data * b.data, parents=(a, b))

    def bwd():
        _accumulate(a, _unbroadcast(out.grad * b.data, a.data.shape))
        _accumulate(b, _unbroadcast(out.grad * a.data, b.data.shape))

    out._backward = bwd
    return out


def matmul(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data @ b.data, parents=(a, b))

    def bwd():
        _accumulate(a, out.grad @ b.data.T)
        _accumulate(b, a.data.T @ out.grad)

    out._backward = bwd
    return out


def sigmoid(a: Tensor) -> Tensor:
    # split by sign so exp never overflows
    x = a.data
    s = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))),
                 np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
    out = Tensor(s, parents=(a,))

    def bwd():
        _accumulate(a, out.grad * s * (1.0 - s))

    out._backward = bwd
    return out


def tanh(a: Tensor) -> Tensor:
    t = np.tanh(a.data)
    out = Tensor(t, parents=(a,))

    def bwd():
        _accumulate(a, out.grad * (1.0 - t * t))

    out._backward = bwd
    return out


def relu(a: Tensor) -> Tensor:
    out = Tensor(np.maximum(a.data, 0.0), parents=(a,))

    def bwd():
        _accumulate(a, out.grad * (a.data > 0.0))

    out._backward = bwd
    return out


def concat_cols(parts: list[Tensor]) -> Tensor:
    """Concatenate 2-D tensors along axis 1."""
    out = Tensor(np.concatenate([p.data for p in parts], axis=1), parents=tuple(parts))
    widths = [p.data.shape[1] for p in parts]

    def bwd():
        start = 0
        for p, w in zip(parts, widths):
            _accumulate(p, out.grad[:, start:start + w])
            start += w

    out._backward = bwd
    return out


def transpose(a: Tensor) -> Tensor:
    out = Tensor(a.data.T, parents=(a,))

    def bwd():
        _accumulate(a, out.grad.T)

    out._backward = bwd
    return out


def square(a: Tensor) -> Tensor:
    out = Tensor(a.data * a.data, parents=(a,))

    def bwd():
        _accumulate(a, out.grad * 2.0 * a.data)

    out._backward = bwd
    return out


def sum_all(a: Tensor) -> Tensor:
    out = Tensor(a.data.sum(), parents=(a,))

    def bwd():
        _accumulate(a, np.full(a.data.shape, out.grad))

    out._backward = bwd
    return out


def scale(a: Tensor, k: float) -> Tensor:
    out = Tensor(a.data * k, parents=(a,))

    def bwd():
        _accumulate(a, out.grad * k)

    out._backward = bwd
    return out


def backward(root: Tensor) -> None:
    """Run reverse-mode accumulation from a scalar root.

    Iterative topological sort; unrolled recurrent graphs easily exceed
    the interpreter recursion limit.
    """
    if root.data.ndim != 0:
        raise ValueError("backward expects a scalar root")
    order: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in visited:
                stack.append((parent, False))
    root.grad = np.ones((), dtype=np.float64)
    for node in reversed(order):
        if node._backward is not None:
            node._backward()
