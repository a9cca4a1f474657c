"""Tape-based reverse-mode automatic differentiation over float64 arrays.

Operations record themselves on the tape that is active in the current
thread (see :class:`Tape`).  Outside a tape nothing is recorded, which is
how inference runs.  ``backward`` walks the tape in reverse creation order.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

MASK_FILL = -1e9
IGNORE_INDEX = -100


class ShapeError(ValueError):
    pass


class TapeError(RuntimeError):
    pass


class Tensor:
    """Dense float64 array with an optional gradient and tape node."""

    __slots__ = ("data", "requires_grad", "grad", "node", "name")

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.node: Optional[int] = None
        self.name = name

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def zero_grad(self) -> None:
        self.grad = None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"

    # operator sugar
    def __add__(self, other):
        return add(self, _wrap(other))

    def __radd__(self, other):
        return add(_wrap(other), self)

    def __sub__(self, other):
        return sub(self, _wrap(other))

    def __rsub__(self, other):
        return sub(_wrap(other), self)

    def __mul__(self, other):
        return mul(self, _wrap(other))

    def __rmul__(self, other):
        return mul(_wrap(other), self)

    def __matmul__(self, other):
        return matmul(self, other)


def _wrap(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def zeros_like(x: Tensor) -> Tensor:
    return Tensor(np.zeros_like(x.data))


@dataclass
class Node:
    op: str
    inputs: tuple
    output: Tensor
    backward: Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


@dataclass
class Tape:
    """Ordered record of operations; creation order is a topological order.

    Use as a context manager to make it the active tape of this thread::

        with Tape():
            loss = ...
            backward(loss)
    """

    nodes: list = field(default_factory=list)

    def __enter__(self) -> "Tape":
        _state.stack.append(self)
        return self

    def __exit__(self, *exc) -> None:
        _state.stack.pop()

    def __len__(self) -> int:
        return len(self.nodes)

    def record(self, op, inputs, output, backward_fn) -> None:
        output.node = len(self.nodes)
        output.requires_grad = True
        self.nodes.append(Node(op, tuple(inputs), output, backward_fn))


class _TapeState(threading.local):
    def __init__(self):
        self.stack: list = []


_state = _TapeState()


def active_tape() -> Optional[Tape]:
    return _state.stack[-1] if _state.stack else None


def _record(op: str, inputs: Sequence[Tensor], out_data: np.ndarray, backward_fn) -> Tensor:
    out = Tensor(out_data)
    tape = active_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        tape.record(op, inputs, out, backward_fn)
    return out


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/d(leaf) into ``.grad`` of every leaf that requires grad.

    Gradients accumulate across calls until the caller zeroes them.
    """
    if loss.data.size != 1 or loss.ndim > 1:
        raise TapeError(f"backward needs a scalar loss, got shape {loss.shape}")
    tape = active_tape()
    if tape is None or loss.node is None or loss.node >= len(tape.nodes) or tape.nodes[loss.node].output is not loss:
        raise TapeError("loss tensor is not on the active tape")

    grads: dict[int, np.ndarray] = {loss.node: np.ones_like(loss.data)}
    for idx in range(loss.node, -1, -1):
        g = grads.pop(idx, None)
        if g is None:
            continue
        node = tape.nodes[idx]
        for inp, gi in zip(node.inputs, node.backward(g)):
            if gi is None or not inp.requires_grad:
                continue
            if inp.node is not None and inp.node < idx and tape.nodes[inp.node].output is inp:
                prev = grads.get(inp.node)
                grads[inp.node] = gi if prev is None else prev + gi
            else:
                inp.grad = gi.copy() if inp.grad is None else inp.grad + gi


# ---------------------------------------------------------------------------
# elementwise


def _broadcast_shape(a: Tensor, b: Tensor) -> tuple:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"cannot broadcast shapes {a.shape} and {b.shape}") from None


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def elementwise(op_kind: str, a: Tensor, b: Optional[Tensor] = None) -> Tensor:
    if op_kind in ("sigmoid", "tanh", "relu"):
        if b is not None:
            raise TypeError(f"{op_kind} is unary but got two arguments")
        return {"sigmoid": sigmoid, "tanh": tanh, "relu": relu}[op_kind](a)
    if op_kind not in ("add", "sub", "mul"):
        raise ValueError(f"unknown elementwise op {op_kind!r}")
    if b is None:
        raise TypeError(f"{op_kind} needs two arguments")
    return {"add": add, "sub": sub, "mul": mul}[op_kind](a, b)


def add(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_shape(a, b)
    sa, sb = a.shape, b.shape
    return _record("add", (a, b), a.data + b.data,
                   lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))


def sub(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_shape(a, b)
    sa, sb = a.shape, b.shape
    return _record("sub", (a, b), a.data - b.data,
                   lambda g: (_unbroadcast(g, sa), _unbroadcast(-g, sb)))


def mul(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_shape(a, b)
    ad, bd = a.data, b.data
    return _record("mul", (a, b), ad * bd,
                   lambda g: (_unbroadcast(g * bd, ad.shape), _unbroadcast(g * ad, bd.shape)))


def sigmoid(a: Tensor) -> Tensor:
    # tanh form avoids overflow in exp for large |x|
    y = 0.5 * (np.tanh(0.5 * a.data) + 1.0)
    return _record("sigmoid", (a,), y, lambda g: (g * y * (1.0 - y),))


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.data)
    return _record("tanh", (a,), y, lambda g: (g * (1.0 - y * y),))


def relu(a: Tensor) -> Tensor:
    on = a.data > 0
    return _record("relu", (a,), np.where(on, a.data, 0.0), lambda g: (g * on,))


def scale(a: Tensor, c: float) -> Tensor:
    return _record("scale", (a,), a.data * c, lambda g: (g * c,))


# ---------------------------------------------------------------------------
# linear algebra and reductions


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError(f"matmul needs at least 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul inner dimensions differ: {a.shape} @ {b.shape}")
    try:
        np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
    except ValueError:
        raise ShapeError(f"matmul batch dimensions differ: {a.shape} @ {b.shape}") from None
    ad, bd = a.data, b.data

    def grad_fn(g):
        ga = g @ np.swapaxes(bd, -1, -2)
        gb = np.swapaxes(ad, -1, -2) @ g
        return _unbroadcast(ga, ad.shape), _unbroadcast(gb, bd.shape)

    return _record("matmul", (a, b), ad @ bd, grad_fn)


def sum_all(a: Tensor) -> Tensor:
    shape = a.shape
    return _record("sum", (a,), np.asarray(a.data.sum()), lambda g: (np.broadcast_to(g, shape).copy(),))


def mean_all(a: Tensor) -> Tensor:
    n = a.data.size
    shape = a.shape
    return _record("mean", (a,), np.asarray(a.data.mean()),
                   lambda g: (np.broadcast_to(g / n, shape).copy(),))


# ---------------------------------------------------------------------------
# shape manipulation


def reshape(a: Tensor, shape: tuple) -> Tensor:
    old = a.shape
    return _record("reshape", (a,), a.data.reshape(shape), lambda g: (g.reshape(old),))


def transpose(a: Tensor, axes: tuple) -> Tensor:
    inv = tuple(np.argsort(axes))
    return _record("transpose", (a,), np.transpose(a.data, axes), lambda g: (np.transpose(g, inv),))


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    data = [t.data for t in tensors]
    axis = axis % data[0].ndim
    splits = np.cumsum([d.shape[axis] for d in data])[:-1]
    return _record("concat", tensors, np.concatenate(data, axis=axis),
                   lambda g: tuple(np.split(g, splits, axis=axis)))


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    out = np.stack([t.data for t in tensors], axis=axis)
    axis = axis % out.ndim

    def grad_fn(g):
        return tuple(np.take(g, i, axis=axis) for i in range(len(tensors)))

    return _record("stack", tensors, out, grad_fn)


def select(a: Tensor, index: int, axis: int) -> Tensor:
    """``a`` indexed at ``index`` along ``axis`` (that axis is dropped)."""
    shape = a.shape
    axis = axis % a.ndim

    def grad_fn(g):
        full = np.zeros(shape)
        sl = [slice(None)] * len(shape)
        sl[axis] = index
        full[tuple(sl)] = g
        return (full,)

    return _record("select", (a,), np.take(a.data, index, axis=axis), grad_fn)


# ---------------------------------------------------------------------------
# neural-network primitives


def _check_axis(x: Tensor, axis: int) -> int:
    if not -x.ndim <= axis < x.ndim:
        raise ShapeError(f"axis {axis} out of range for shape {x.shape}")
    return axis % x.ndim


def softmax(x: Tensor, axis: int = -1, mask: Optional[np.ndarray] = None) -> Tensor:
    """Softmax along ``axis``.

    ``mask`` (boolean, broadcastable to ``x``) marks allowed entries.  Blocked
    entries get an additive -1e9 before normalising and are then set to
    exactly zero, so their weight and gradient are exactly zero.
    """
    axis = _check_axis(x, axis)
    z = x.data
    if mask is not None:
        mask = np.broadcast_to(mask, z.shape)
        z = np.where(mask, z, z + MASK_FILL)
    e = np.exp(z - z.max(axis=axis, keepdims=True))
    y = e / e.sum(axis=axis, keepdims=True)
    if mask is not None:
        y = np.where(mask, y, 0.0)

    def grad_fn(g):
        return (y * (g - (g * y).sum(axis=axis, keepdims=True)),)

    return _record("softmax", (x,), y, grad_fn)


def log_softmax_array(z: np.ndarray, axis: int = -1) -> np.ndarray:
    m = z.max(axis=axis, keepdims=True)
    return z - m - np.log(np.exp(z - m).sum(axis=axis, keepdims=True))


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    d = x.shape[-1]
    if gain.shape != (d,) or bias.shape != (d,):
        raise ShapeError(f"layer_norm gain {gain.shape} / bias {bias.shape} do not match last dim of {x.shape}")
    mu = x.data.mean(axis=-1, keepdims=True)
    xc = x.data - mu
    inv = 1.0 / np.sqrt((xc * xc).mean(axis=-1, keepdims=True) + eps)
    xhat = xc * inv
    gd = gain.data
    lead = x.shape[:-1]

    def grad_fn(g):
        gx_hat = g * gd
        gx = inv * (gx_hat - gx_hat.mean(axis=-1, keepdims=True)
                    - xhat * (gx_hat * xhat).mean(axis=-1, keepdims=True))
        flat = tuple(range(len(lead)))
        return gx, (g * xhat).sum(axis=flat), g.sum(axis=flat)

    return _record("layer_norm", (x, gain, bias), xhat * gd + bias.data, grad_fn)


def embedding_lookup(table: Tensor, ids) -> Tensor:
    ids = np.asarray(ids)
    if not np.issubdtype(ids.dtype, np.integer):
        raise TypeError(f"ids must be integers, got dtype {ids.dtype}")
    vocab = table.shape[0]
    bad = np.argwhere((ids < 0) | (ids >= vocab))
    if bad.size:
        pos = tuple(int(i) for i in bad[0])
        raise IndexError(f"id {int(ids[pos])} at position {pos} outside table of size {vocab}")
    tshape = table.shape

    def grad_fn(g):
        gt = np.zeros(tshape)
        np.add.at(gt, ids, g)
        return (gt,)

    return _record("embedding", (table,), table.data[ids], grad_fn)


def cross_entropy_masked(logits: Tensor, labels) -> Tensor:
    """Mean token NLL over positions whose label is not -100.

    All-ignored input gives loss 0 with zero gradient.
    """
    labels = np.asarray(labels)
    if logits.data.size == 0:
        raise ValueError("cross_entropy_masked got empty logits")
    if logits.shape[:-1] != labels.shape:
        raise ShapeError(f"logits {logits.shape} do not match labels {labels.shape}")
    vocab = logits.shape[-1]
    valid = labels != IGNORE_INDEX
    if np.any(labels[valid] >= vocab) or np.any(labels[valid] < 0):
        raise IndexError(f"label outside [0, {vocab})")
    count = int(valid.sum())
    logp = log_softmax_array(logits.data)
    safe = np.where(valid, labels, 0)
    picked = np.take_along_axis(logp, safe[..., None], axis=-1)[..., 0]
    loss = -(picked * valid).sum() / count if count else 0.0

    def grad_fn(g):
        if not count:
            return (np.zeros_like(logp),)
        p = np.exp(logp)
        np.put_along_axis(p, safe[..., None], np.take_along_axis(p, safe[..., None], axis=-1) - 1.0, axis=-1)
        return (p * (valid[..., None] * (g / count)),)

    return _record("cross_entropy", (logits,), np.asarray(loss), grad_fn)
