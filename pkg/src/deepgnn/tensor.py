"""Reverse-mode autodiff over 2-D float64 numpy arrays.

A `GradTape` records one op per node: output id, parent ids, and a closure
that maps the output gradient to parent gradients.  `backward` replays the
record once in reverse.  Everything is a matrix; scalars are 1x1.  Ops are
recorded only when at least one input lives on a tape, so inference-mode
forward passes cost no bookkeeping.

Broadcasting is supported for elementwise add/sub/mul between shapes that
numpy can broadcast in 2-D (row vectors, column vectors, 1x1); gradients are
summed back over the broadcast axes.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericDomainError, ShapeError, TapeError


class GradTape:
    """Ordered op record with per-node gradient accumulators."""

    def __init__(self):
        self._ops = []  # (out_id, parent_ids, backward_fn)
        self._n_nodes = 0
        self._grads = None
        self._consumed = False

    def _new_node(self) -> int:
        nid = self._n_nodes
        self._n_nodes += 1
        return nid

    def leaf(self, data) -> "Tensor":
        """Register `data` as a differentiable leaf (a parameter)."""
        t = Tensor(data)
        t.tape = self
        t.node = self._new_node()
        return t

    def _record(self, out_data, parents, backward_fn) -> "Tensor":
        out = Tensor(out_data)
        out.tape = self
        out.node = self._new_node()
        self._ops.append((out.node, parents, backward_fn))
        return out

    def grad_of(self, t: "Tensor"):
        if self._grads is None:
            raise TapeError("backward has not run on this tape")
        return self._grads.get(t.node)


class Tensor:
    """2-D float64 array, optionally bound to a tape node."""

    __slots__ = ("data", "tape", "node")

    def __init__(self, data):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim != 2:
            raise ShapeError(f"tensors are 2-D, got shape {arr.shape}")
        self.data = arr
        self.tape = None
        self.node = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def requires_grad(self) -> bool:
        return self.node is not None

    @property
    def grad(self):
        """Gradient array after backward, None if this node was unreached."""
        if self.tape is None:
            return None
        return self.tape.grad_of(self)

    def __repr__(self):
        tag = f" node={self.node}" if self.node is not None else ""
        return f"Tensor(shape={self.data.shape}{tag})"

    def __matmul__(self, other):
        return matmul(self, other)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        if isinstance(other, Tensor):
            return mul(self, other)
        return scale(self, float(other))

    def __rmul__(self, other):
        return scale(self, float(other))

    def __neg__(self):
        return scale(self, -1.0)


def _tape_of(*tensors):
    tape = None
    for t in tensors:
        if t.tape is None:
            continue
        if tape is None:
            tape = t.tape
        elif tape is not t.tape:
            raise TapeError("operands come from different tapes")
    return tape


def _unbroadcast(grad, shape):
    # sum the gradient back over axes that were broadcast on the forward pass
    for ax in (0, 1):
        if shape[ax] == 1 and grad.shape[ax] != 1:
            grad = grad.sum(axis=ax, keepdims=True)
    return grad


def _check_broadcast(a, b, opname):
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{opname}: shapes {a.shape} and {b.shape} do not broadcast") from None


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: inner dims differ, {a.shape} @ {b.shape}")
    out = a.data @ b.data
    tape = _tape_of(a, b)
    if tape is None:
        return Tensor(out)
    ad, bd = a.data, b.data

    def bwd(g):
        return g @ bd.T, ad.T @ g

    return tape._record(out, (a.node, b.node), bwd)


def add(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast(a, b, "add")
    tape = _tape_of(a, b)
    out = a.data + b.data
    if tape is None:
        return Tensor(out)
    ash, bsh = a.shape, b.shape

    def bwd(g):
        return _unbroadcast(g, ash), _unbroadcast(g, bsh)

    return tape._record(out, (a.node, b.node), bwd)


def sub(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast(a, b, "sub")
    tape = _tape_of(a, b)
    out = a.data - b.data
    if tape is None:
        return Tensor(out)
    ash, bsh = a.shape, b.shape

    def bwd(g):
        return _unbroadcast(g, ash), _unbroadcast(-g, bsh)

    return tape._record(out, (a.node, b.node), bwd)


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise (broadcasting) product."""
    _check_broadcast(a, b, "mul")
    tape = _tape_of(a, b)
    out = a.data * b.data
    if tape is None:
        return Tensor(out)
    ad, bd, ash, bsh = a.data, b.data, a.shape, b.shape

    def bwd(g):
        return _unbroadcast(g * bd, ash), _unbroadcast(g * ad, bsh)

    return tape._record(out, (a.node, b.node), bwd)


def scale(x: Tensor, c: float) -> Tensor:
    tape = _tape_of(x)
    out = x.data * c
    if tape is None:
        return Tensor(out)
    return tape._record(out, (x.node,), lambda g: (g * c,))


def shift(x: Tensor, c: float) -> Tensor:
    """x + scalar constant."""
    tape = _tape_of(x)
    out = x.data + c
    if tape is None:
        return Tensor(out)
    return tape._record(out, (x.node,), lambda g: (g,))


def relu(x: Tensor) -> Tensor:
    """max(x, 0); the subgradient at 0 is taken as 0."""
    tape = _tape_of(x)
    out = np.maximum(x.data, 0.0)
    if tape is None:
        return Tensor(out)
    mask = x.data > 0.0
    return tape._record(out, (x.node,), lambda g: (g * mask,))


def exp(x: Tensor) -> Tensor:
    tape = _tape_of(x)
    out = np.exp(x.data)
    if tape is None:
        return Tensor(out)
    return tape._record(out, (x.node,), lambda g: (g * out,))


def log(x: Tensor) -> Tensor:
    if np.any(x.data <= 0.0):
        raise NumericDomainError("log: input has entries <= 0")
    tape = _tape_of(x)
    out = np.log(x.data)
    if tape is None:
        return Tensor(out)
    xd = x.data
    return tape._record(out, (x.node,), lambda g: (g / xd,))


def sigmoid(x: Tensor) -> Tensor:
    tape = _tape_of(x)
    xd = x.data
    out = np.empty_like(xd)
    pos = xd >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-xd[pos]))
    ex = np.exp(xd[~pos])
    out[~pos] = ex / (1.0 + ex)
    if tape is None:
        return Tensor(out)
    return tape._record(out, (x.node,), lambda g: (g * out * (1.0 - out),))


def pow_const(x: Tensor, p: float) -> Tensor:
    """x ** p with a constant exponent."""
    xd = x.data
    if p != int(p) and np.any(xd < 0.0):
        raise NumericDomainError(f"pow: fractional exponent {p} on negative entries")
    if p < 0 and np.any(xd == 0.0):
        raise NumericDomainError(f"pow: exponent {p} on zero entries")
    tape = _tape_of(x)
    out = xd ** p
    if tape is None:
        return Tensor(out)

    def bwd(g):
        return (g * p * xd ** (p - 1.0),)

    return tape._record(out, (x.node,), bwd)


def row_sum(x: Tensor) -> Tensor:
    tape = _tape_of(x)
    out = x.data.sum(axis=1, keepdims=True)
    if tape is None:
        return Tensor(out)
    sh = x.shape
    return tape._record(out, (x.node,), lambda g: (np.broadcast_to(g, sh),))


def col_sum(x: Tensor) -> Tensor:
    tape = _tape_of(x)
    out = x.data.sum(axis=0, keepdims=True)
    if tape is None:
        return Tensor(out)
    sh = x.shape
    return tape._record(out, (x.node,), lambda g: (np.broadcast_to(g, sh),))


def row_mean(x: Tensor) -> Tensor:
    return scale(row_sum(x), 1.0 / x.shape[1])


def col_mean(x: Tensor) -> Tensor:
    return scale(col_sum(x), 1.0 / x.shape[0])


def sum_all(x: Tensor) -> Tensor:
    tape = _tape_of(x)
    out = np.array([[x.data.sum()]])
    if tape is None:
        return Tensor(out)
    sh = x.shape
    return tape._record(out, (x.node,), lambda g: (np.broadcast_to(g, sh),))


def row_max(x: Tensor) -> Tensor:
    """Per-row maximum; the gradient routes to the first argmax of each row."""
    tape = _tape_of(x)
    out = x.data.max(axis=1, keepdims=True)
    if tape is None:
        return Tensor(out)
    idx = x.data.argmax(axis=1)
    sh = x.shape

    def bwd(g):
        ga = np.zeros(sh)
        ga[np.arange(sh[0]), idx] = g[:, 0]
        return (ga,)

    return tape._record(out, (x.node,), bwd)


def maximum(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise max of two same-shape tensors; ties route the gradient to a."""
    if a.shape != b.shape:
        raise ShapeError(f"maximum: shapes differ, {a.shape} vs {b.shape}")
    tape = _tape_of(a, b)
    out = np.maximum(a.data, b.data)
    if tape is None:
        return Tensor(out)
    mask = a.data >= b.data

    def bwd(g):
        return g * mask, g * ~mask

    return tape._record(out, (a.node, b.node), bwd)


def take_rows(x: Tensor, idx) -> Tensor:
    idx = np.asarray(idx, dtype=np.int64)
    if idx.ndim != 1:
        raise ShapeError(f"take_rows: index must be 1-D, got shape {idx.shape}")
    if idx.size and (idx.min() < 0 or idx.max() >= x.shape[0]):
        raise ShapeError(f"take_rows: index out of range for {x.shape[0]} rows")
    tape = _tape_of(x)
    out = x.data[idx]
    if tape is None:
        return Tensor(out)
    sh = x.shape

    def bwd(g):
        ga = np.zeros(sh)
        np.add.at(ga, idx, g)
        return (ga,)

    return tape._record(out, (x.node,), bwd)


def concat_cols(tensors) -> Tensor:
    tensors = list(tensors)
    rows = tensors[0].shape[0]
    for t in tensors:
        if t.shape[0] != rows:
            raise ShapeError("concat_cols: row counts differ")
    tape = _tape_of(*tensors)
    out = np.concatenate([t.data for t in tensors], axis=1)
    if tape is None:
        return Tensor(out)
    widths = [t.shape[1] for t in tensors]
    offsets = np.cumsum([0] + widths)
    parents = tuple(t.node for t in tensors)

    def bwd(g):
        return tuple(g[:, offsets[i]:offsets[i + 1]] for i in range(len(widths)))

    return tape._record(out, parents, bwd)


def softmax_rows(x: Tensor) -> Tensor:
    """Row-wise softmax, composed from stable primitives."""
    e = exp(sub(x, row_max(x)))
    return mul(e, pow_const(row_sum(e), -1.0))


def log_softmax_rows(x: Tensor) -> Tensor:
    m = row_max(x)
    shifted = sub(x, m)
    return sub(shifted, log(row_sum(exp(shifted))))


def row_stats(x: Tensor, stat: str) -> Tensor:
    """Per-row statistic as an (n, 1) tensor.

    `std` is the population standard deviation with 1e-12 added under the
    root, so constant rows come out at 1e-6 rather than exactly zero; callers
    that divide by a std should clamp (see norms).
    """
    if stat == "mean":
        return row_mean(x)
    if stat == "max":
        return row_max(x)
    if stat == "std":
        m = row_mean(x)
        c = sub(x, m)
        var = row_mean(mul(c, c))
        return pow_const(shift(var, 1e-12), 0.5)
    raise ValueError(f"unknown stat {stat!r}")


def backward(loss: Tensor) -> None:
    """Populate gradients on the loss tensor's tape.

    The loss must be 1x1.  A second backward on the same tape raises; build a
    fresh tape per step instead.
    """
    if loss.tape is None:
        raise TapeError("backward: loss is not on a tape")
    if loss.shape != (1, 1):
        raise ShapeError(f"backward: loss must be 1x1, got {loss.shape}")
    tape = loss.tape
    if tape._consumed:
        raise TapeError("backward: tape already consumed")
    tape._consumed = True
    grads = {loss.node: np.ones((1, 1))}
    for out_id, parents, bwd in reversed(tape._ops):
        g = grads.pop(out_id, None)
        if g is None:
            continue
        pgrads = bwd(g)
        for pid, pg in zip(parents, pgrads):
            if pid is None or pg is None:
                continue
            slot = grads.get(pid)
            if slot is None:
                grads[pid] = pg.copy() if isinstance(pg, np.ndarray) else np.array(pg)
            else:
                slot += pg
    tape._grads = grads
