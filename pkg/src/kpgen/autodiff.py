"""Dense tensors with reverse-mode automatic differentiation.

Every model computation in this package is expressed through the operations
defined here.  A :class:`Tensor` wraps a numpy array; operations executed
while a :class:`Tape` is active are recorded in execution order, and
:func:`backward` replays the tape in reverse to populate ``.grad`` on every
reachable tensor with ``requires_grad``.

Broadcasting is deliberately restricted to scalar-with-tensor and
equal-shape operands; anything richer goes through an explicit
:func:`broadcast_to`.  Precision is configurable (float64 for gradient
checks, float32 for training) via :func:`set_default_dtype`.
"""

from __future__ import annotations

import contextlib
from typing import Callable, Iterable, Optional, Sequence

import numpy as np


class NumericError(Exception):
    """Raised on invalid numeric operations (shape/axis/backward misuse)."""


class ShapeError(NumericError):
    def __init__(self, op: str, *shapes) -> None:
        super().__init__(f"{op}: incompatible shapes {' vs '.join(str(s) for s in shapes)}")
        self.shapes = shapes


_DEFAULT_DTYPE: type = np.float64


def set_default_dtype(dtype) -> None:
    global _DEFAULT_DTYPE
    dt = np.dtype(dtype)
    if dt.type not in (np.float32, np.float64):
        raise NumericError(f"unsupported dtype {dt}")
    _DEFAULT_DTYPE = dt.type


def default_dtype() -> type:
    return _DEFAULT_DTYPE


@contextlib.contextmanager
def dtype_scope(dtype):
    prev = _DEFAULT_DTYPE
    set_default_dtype(dtype)
    try:
        yield
    finally:
        set_default_dtype(prev)


# A backward closure maps the output gradient to (parent, parent-gradient)
# contributions; the backward driver owns all accumulation.
BackwardFn = Callable[[np.ndarray], Iterable[tuple["Tensor", np.ndarray]]]


class Tensor:
    """A dense n-dimensional value, optionally tracked for differentiation."""

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False) -> None:
        arr = np.asarray(data)
        if arr.dtype != _DEFAULT_DTYPE:
            arr = arr.astype(_DEFAULT_DTYPE)
        self.data = arr
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Optional[BackwardFn] = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise NumericError(f"item() on tensor of shape {self.shape}")
        return float(self.data.reshape(()))

    def zero_grad(self) -> None:
        self.grad = None

    # operator sugar -----------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def sum(self, axis=None):
        return reduce_sum(self, axis)

    def mean(self, axis=None):
        return reduce_mean(self, axis)

    def reshape(self, shape):
        return reshape(self, shape)

    @property
    def T(self):
        return transpose(self)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


class Tape:
    """Execution-ordered record of operations; inputs always precede users."""

    __slots__ = ("nodes", "consumed")

    def __init__(self) -> None:
        self.nodes: list[Tensor] = []
        self.consumed = False

    def record(self, node: Tensor) -> None:
        self.nodes.append(node)

    def reset(self) -> None:
        self.nodes.clear()
        self.consumed = False

    def __len__(self) -> int:
        return len(self.nodes)


_ACTIVE_TAPE: Optional[Tape] = Tape()


def active_tape() -> Optional[Tape]:
    return _ACTIVE_TAPE


def reset_tape() -> Tape:
    """Discard the active tape's recording and return it ready for reuse."""
    if _ACTIVE_TAPE is None:
        raise NumericError("no active tape to reset (inside no_grad?)")
    _ACTIVE_TAPE.reset()
    return _ACTIVE_TAPE


@contextlib.contextmanager
def no_grad():
    """Disable recording; operations produce detached tensors."""
    global _ACTIVE_TAPE
    prev = _ACTIVE_TAPE
    _ACTIVE_TAPE = None
    try:
        yield
    finally:
        _ACTIVE_TAPE = prev


@contextlib.contextmanager
def use_tape(tape: Tape):
    global _ACTIVE_TAPE
    prev = _ACTIVE_TAPE
    _ACTIVE_TAPE = tape
    try:
        yield tape
    finally:
        _ACTIVE_TAPE = prev


def _make(data, parents: Sequence[Tensor], bwd: BackwardFn) -> Tensor:
    out = Tensor(data)
    if _ACTIVE_TAPE is not None and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = bwd
        _ACTIVE_TAPE.record(out)
    return out


def backward(loss: Tensor) -> None:
    """Populate ``.grad`` on every tracked ancestor of a scalar loss.

    Walks the active tape in reverse over the sub-graph reachable from
    ``loss``.  A second backward on the same tape without a reset is an
    error; run a fresh forward pass (or ``reset_tape()``) between passes.
    """
    if loss.data.size != 1:
        raise NumericError(f"backward requires a scalar loss, got shape {loss.shape}")
    tape = _ACTIVE_TAPE
    if tape is None:
        raise NumericError("backward called with no active tape")
    if tape.consumed:
        raise NumericError("backward already ran on this tape; reset before reusing it")
    tape.consumed = True
    if not loss.requires_grad:
        return  # constant loss: nothing reachable carries a gradient

    reachable: set[int] = set()
    stack = [loss]
    while stack:
        node = stack.pop()
        if id(node) in reachable:
            continue
        reachable.add(id(node))
        stack.extend(p for p in node._parents if p.requires_grad)

    pending: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(tape.nodes):
        g = pending.pop(id(node), None)
        if g is None or node._backward is None:
            continue
        if node.grad is None:
            node.grad = g
        else:
            node.grad = node.grad + g
        for parent, pg in node._backward(g):
            if not parent.requires_grad:
                continue
            if parent._backward is None:
                # leaf: expose the gradient to the caller
                if parent.grad is None:
                    parent.grad = np.zeros_like(parent.data)
                parent.grad += pg
            else:
                buf = pending.get(id(parent))
                if buf is None:
                    pending[id(parent)] = np.array(pg, copy=True)
                else:
                    buf += pg


# --------------------------------------------------------------------------
# elementwise operations
# --------------------------------------------------------------------------

def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a gradient down to `shape` (scalar operands only)."""
    if g.shape == shape:
        return g
    return g.sum().reshape(shape)


def _check_elementwise(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape == b.shape or a.shape == () or b.shape == ():
        return
    raise ShapeError(op, a.shape, b.shape)


def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_elementwise("add", a, b)

    def bwd(g):
        return [(a, _unbroadcast(g, a.shape)), (b, _unbroadcast(g, b.shape))]

    return _make(a.data + b.data, (a, b), bwd)


def sub(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_elementwise("sub", a, b)

    def bwd(g):
        return [(a, _unbroadcast(g, a.shape)), (b, _unbroadcast(-g, b.shape))]

    return _make(a.data - b.data, (a, b), bwd)


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_elementwise("mul", a, b)

    def bwd(g):
        return [(a, _unbroadcast(g * b.data, a.shape)),
                (b, _unbroadcast(g * a.data, b.shape))]

    return _make(a.data * b.data, (a, b), bwd)


def minimum(a, b) -> Tensor:
    """Elementwise min; ties route the gradient to the first operand."""
    a, b = _as_tensor(a), _as_tensor(b)
    _check_elementwise("minimum", a, b)
    take_a = a.data <= b.data

    def bwd(g):
        return [(a, _unbroadcast(g * take_a, a.shape)),
                (b, _unbroadcast(g * ~take_a, b.shape))]

    return _make(np.minimum(a.data, b.data), (a, b), bwd)


def maximum(a, b) -> Tensor:
    """Elementwise max; ties route the gradient to the first operand."""
    a, b = _as_tensor(a), _as_tensor(b)
    _check_elementwise("maximum", a, b)
    take_a = a.data >= b.data

    def bwd(g):
        return [(a, _unbroadcast(g * take_a, a.shape)),
                (b, _unbroadcast(g * ~take_a, b.shape))]

    return _make(np.maximum(a.data, b.data), (a, b), bwd)


def sigmoid(x) -> Tensor:
    x = _as_tensor(x)
    # Stable in both tails.
    d = x.data
    out = np.where(d >= 0, 1.0 / (1.0 + np.exp(-np.abs(d))),
                   np.exp(-np.abs(d)) / (1.0 + np.exp(-np.abs(d))))
    out = out.astype(d.dtype)

    def bwd(g):
        return [(x, g * out * (1.0 - out))]

    return _make(out, (x,), bwd)


def relu(x) -> Tensor:
    x = _as_tensor(x)
    mask = x.data > 0

    def bwd(g):
        return [(x, g * mask)]

    return _make(np.maximum(x.data, 0.0), (x,), bwd)


def tanh(x) -> Tensor:
    x = _as_tensor(x)
    out = np.tanh(x.data)

    def bwd(g):
        return [(x, g * (1.0 - out * out))]

    return _make(out, (x,), bwd)


def exp(x) -> Tensor:
    x = _as_tensor(x)
    out = np.exp(x.data)

    def bwd(g):
        return [(x, g * out)]

    return _make(out, (x,), bwd)


def log(x) -> Tensor:
    x = _as_tensor(x)

    def bwd(g):
        return [(x, g / x.data)]

    return _make(np.log(x.data), (x,), bwd)


_ELEMENTWISE = {
    "add": add, "sub": sub, "mul": mul,
    "sigmoid": sigmoid, "relu": relu, "tanh": tanh, "exp": exp, "log": log,
}


def elementwise(kind: str, *inputs) -> Tensor:
    """Dispatch an elementwise op by name (binary or unary per kind)."""
    try:
        fn = _ELEMENTWISE[kind]
    except KeyError:
        raise NumericError(f"unknown elementwise op {kind!r}") from None
    return fn(*inputs)


# --------------------------------------------------------------------------
# linear algebra and shape ops
# --------------------------------------------------------------------------

def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError("matmul", a.shape, b.shape)

    def bwd(g):
        return [(a, g @ b.data.T), (b, a.data.T @ g)]

    return _make(a.data @ b.data, (a, b), bwd)


def transpose(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    if x.data.ndim != 2:
        raise ShapeError("transpose", x.shape)

    def bwd(g):
        return [(x, g.T)]

    return _make(np.ascontiguousarray(x.data.T), (x,), bwd)


def reshape(x: Tensor, shape) -> Tensor:
    x = _as_tensor(x)
    orig = x.shape

    def bwd(g):
        return [(x, g.reshape(orig))]

    return _make(x.data.reshape(shape), (x,), bwd)


def broadcast_to(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    """Explicit broadcast; the backward pass sums over expanded axes."""
    x = _as_tensor(x)
    try:
        out = np.broadcast_to(x.data, shape)
    except ValueError:
        raise ShapeError("broadcast_to", x.shape, shape) from None
    orig = x.shape
    ndiff = len(shape) - len(orig)

    def bwd(g):
        reduced = g
        if ndiff:
            reduced = reduced.sum(axis=tuple(range(ndiff)))
        keep = tuple(i for i, n in enumerate(orig) if n == 1 and reduced.shape[i] != 1)
        if keep:
            reduced = reduced.sum(axis=keep, keepdims=True)
        return [(x, reduced.reshape(orig))]

    return _make(np.array(out), (x,), bwd)


# --------------------------------------------------------------------------
# reductions
# --------------------------------------------------------------------------

def _check_axis(op: str, x: Tensor, axis) -> None:
    if axis is not None and not (-x.data.ndim <= axis < x.data.ndim):
        raise NumericError(f"{op}: invalid axis {axis} for shape {x.shape}")


def reduce_sum(x: Tensor, axis=None) -> Tensor:
    x = _as_tensor(x)
    _check_axis("sum", x, axis)

    def bwd(g):
        if axis is None:
            return [(x, np.broadcast_to(g, x.shape).copy())]
        return [(x, np.broadcast_to(np.expand_dims(g, axis), x.shape).copy())]

    return _make(x.data.sum(axis=axis), (x,), bwd)


def reduce_mean(x: Tensor, axis=None) -> Tensor:
    x = _as_tensor(x)
    _check_axis("mean", x, axis)
    n = x.data.size if axis is None else x.shape[axis]

    def bwd(g):
        if axis is None:
            return [(x, np.broadcast_to(g / n, x.shape).copy())]
        return [(x, np.broadcast_to(np.expand_dims(g, axis) / n, x.shape).copy())]

    return _make(x.data.mean(axis=axis), (x,), bwd)


def reduce_max(x: Tensor, axis: int) -> tuple[Tensor, np.ndarray]:
    """Max along an axis; returns (values, argmax indices).

    The gradient flows only to the argmax positions (first index on ties).
    """
    x = _as_tensor(x)
    _check_axis("max", x, axis)
    idx = np.argmax(x.data, axis=axis)

    def bwd(g):
        gx = np.zeros_like(x.data)
        np.put_along_axis(gx, np.expand_dims(idx, axis),
                          np.expand_dims(g, axis), axis=axis)
        return [(x, gx)]

    return _make(np.max(x.data, axis=axis), (x,), bwd), idx


def reduce(kind: str, x: Tensor, axis=None):
    if kind == "sum":
        return reduce_sum(x, axis)
    if kind == "mean":
        return reduce_mean(x, axis)
    if kind == "max":
        return reduce_max(x, axis)
    raise NumericError(f"unknown reduce op {kind!r}")


# --------------------------------------------------------------------------
# structural ops
# --------------------------------------------------------------------------

def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [_as_tensor(t) for t in tensors]
    if not tensors:
        raise NumericError("concat of zero tensors")
    ref = tensors[0].shape
    for t in tensors[1:]:
        if len(t.shape) != len(ref) or any(
                t.shape[i] != ref[i] for i in range(len(ref)) if i != axis % len(ref)):
            raise ShapeError("concat", *(t.shape for t in tensors))
    sizes = [t.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def bwd(g):
        slicer: list = [slice(None)] * g.ndim
        outs = []
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            slicer[axis] = slice(lo, hi)
            outs.append((t, g[tuple(slicer)]))
        return outs

    return _make(np.concatenate([t.data for t in tensors], axis=axis), tensors, bwd)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    """Numerically stable softmax along `axis`."""
    x = _as_tensor(x)
    _check_axis("softmax", x, axis)
    shifted = x.data - np.max(x.data, axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def bwd(g):
        dot = (g * out).sum(axis=axis, keepdims=True)
        return [(x, out * (g - dot))]

    return _make(out, (x,), bwd)


def dropout(x: Tensor, rate: float, training: bool, rng: Optional[np.random.Generator] = None) -> Tensor:
    """Inverted dropout; exact identity when not training or rate == 0."""
    if not 0.0 <= rate < 1.0:
        raise NumericError(f"dropout rate {rate} outside [0, 1)")
    x = _as_tensor(x)
    if not training or rate == 0.0:
        return x
    if rng is None:
        raise NumericError("dropout in training mode needs an rng")
    scale = 1.0 / (1.0 - rate)
    mask = (rng.random(x.shape) >= rate) * scale

    def bwd(g):
        return [(x, g * mask)]

    return _make(x.data * mask, (x,), bwd)


def gather_rows(table: Tensor, idx) -> Tensor:
    """Select rows of a 2-D tensor; backward scatter-adds into the table."""
    table = _as_tensor(table)
    if table.data.ndim != 2:
        raise ShapeError("gather_rows", table.shape)
    idx = np.asarray(idx, dtype=np.intp)

    def bwd(g):
        gt = np.zeros_like(table.data)
        np.add.at(gt, idx, g)
        return [(table, gt)]

    return _make(table.data[idx], (table,), bwd)


def scatter_add(values: Tensor, idx, size: int) -> Tensor:
    """Sum 1-D values into a zero vector of `size` at positions `idx`."""
    values = _as_tensor(values)
    if values.data.ndim != 1:
        raise ShapeError("scatter_add", values.shape)
    idx = np.asarray(idx, dtype=np.intp)
    out = np.zeros(size, dtype=values.data.dtype)
    np.add.at(out, idx, values.data)

    def bwd(g):
        return [(values, g[idx])]

    return _make(out, (values,), bwd)


def scatter_matrix(values: Tensor, rows, cols, shape: tuple[int, int],
                   base: Optional[np.ndarray] = None) -> Tensor:
    """Add 1-D values into a (constant) base matrix at (rows, cols)."""
    values = _as_tensor(values)
    if values.data.ndim != 1:
        raise ShapeError("scatter_matrix", values.shape)
    rows = np.asarray(rows, dtype=np.intp)
    cols = np.asarray(cols, dtype=np.intp)
    out = np.zeros(shape, dtype=values.data.dtype) if base is None \
        else base.astype(values.data.dtype).copy()
    np.add.at(out, (rows, cols), values.data)

    def bwd(g):
        return [(values, g[rows, cols])]

    return _make(out, (values,), bwd)


# --------------------------------------------------------------------------
# small conveniences used across the model code
# --------------------------------------------------------------------------

def constant(data) -> Tensor:
    return Tensor(data)


def zeros(shape) -> Tensor:
    return Tensor(np.zeros(shape))


def stack_rows(rows: Sequence[Tensor]) -> Tensor:
    """Stack (1, d) row tensors into an (n, d) matrix."""
    return concat(rows, axis=0)
