"""Dense 2-D tensors with reverse-mode automatic differentiation.

Everything numeric in the pipeline flows through :class:`Tensor`: a float64
matrix plus an optional gradient accumulator. Operations on tensors record
a linked operator graph (the tape) whenever gradients are being tracked;
:func:`backward` walks that graph once in reverse topological order and
accumulates gradients additively into the leaves.

Design notes:

* only 2-D shapes exist; scalars are 1x1, row vectors 1xd, columns nx1.
  Broadcasting is limited to row/column vectors against matrices.
* every forward result is checked for NaN/Inf and raises
  :class:`~gadkit.errors.NonFiniteResultError` instead of propagating junk.
* ``log`` and row normalization floor their arguments at :data:`EPS`;
  sigmoid-based probabilities should be pushed through :func:`clamp`
  before entering a cross-entropy.
"""

from __future__ import annotations

import contextlib

import numpy as np

from .errors import (
    DetachedLossError,
    MissingGradientError,
    NonFiniteResultError,
    NotScalarError,
    ShapeMismatchError,
)

EPS = 1e-8

_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    """Context manager that suspends tape recording."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


def _as_matrix(data):
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    elif arr.ndim != 2:
        raise ShapeMismatchError(f"tensors are 2-D, got ndim={arr.ndim}")
    return arr


def _check_finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise NonFiniteResultError(f"{what} produced a non-finite value")


class Tensor:
    """A float64 matrix that can participate in gradient computation.

    ``grad`` is populated (for leaves) by :func:`backward` and accumulates
    across calls until :meth:`zero_grad` resets it.
    """

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_vjp")

    def __init__(self, data, requires_grad=False):
        arr = _as_matrix(data)
        _check_finite(arr, "tensor construction")
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self._parents = ()
        self._vjp = None

    @property
    def shape(self):
        return self.data.shape

    def item(self):
        if self.data.shape != (1, 1):
            raise NotScalarError(f"item() on shape {self.data.shape}")
        return float(self.data[0, 0])

    def detach(self):
        """A constant tensor sharing nothing with the recorded graph."""
        return Tensor(self.data.copy())

    def zero_grad(self):
        self.grad = None

    def is_leaf(self):
        return self._vjp is None

    # operator sugar; scalars are accepted where natural
    def __add__(self, other):
        if isinstance(other, Tensor):
            return add(self, other)
        return add_scalar(self, float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Tensor):
            return sub(self, other)
        return add_scalar(self, -float(other))

    def __mul__(self, other):
        if isinstance(other, Tensor):
            return mul(self, other)
        return scale(self, float(other))

    __rmul__ = __mul__

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"


def _record(out_data, parents, vjp, what):
    _check_finite(out_data, what)
    track = _grad_enabled and any(p.requires_grad for p in parents)
    out = Tensor.__new__(Tensor)
    out.data = out_data
    out.requires_grad = track
    out.grad = None
    if track:
        out._parents = tuple(parents)
        out._vjp = vjp
    else:
        out._parents = ()
        out._vjp = None
    return out


def _reduce_to(g, shape):
    """Sum ``g`` down to ``shape``, undoing row/column broadcasting."""
    if g.shape == shape:
        return g
    out = g
    if shape[0] == 1 and g.shape[0] != 1:
        out = out.sum(axis=0, keepdims=True)
    if shape[1] == 1 and g.shape[1] != 1:
        out = out.sum(axis=1, keepdims=True)
    return out


def _broadcastable(a, b):
    return (a[0] == b[0] or a[0] == 1 or b[0] == 1) and (
        a[1] == b[1] or a[1] == 1 or b[1] == 1
    )


# --- elementwise and linear ops ---------------------------------------------

def add(a, b):
    if not _broadcastable(a.shape, b.shape):
        raise ShapeMismatchError(f"add {a.shape} vs {b.shape}")
    out = a.data + b.data

    def vjp(g):
        return _reduce_to(g, a.shape), _reduce_to(g, b.shape)

    return _record(out, (a, b), vjp, "add")


def sub(a, b):
    if not _broadcastable(a.shape, b.shape):
        raise ShapeMismatchError(f"sub {a.shape} vs {b.shape}")
    out = a.data - b.data

    def vjp(g):
        return _reduce_to(g, a.shape), -_reduce_to(g, b.shape)

    return _record(out, (a, b), vjp, "sub")


def mul(a, b):
    if not _broadcastable(a.shape, b.shape):
        raise ShapeMismatchError(f"mul {a.shape} vs {b.shape}")
    out = a.data * b.data

    def vjp(g):
        return _reduce_to(g * b.data, a.shape), _reduce_to(g * a.data, b.shape)

    return _record(out, (a, b), vjp, "mul")


def scale(a, c):
    c = float(c)
    out = a.data * c

    def vjp(g):
        return (g * c,)

    return _record(out, (a,), vjp, "scale")


def add_scalar(a, c):
    c = float(c)
    out = a.data + c

    def vjp(g):
        return (g,)

    return _record(out, (a,), vjp, "add_scalar")


def matmul(a, b):
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(f"matmul {a.shape} vs {b.shape}")
    out = a.data @ b.data

    def vjp(g):
        return g @ b.data.T, a.data.T @ g

    return _record(out, (a, b), vjp, "matmul")


def transpose(a):
    out = a.data.T.copy()

    def vjp(g):
        return (g.T,)

    return _record(out, (a,), vjp, "transpose")


# --- reductions --------------------------------------------------------------

def rowsum(a):
    out = a.data.sum(axis=1, keepdims=True)
    cols = a.shape[1]

    def vjp(g):
        return (np.broadcast_to(g, (g.shape[0], cols)),)

    return _record(out, (a,), vjp, "rowsum")


def rowmean(a):
    out = a.data.mean(axis=1, keepdims=True)
    cols = a.shape[1]

    def vjp(g):
        return (np.broadcast_to(g / cols, (g.shape[0], cols)),)

    return _record(out, (a,), vjp, "rowmean")


def rowstd(a):
    """Population standard deviation of each row, as an nx1 column."""
    mu = a.data.mean(axis=1, keepdims=True)
    centered = a.data - mu
    out = np.sqrt((centered**2).mean(axis=1, keepdims=True))
    cols = a.shape[1]

    def vjp(g):
        denom = np.maximum(out, EPS) * cols
        return (g * centered / denom,)

    return _record(out, (a,), vjp, "rowstd")


def colmean(a):
    out = a.data.mean(axis=0, keepdims=True)
    rows = a.shape[0]

    def vjp(g):
        return (np.broadcast_to(g / rows, (rows, g.shape[1])),)

    return _record(out, (a,), vjp, "colmean")


def sum_all(a):
    out = np.array([[a.data.sum()]])
    shape = a.shape

    def vjp(g):
        return (np.broadcast_to(g, shape),)

    return _record(out, (a,), vjp, "sum_all")


def mean_all(a):
    out = np.array([[a.data.mean()]])
    shape = a.shape
    count = a.data.size

    def vjp(g):
        return (np.broadcast_to(g / count, shape),)

    return _record(out, (a,), vjp, "mean_all")


# --- nonlinearities -----------------------------------------------------------

def sigmoid(a):
    x = a.data
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)

    def vjp(g):
        return (g * out * (1.0 - out),)

    return _record(out, (a,), vjp, "sigmoid")


def relu(a):
    out = np.maximum(a.data, 0.0)
    mask = a.data > 0

    def vjp(g):
        return (g * mask,)

    return _record(out, (a,), vjp, "relu")


def exp(a):
    with np.errstate(over="ignore"):
        out = np.exp(a.data)

    def vjp(g):
        return (g * out,)

    return _record(out, (a,), vjp, "exp")


def log(a):
    """Natural log with the argument floored at EPS."""
    floored = np.maximum(a.data, EPS)
    out = np.log(floored)
    live = a.data > EPS

    def vjp(g):
        return (np.where(live, g / floored, 0.0),)

    return _record(out, (a,), vjp, "log")


def clamp(a, lo, hi):
    out = np.clip(a.data, lo, hi)
    mask = (a.data >= lo) & (a.data <= hi)

    def vjp(g):
        return (g * mask,)

    return _record(out, (a,), vjp, "clamp")


def softmax_rows(a):
    shifted = a.data - a.data.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=1, keepdims=True)

    def vjp(g):
        inner = (g * out).sum(axis=1, keepdims=True)
        return (out * (g - inner),)

    return _record(out, (a,), vjp, "softmax_rows")


def l2_normalize_rows(a):
    """Rows scaled to unit Euclidean norm; norms are floored at EPS."""
    norms = np.sqrt((a.data**2).sum(axis=1, keepdims=True))
    floored = np.maximum(norms, EPS)
    out = a.data / floored
    live = norms > EPS

    def vjp(g):
        inner = (g * out).sum(axis=1, keepdims=True)
        return (np.where(live, (g - out * inner) / floored, g / EPS),)

    return _record(out, (a,), vjp, "l2_normalize_rows")


def cosine_rows(a, b):
    """Per-row cosine similarity between two equal-shape matrices (nx1)."""
    if a.shape != b.shape:
        raise ShapeMismatchError(f"cosine_rows {a.shape} vs {b.shape}")
    return rowsum(mul(l2_normalize_rows(a), l2_normalize_rows(b)))


# --- structural ops -----------------------------------------------------------

def gather_rows(a, indices):
    idx = np.asarray(indices, dtype=np.intp)
    if idx.ndim != 1:
        raise ShapeMismatchError("gather_rows takes a flat index list")
    if idx.size and (idx.min() < 0 or idx.max() >= a.shape[0]):
        raise ShapeMismatchError("gather_rows index out of range")
    out = a.data[idx].copy()
    shape = a.shape

    def vjp(g):
        full = np.zeros(shape)
        np.add.at(full, idx, g)
        return (full,)

    return _record(out, (a,), vjp, "gather_rows")


def concat_rows(tensors):
    tensors = list(tensors)
    if not tensors:
        raise ShapeMismatchError("concat_rows of nothing")
    width = tensors[0].shape[1]
    if any(t.shape[1] != width for t in tensors):
        raise ShapeMismatchError("concat_rows width mismatch")
    out = np.vstack([t.data for t in tensors])
    splits = np.cumsum([t.shape[0] for t in tensors])[:-1]

    def vjp(g):
        return tuple(np.vsplit(g, splits))

    return _record(out, tuple(tensors), vjp, "concat_rows")


# --- dispatcher ----------------------------------------------------------------

_FORWARD_KINDS = {
    "matmul": matmul,
    "transpose": transpose,
    "add": add,
    "scale": scale,
    "rowsum": rowsum,
    "rowmean": rowmean,
    "rowstd": rowstd,
    "sigmoid": sigmoid,
    "relu": relu,
    "exp": exp,
    "log": log,
    "softmax_rows": softmax_rows,
    "l2_normalize_rows": l2_normalize_rows,
    "cosine_rows": cosine_rows,
    "gather_rows": gather_rows,
    "concat_rows": concat_rows,
}


def tensor_forward(kind, operands, **kwargs):
    """Apply a named operation to a list of operand tensors.

    Mainly a uniform surface for contract tests; library code calls the
    functions directly.
    """
    try:
        fn = _FORWARD_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown op kind {kind!r}") from None
    if kind == "concat_rows":
        return fn(operands)
    return fn(*operands, **kwargs)


# --- backward pass ---------------------------------------------------------------

def _topo_order(root):
    order = []
    seen = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad:
                stack.append((p, False))
    return order


def backward(loss):
    """Propagate d(loss)/d(leaf) into every requires_grad leaf.

    Gradients accumulate additively across calls; reset with
    ``Tensor.zero_grad``. Returns a map from leaf tensor to the gradient
    contributed by this call.
    """
    if loss.data.shape != (1, 1):
        raise NotScalarError(f"loss has shape {loss.data.shape}")
    if loss._vjp is None:
        raise DetachedLossError("loss has no recorded computation history")
    order = _topo_order(loss)
    pending = {id(loss): np.ones((1, 1))}
    leaf_grads = {}
    for node in reversed(order):
        g = pending.pop(id(node), None)
        if g is None:
            continue
        if node._vjp is None:
            node.grad = g if node.grad is None else node.grad + g
            leaf_grads[node] = g
            continue
        for parent, pg in zip(node._parents, node._vjp(g)):
            if pg is None or not parent.requires_grad:
                continue
            _check_finite(pg, "backward")
            key = id(parent)
            if key in pending:
                pending[key] = pending[key] + pg
            else:
                pending[key] = pg
    return leaf_grads


def grad_check(f, x, h=1e-5):
    """Max relative error between analytic and central-difference gradients.

    ``f`` maps a tensor to a scalar tensor and must be deterministic. The
    error is ``max |analytic - fd| / max(1, |fd|)`` over entries of ``x``.
    """
    probe = Tensor(x.data.copy(), requires_grad=True)
    backward(f(probe))
    analytic = probe.grad.copy()
    fd = np.zeros_like(probe.data)
    base = probe.data
    with no_grad():
        for i in range(base.shape[0]):
            for j in range(base.shape[1]):
                bumped = base.copy()
                bumped[i, j] += h
                hi = f(Tensor(bumped)).data[0, 0]
                bumped[i, j] -= 2 * h
                lo = f(Tensor(bumped)).data[0, 0]
                fd[i, j] = (hi - lo) / (2 * h)
    rel = np.abs(analytic - fd) / np.maximum(1.0, np.abs(fd))
    return float(rel.max())


# --- optimizer --------------------------------------------------------------------

class Adam:
    """Adam with bias correction over a fixed list of leaf tensors."""

    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self, grads=None):
        """Apply one update. ``grads`` may override the stored ``.grad``s."""
        self.step_count += 1
        t = self.step_count
        c1 = 1.0 - self.beta1**t
        c2 = 1.0 - self.beta2**t
        for i, p in enumerate(self.params):
            if grads is not None:
                g = grads.get(p) if hasattr(grads, "get") else grads[i]
            else:
                g = p.grad
            if g is None:
                raise MissingGradientError(f"parameter {i} has no gradient")
            g = np.asarray(g)
            if g.shape != p.data.shape:
                raise ShapeMismatchError(f"gradient shape {g.shape} vs {p.data.shape}")
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g**2
            update = (self.m[i] / c1) / (np.sqrt(self.v[i] / c2) + self.eps)
            p.data = p.data - self.lr * update
            _check_finite(p.data, "adam step")

    def zero_grad(self):
        for p in self.params:
            p.grad = None
