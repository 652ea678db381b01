"""Reverse-mode automatic differentiation over dense float64 arrays.

Define-by-run: every operation stores its parents and a local gradient
rule on the tensor it produces, and backward() replays the recorded
graph in reverse topological order. Single-threaded within one training
step; read-only tensors may be shared across workers.
"""

import numpy as np


class ShapeError(ValueError):
    """Operand shapes do not conform for the requested operation."""


class GraphError(RuntimeError):
    """Invalid use of the recorded computation graph."""


_GRAD_ENABLED = True

# When True every op output is checked for NaN/Inf (slow, debug only).
DEBUG_CHECKS = False


class no_grad:
    """Context manager that disables graph recording (fast inference/sampling)."""

    def __enter__(self):
        global _GRAD_ENABLED
        self._prev = _GRAD_ENABLED
        _GRAD_ENABLED = False
        return self

    def __exit__(self, *exc):
        global _GRAD_ENABLED
        _GRAD_ENABLED = self._prev
        return False


def grad_enabled():
    return _GRAD_ENABLED


class Tensor:
    __slots__ = ("values", "grad", "requires_grad", "_parents", "_backward", "name")

    def __init__(self, values, requires_grad=False, name=None):
        self.values = np.asarray(values, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = None
        self._backward = None
        self.name = name

    @property
    def shape(self):
        return self.values.shape

    @property
    def size(self):
        return self.values.size

    def item(self):
        return float(self.values.reshape(-1)[0])

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.values.shape}{tag})"

    # arithmetic sugar; scalars/arrays are wrapped as constant tensors
    def __add__(self, other):
        return add(self, _as_tensor(other))

    def __radd__(self, other):
        return add(_as_tensor(other), self)

    def __neg__(self):
        return neg(self)

    def __sub__(self, other):
        return sub(self, _as_tensor(other))

    def __rsub__(self, other):
        return sub(_as_tensor(other), self)

    def __mul__(self, other):
        return mul(self, _as_tensor(other))

    def __rmul__(self, other):
        return mul(_as_tensor(other), self)

    def __truediv__(self, other):
        return div(self, _as_tensor(other))

    def __rtruediv__(self, other):
        return div(_as_tensor(other), self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return tslice(self, key)

    @property
    def T(self):
        return transpose(self)


def _as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(values, parents, backward_fn, opname):
    if DEBUG_CHECKS and not np.all(np.isfinite(values)):
        raise GraphError(f"{opname} produced a non-finite value")
    out = Tensor(values)
    if _GRAD_ENABLED:
        out._parents = tuple(parents)
        out._backward = backward_fn
    return out


def _unbroadcast(g, shape):
    """Reduce gradient g back to `shape` after numpy broadcasting."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


# ---------------------------------------------------------------------------
# primitives


def add(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    try:
        v = a.values + b.values
    except ValueError:
        raise ShapeError(f"add: shapes {a.shape} and {b.shape} do not broadcast")
    return _make(v, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)), "add")


def sub(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    try:
        v = a.values - b.values
    except ValueError:
        raise ShapeError(f"sub: shapes {a.shape} and {b.shape} do not broadcast")
    return _make(v, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)), "sub")


def neg(a):
    return _make(-a.values, (a,), lambda g: (-g,), "neg")


def mul(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    try:
        v = a.values * b.values
    except ValueError:
        raise ShapeError(f"mul: shapes {a.shape} and {b.shape} do not broadcast")
    return _make(
        v,
        (a, b),
        lambda g: (_unbroadcast(g * b.values, a.shape), _unbroadcast(g * a.values, b.shape)),
        "mul",
    )


def div(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    try:
        v = a.values / b.values
    except ValueError:
        raise ShapeError(f"div: shapes {a.shape} and {b.shape} do not broadcast")
    return _make(
        v,
        (a, b),
        lambda g: (
            _unbroadcast(g / b.values, a.shape),
            _unbroadcast(-g * a.values / (b.values * b.values), b.shape),
        ),
        "div",
    )


def matmul(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    av, bv = a.values, b.values
    ok = (
        (av.ndim == 2 and bv.ndim in (1, 2) and av.shape[1] == bv.shape[0])
        or (av.ndim == 1 and bv.ndim == 2 and av.shape[0] == bv.shape[0])
        or (av.ndim == 1 and bv.ndim == 1 and av.shape[0] == bv.shape[0])
    )
    if not ok:
        raise ShapeError(f"matmul: shapes {av.shape} @ {bv.shape} do not conform")
    v = av @ bv

    def backward(g):
        if av.ndim == 2 and bv.ndim == 2:
            return g @ bv.T, av.T @ g
        if av.ndim == 2 and bv.ndim == 1:
            return np.outer(g, bv), av.T @ g
        if av.ndim == 1 and bv.ndim == 2:
            return bv @ g, np.outer(av, g)
        return g * bv, g * av  # both 1-d, scalar output

    return _make(v, (a, b), backward, "matmul")


def dot(a, b):
    return matmul(a, b)


def transpose(a):
    if a.values.ndim != 2:
        raise ShapeError(f"transpose: expected 2-d tensor, got shape {a.shape}")
    return _make(a.values.T.copy(), (a,), lambda g: (g.T,), "transpose")


def reshape(a, shape):
    old = a.values.shape
    return _make(a.values.reshape(shape), (a,), lambda g: (g.reshape(old),), "reshape")


def concat(tensors, axis=0):
    tensors = [_as_tensor(t) for t in tensors]
    v = np.concatenate([t.values for t in tensors], axis=axis)
    sizes = [t.values.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward(g):
        return tuple(
            np.take(g, range(offsets[i], offsets[i + 1]), axis=axis)
            for i in range(len(tensors))
        )

    return _make(v, tensors, backward, "concat")


def stack(tensors):
    """Stack equal-shape tensors along a new leading axis."""
    tensors = [_as_tensor(t) for t in tensors]
    v = np.stack([t.values for t in tensors])
    return _make(v, tensors, lambda g: tuple(g[i] for i in range(len(tensors))), "stack")


def tslice(a, key):
    v = a.values[key]
    if np.isscalar(v):
        v = np.asarray(v)

    def backward(g):
        ga = np.zeros_like(a.values)
        ga[key] = g
        return (ga,)

    return _make(v, (a,), backward, "slice")


def gather(vec, idx):
    """Pick element idx of a 1-d tensor (scalar output)."""
    if vec.values.ndim != 1:
        raise ShapeError(f"gather: expected 1-d tensor, got shape {vec.shape}")
    idx = int(idx)
    v = np.asarray(vec.values[idx])

    def backward(g):
        ga = np.zeros_like(vec.values)
        ga[idx] = g
        return (ga,)

    return _make(v, (vec,), backward, "gather")


def take_row(mat, i):
    """Row i of a 2-d tensor; gradient scatters back into that row."""
    if mat.values.ndim != 2:
        raise ShapeError(f"take_row: expected 2-d tensor, got shape {mat.shape}")
    i = int(i)
    v = mat.values[i].copy()

    def backward(g):
        gm = np.zeros_like(mat.values)
        gm[i] = g
        return (gm,)

    return _make(v, (mat,), backward, "take_row")


def pad_to(vec, size):
    """Extend a 1-d tensor with trailing zeros up to `size`."""
    n = vec.values.shape[0]
    if size < n:
        raise ShapeError(f"pad_to: target size {size} < length {n}")
    v = np.zeros(size)
    v[:n] = vec.values
    return _make(v, (vec,), lambda g: (g[:n],), "pad_to")


def scatter_add(weights, indices, size):
    """1-d tensor of `size` accumulating weights[i] at indices[i]."""
    idx = np.asarray(indices, dtype=np.intp)
    if idx.shape != weights.values.shape:
        raise ShapeError(f"scatter_add: {weights.shape} weights vs {idx.shape} indices")
    v = np.zeros(size)
    np.add.at(v, idx, weights.values)
    return _make(v, (weights,), lambda g: (g[idx],), "scatter_add")


def exp(a):
    v = np.exp(a.values)
    return _make(v, (a,), lambda g: (g * v,), "exp")


def log(a):
    return _make(np.log(a.values), (a,), lambda g: (g / a.values,), "log")


def tanh(a):
    v = np.tanh(a.values)
    return _make(v, (a,), lambda g: (g * (1.0 - v * v),), "tanh")


def sigmoid(a):
    v = np.where(a.values >= 0, 1.0 / (1.0 + np.exp(-a.values)),
                 np.exp(a.values) / (1.0 + np.exp(a.values)))
    return _make(v, (a,), lambda g: (g * v * (1.0 - v),), "sigmoid")


def relu(a):
    v = np.maximum(a.values, 0.0)
    return _make(v, (a,), lambda g: (g * (a.values > 0),), "relu")


def softmax(a, axis=-1):
    # max-subtraction for stability; the shift cancels in the normalization
    shifted = a.values - a.values.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    v = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        inner = (g * v).sum(axis=axis, keepdims=True)
        return (v * (g - inner),)

    return _make(v, (a,), backward, "softmax")


def tsum(a, axis=None):
    v = a.values.sum(axis=axis)

    def backward(g):
        if axis is None:
            return (np.broadcast_to(g, a.values.shape).copy(),)
        return (np.broadcast_to(np.expand_dims(g, axis), a.values.shape).copy(),)

    return _make(np.asarray(v), (a,), backward, "sum")


def mean(a):
    n = a.values.size
    return _make(
        np.asarray(a.values.mean()),
        (a,),
        lambda g: (np.broadcast_to(g / n, a.values.shape).copy(),),
        "mean",
    )


def max0(a):
    """Max over axis 0; gradient flows only to the (first) argmax positions."""
    if a.values.shape[0] == 0:
        raise ShapeError("max0: empty axis")
    idx = a.values.argmax(axis=0)
    v = a.values.max(axis=0)

    def backward(g):
        ga = np.zeros_like(a.values)
        if a.values.ndim == 1:
            ga[idx] = g
        else:
            ga[idx, np.arange(a.values.shape[1])] = g
        return (ga,)

    return _make(v, (a,), backward, "max0")


def lstm_step(x, h, c, W, b):
    """One LSTM cell step: gates i, f, o and candidate g from W @ [x; h] + b."""
    H = h.values.shape[0]
    z = matmul(W, concat([x, h])) + b
    i = sigmoid(z[0:H])
    f = sigmoid(z[H:2 * H])
    o = sigmoid(z[2 * H:3 * H])
    g = tanh(z[3 * H:4 * H])
    c_new = f * c + i * g
    h_new = o * tanh(c_new)
    return h_new, c_new


# ---------------------------------------------------------------------------
# backward pass


def backward(loss):
    """Populate .grad on every trainable tensor reachable from a scalar loss."""
    if loss.values.size != 1:
        raise GraphError(f"backward requires a scalar loss, got shape {loss.shape}")
    if loss._parents is None:
        raise GraphError("backward on a tensor with no recorded operations")

    topo = []
    visited = set()
    stack = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            topo.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        if node._parents:
            for p in node._parents:
                if id(p) not in visited:
                    stack.append((p, False))

    grads = {id(loss): np.ones_like(loss.values)}
    for node in reversed(topo):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node.requires_grad:
            node.grad = g.copy() if node.grad is None else node.grad + g
        if node._backward is None:
            continue
        for parent, pg in zip(node._parents, node._backward(g)):
            if pg is None:
                continue
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + pg
            else:
                grads[key] = pg
