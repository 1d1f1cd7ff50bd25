"""Reverse-mode differentiation over a fixed operator set.

The training objective only ever composes a small family of operations
(dense layers, ReLU, softplus, softmax, sigmoid, log, lgamma/digamma,
elementwise arithmetic, gathers and reductions), so a tape of closures over
numpy arrays is all that is needed; there is no general autodiff framework
here.  ``Tensor`` records parents and a backward closure per node;
``Tensor.backward()`` runs the closures in reverse topological order.

The module-level functions (``log``, ``exp``, ``lgamma`` ...) dispatch on
input type: given a ``Tensor`` they extend the tape, given a plain
array/scalar they compute with numpy directly.  Formula code written against
these dispatchers therefore serves both the differentiable training path and
the plain evaluation path.

``no_grad()`` disables tape recording (used everywhere outside the trainer).
Gradient correctness for every operator is pinned by central finite
differences in the test suite.
"""

from __future__ import annotations

from contextlib import contextmanager

import numpy as np

from . import special

__all__ = [
    "Tensor",
    "no_grad",
    "log",
    "exp",
    "relu",
    "softplus",
    "sigmoid",
    "log_sigmoid",
    "lgamma",
    "digamma",
    "matmul",
    "softmax",
    "stack",
    "concat",
    "gather",
    "tsum",
    "tmean",
    "tmin",
    "value_of",
]

_grad_enabled = True


@contextmanager
def no_grad():
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


def _sum_to_shape(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Undo numpy broadcasting: reduce grad back to the operand's shape."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tensor:
    """A node in the tape: a float64 array plus backward bookkeeping."""

    __slots__ = ("value", "grad", "_parents", "_backward")

    def __init__(self, value, parents=(), backward=None):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = None
        self._parents = parents if _grad_enabled else ()
        self._backward = backward if _grad_enabled else None

    @property
    def shape(self):
        return self.value.shape

    def item(self) -> float:
        return float(self.value)

    def backward(self):
        if self.value.ndim != 0:
            raise ValueError("backward() requires a scalar output")
        order: list[Tensor] = []
        seen: set[int] = set()
        stack = [self]
        # Iterative post-order topological sort (graphs can be deep).
        while stack:
            node = stack.pop()
            if id(node) in seen:
                continue
            pending = [p for p in node._parents if id(p) not in seen]
            if pending:
                stack.append(node)
                stack.extend(pending)
            else:
                seen.add(id(node))
                order.append(node)
        for node in order:
            node.grad = np.zeros_like(node.value)
        self.grad = np.ones_like(self.value)
        for node in reversed(order):
            if node._backward is not None:
                node._backward(node.grad)

    # -- elementwise arithmetic ------------------------------------------

    def __add__(self, other):
        other = _wrap(other)
        out = Tensor(self.value + other.value, (self, other))

        def backward(g):
            self.grad += _sum_to_shape(g, self.value.shape)
            other.grad += _sum_to_shape(g, other.value.shape)

        out._backward = backward if _grad_enabled else None
        return out

    __radd__ = __add__

    def __neg__(self):
        out = Tensor(-self.value, (self,))

        def backward(g):
            self.grad += -g

        out._backward = backward if _grad_enabled else None
        return out

    def __sub__(self, other):
        return self + (-_wrap(other))

    def __rsub__(self, other):
        return _wrap(other) + (-self)

    def __mul__(self, other):
        other = _wrap(other)
        out = Tensor(self.value * other.value, (self, other))

        def backward(g):
            self.grad += _sum_to_shape(g * other.value, self.value.shape)
            other.grad += _sum_to_shape(g * self.value, other.value.shape)

        out._backward = backward if _grad_enabled else None
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _wrap(other)
        out = Tensor(self.value / other.value, (self, other))

        def backward(g):
            self.grad += _sum_to_shape(g / other.value, self.value.shape)
            other.grad += _sum_to_shape(
                -g * self.value / (other.value * other.value), other.value.shape
            )

        out._backward = backward if _grad_enabled else None
        return out

    def __rtruediv__(self, other):
        return _wrap(other) / self

    def __pow__(self, exponent):
        if not isinstance(exponent, (int, float)):
            raise TypeError("only constant exponents are supported")
        out = Tensor(self.value**exponent, (self,))

        def backward(g):
            self.grad += g * exponent * self.value ** (exponent - 1)

        out._backward = backward if _grad_enabled else None
        return out

    def __getitem__(self, key):
        out = Tensor(self.value[key], (self,))

        def backward(g):
            scratch = np.zeros_like(self.value)
            np.add.at(scratch, key, g)
            self.grad += scratch

        out._backward = backward if _grad_enabled else None
        return out

    def reshape(self, *shape):
        out = Tensor(self.value.reshape(*shape), (self,))

        def backward(g):
            self.grad += g.reshape(self.value.shape)

        out._backward = backward if _grad_enabled else None
        return out


def _wrap(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))


def value_of(x):
    """Plain ndarray view of a Tensor or array-like."""
    return x.value if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)


def _unary(x, fn, dfn):
    if not isinstance(x, Tensor):
        return fn(np.asarray(x, dtype=np.float64))
    out = Tensor(fn(x.value), (x,))

    def backward(g):
        x.grad += g * dfn(x.value, out.value)

    out._backward = backward if _grad_enabled else None
    return out


def log(x):
    return _unary(x, np.log, lambda v, o: 1.0 / v)


def exp(x):
    return _unary(x, np.exp, lambda v, o: o)


def relu(x):
    return _unary(x, lambda v: np.maximum(v, 0.0), lambda v, o: (v > 0).astype(np.float64))


def softplus(x):
    return _unary(x, lambda v: np.logaddexp(0.0, v), lambda v, o: _sigmoid_np(v))


def sigmoid(x):
    return _unary(x, _sigmoid_np, lambda v, o: o * (1.0 - o))


def log_sigmoid(x):
    return _unary(x, lambda v: -np.logaddexp(0.0, -v), lambda v, o: _sigmoid_np(-v))


def lgamma(x):
    return _unary(x, special.log_gamma, lambda v, o: special.digamma(v))


def digamma(x):
    return _unary(x, special.digamma, lambda v, o: special.trigamma(v))


def _sigmoid_np(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def matmul(x, w):
    """x @ w with stacked leading batch dims on x; w is 2-D."""
    if not isinstance(x, Tensor) and not isinstance(w, Tensor):
        return np.matmul(x, w)
    x, w = _wrap(x), _wrap(w)
    out = Tensor(np.matmul(x.value, w.value), (x, w))

    def backward(g):
        x.grad += np.matmul(g, w.value.T)
        w.grad += np.einsum("...i,...j->ij", x.value, g)

    out._backward = backward if _grad_enabled else None
    return out


def softmax(x, axis=0):
    if not isinstance(x, Tensor):
        return _softmax_np(x, axis)
    out = Tensor(_softmax_np(x.value, axis), (x,))

    def backward(g):
        y = out.value
        x.grad += y * (g - np.sum(g * y, axis=axis, keepdims=True))

    out._backward = backward if _grad_enabled else None
    return out


def _softmax_np(x: np.ndarray, axis: int) -> np.ndarray:
    shifted = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


def stack(items, axis=0):
    if not any(isinstance(t, Tensor) for t in items):
        return np.stack(items, axis=axis)
    items = [_wrap(t) for t in items]
    out = Tensor(np.stack([t.value for t in items], axis=axis), tuple(items))

    def backward(g):
        pieces = np.split(g, len(items), axis=axis)
        for t, piece in zip(items, pieces):
            t.grad += np.squeeze(piece, axis=axis)

    out._backward = backward if _grad_enabled else None
    return out


def concat(items, axis=-1):
    if not any(isinstance(t, Tensor) for t in items):
        return np.concatenate(items, axis=axis)
    items = [_wrap(t) for t in items]
    out = Tensor(np.concatenate([t.value for t in items], axis=axis), tuple(items))
    sizes = [t.value.shape[axis] for t in items]

    def backward(g):
        splits = np.split(g, np.cumsum(sizes)[:-1], axis=axis)
        for t, piece in zip(items, splits):
            t.grad += piece

    out._backward = backward if _grad_enabled else None
    return out


def gather(table, ids):
    """Row lookup table[ids]; backward scatter-adds into the table."""
    ids = np.asarray(ids)
    if not isinstance(table, Tensor):
        return table[ids]
    out = Tensor(table.value[ids], (table,))

    def backward(g):
        np.add.at(table.grad, ids, g)

    out._backward = backward if _grad_enabled else None
    return out


def tsum(x, axis=None, keepdims=False):
    if not isinstance(x, Tensor):
        return np.sum(x, axis=axis, keepdims=keepdims)
    out = Tensor(np.sum(x.value, axis=axis, keepdims=keepdims), (x,))

    def backward(g):
        if axis is None:
            x.grad += np.broadcast_to(g, x.value.shape)
            return
        if not keepdims:
            g = np.expand_dims(g, axis)
        x.grad += np.broadcast_to(g, x.value.shape)

    out._backward = backward if _grad_enabled else None
    return out


def tmean(x):
    if not isinstance(x, Tensor):
        return float(np.mean(x))
    return tsum(x) / float(x.value.size)


def tmin(x, axis=0):
    """Minimum along an axis; subgradient flows to the first argmin."""
    if not isinstance(x, Tensor):
        return np.min(x, axis=axis)
    idx = np.argmin(x.value, axis=axis)
    out = Tensor(np.min(x.value, axis=axis), (x,))

    def backward(g):
        scratch = np.zeros_like(x.value)
        grid = np.indices(idx.shape)
        full = list(grid)
        full.insert(axis if axis >= 0 else x.value.ndim + axis, idx)
        scratch[tuple(full)] = g
        x.grad += scratch

    out._backward = backward if _grad_enabled else None
    return out
