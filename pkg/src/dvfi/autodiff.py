"""Minimal reverse-mode automatic differentiation over numpy arrays.

Just the operations the D-map estimator needs: 3x3 same-padding
convolution, leaky ReLU, logistic squashing, elementwise arithmetic with
broadcasting, masked blending against constant frames, and a mean
Charbonnier loss. Gradients are float64 throughout so finite-difference
checks can be tight.
"""

from __future__ import annotations

import numpy as np


class Tensor:
    """A value node in the computation graph."""

    __slots__ = ("value", "grad", "parents", "_backward")

    def __init__(self, value, parents=(), backward=None):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = None
        self.parents = tuple(parents)
        self._backward = backward

    @property
    def shape(self):
        return self.value.shape

    def _accum(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.value)
        self.grad += g

    def backward(self) -> None:
        """Reverse-accumulate d(self)/d(leaf) into every reachable node."""
        if self.value.ndim != 0:
            raise ValueError("backward() expects a scalar loss tensor")
        order: list[Tensor] = []
        seen: set[int] = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node.parents:
                stack.append((p, False))
        self._accum(np.ones_like(self.value))
        for node in reversed(order):
            if node._backward is not None:
                node._backward(node.grad)

    # convenience arithmetic (constants are promoted to leaf tensors)
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __sub__(self, other):
        return add(self, mul(other, -1.0))

    def __rsub__(self, other):
        return add(mul(self, -1.0), other)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a gradient back down to the broadcast-source shape."""
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.value + b.value, parents=(a, b))

    def backward(g):
        a._accum(_unbroadcast(g, a.value.shape))
        b._accum(_unbroadcast(g, b.value.shape))

    out._backward = backward
    return out


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.value * b.value, parents=(a, b))

    def backward(g):
        a._accum(_unbroadcast(g * b.value, a.value.shape))
        b._accum(_unbroadcast(g * a.value, b.value.shape))

    out._backward = backward
    return out


def leaky_relu(x: Tensor, slope: float = 0.1) -> Tensor:
    x = as_tensor(x)
    pos = x.value > 0
    out = Tensor(np.where(pos, x.value, slope * x.value), parents=(x,))

    def backward(g):
        x._accum(np.where(pos, g, slope * g))

    out._backward = backward
    return out


def sigmoid(x: Tensor) -> Tensor:
    x = as_tensor(x)
    # numerically stable logistic
    v = np.where(x.value >= 0,
                 1.0 / (1.0 + np.exp(-np.abs(x.value))),
                 np.exp(-np.abs(x.value)) / (1.0 + np.exp(-np.abs(x.value))))
    out = Tensor(v, parents=(x,))

    def backward(g):
        x._accum(g * v * (1.0 - v))

    out._backward = backward
    return out


def mean(x: Tensor) -> Tensor:
    x = as_tensor(x)
    out = Tensor(x.value.mean(), parents=(x,))

    def backward(g):
        x._accum(np.full_like(x.value, g / x.value.size))

    out._backward = backward
    return out


def charbonnier_mean(x: Tensor, target: np.ndarray, epsilon: float) -> Tensor:
    """Mean of sqrt((x - target)^2 + epsilon^2); target is a constant."""
    x = as_tensor(x)
    diff = x.value - np.asarray(target, dtype=np.float64)
    phi = np.sqrt(diff * diff + epsilon * epsilon)
    out = Tensor(phi.mean(), parents=(x,))

    def backward(g):
        x._accum(g * diff / (phi * phi.size))

    out._backward = backward
    return out


def _im2col(xp: np.ndarray, h: int, w: int) -> np.ndarray:
    """(C, H+2, W+2) padded input -> (C*9, H*W) patch matrix."""
    c = xp.shape[0]
    col = np.empty((c, 3, 3, h, w))
    for i in range(3):
        for j in range(3):
            col[:, i, j] = xp[:, i:i + h, j:j + w]
    return col.reshape(c * 9, h * w)


def conv3x3(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """Stride-1 3x3 convolution with zero padding ('same' spatial size).

    x: (C_in, H, W); weight: (C_out, C_in, 3, 3); bias: (C_out,).
    """
    x, weight, bias = as_tensor(x), as_tensor(weight), as_tensor(bias)
    c_in, h, w = x.value.shape
    c_out = weight.value.shape[0]
    xp = np.pad(x.value, ((0, 0), (1, 1), (1, 1)))
    col = _im2col(xp, h, w)
    wmat = weight.value.reshape(c_out, c_in * 9)
    y = (wmat @ col).reshape(c_out, h, w) + bias.value[:, None, None]
    out = Tensor(y, parents=(x, weight, bias))

    def backward(g):
        gmat = g.reshape(c_out, h * w)
        weight._accum((gmat @ col.T).reshape(weight.value.shape))
        bias._accum(g.sum(axis=(1, 2)))
        dcol = (wmat.T @ gmat).reshape(c_in, 3, 3, h, w)
        dxp = np.zeros_like(xp)
        for i in range(3):
            for j in range(3):
                dxp[:, i:i + h, j:j + w] += dcol[:, i, j]
        x._accum(dxp[:, 1:1 + h, 1:1 + w])

    out._backward = backward
    return out


def blend_const(d: Tensor, continuous: np.ndarray, previous: np.ndarray) -> Tensor:
    """continuous*(1-d) + previous*d with constant frames.

    d: (1, H, W); frames: (3, H, W). The map broadcasts over channels.
    """
    d = as_tensor(d)
    continuous = np.asarray(continuous, dtype=np.float64)
    previous = np.asarray(previous, dtype=np.float64)
    out = Tensor(continuous * (1.0 - d.value) + previous * d.value, parents=(d,))

    def backward(g):
        d._accum((g * (previous - continuous)).sum(axis=0, keepdims=True))

    out._backward = backward
    return out
