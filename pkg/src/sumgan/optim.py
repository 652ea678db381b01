"""Adam optimizer with bias correction, plus global gradient-norm clipping."""

import numpy as np

from .tensor import ShapeError


class AdamState:
    """Per-parameter first/second moment buffers and the shared step counter."""

    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {name: np.zeros_like(p.values) for name, p in params.items()}
        self.v = {name: np.zeros_like(p.values) for name, p in params.items()}


def adam_step(params, grads, state):
    """One in-place Adam update. `grads` maps parameter name -> ndarray."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1 ** state.t
    bc2 = 1.0 - b2 ** state.t
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            continue
        if g.shape != p.values.shape:
            raise ShapeError(f"adam_step: grad shape {g.shape} != param {name} shape {p.values.shape}")
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p.values -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)


def clip_grad_norm(grads, max_norm):
    """Scale grads in place so their global L2 norm is <= max_norm.

    Returns the pre-clip norm. An empty grad set has norm 0.
    """
    if max_norm <= 0:
        raise ValueError(f"max_norm must be positive, got {max_norm}")
    arrays = list(grads.values()) if isinstance(grads, dict) else list(grads)
    total = 0.0
    for g in arrays:
        total += float(np.sum(g * g))
    norm = float(np.sqrt(total))
    if norm > max_norm:
        scale = max_norm / norm
        for g in arrays:
            g *= scale
    return norm


def zero_grads(params):
    for p in params.values():
        p.grad = None


def collect_grads(params):
    """Gradients by name; unreachable parameters contribute zeros."""
    return {
        name: (p.grad if p.grad is not None else np.zeros_like(p.values))
        for name, p in params.items()
    }
