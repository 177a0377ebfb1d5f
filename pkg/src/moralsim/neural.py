"""Minimal feed-forward Q-network with hand-rolled backprop and Adam.

A network is a single flat float64 parameter vector with named views
(w1, b1, w2, b2) into it.  Keeping parameters, gradients and optimizer
moments flat means every update is a handful of whole-buffer numpy ops,
which is what makes populations of hundreds of thousands of episodes
tractable in pure numpy.

Flat layout, in order: w1 (hidden x input, row-major), b1 (hidden),
w2 (output x hidden, row-major), b2 (output).  Initialization draws
follow the same order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class NonFiniteError(FloatingPointError):
    """Raised when gradients or updated parameters stop being finite."""


@dataclass(slots=True)
class Hyperparams:
    """Learning constants shared by every agent in a simulation."""

    gamma: float = 0.99
    lr: float = 0.001
    eps_sel: float = 0.1
    eps_dil: float = 0.05
    hidden: int = 256
    buffer_capacity: int = 256

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not self.lr > 0:
            raise ValueError(f"learning rate must be positive, got {self.lr}")
        for name in ("eps_sel", "eps_dil"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.hidden < 1:
            raise ValueError(f"hidden width must be >= 1, got {self.hidden}")
        if self.buffer_capacity < 1:
            raise ValueError(f"buffer capacity must be >= 1, got {self.buffer_capacity}")


class QNetwork:
    """One-hidden-layer ReLU network mapping a state to one value per action."""

    __slots__ = ("input_dim", "hidden_dim", "output_dim", "params", "w1", "b1", "w2", "b2")

    def __init__(self, input_dim: int, hidden_dim: int, output_dim: int,
                 params: np.ndarray | None = None):
        if min(input_dim, hidden_dim, output_dim) < 1:
            raise ValueError("all layer dimensions must be >= 1")
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        self.output_dim = output_dim
        n = n_params(input_dim, hidden_dim, output_dim)
        if params is None:
            params = np.zeros(n)
        else:
            params = np.ascontiguousarray(params, dtype=np.float64)
            if params.shape != (n,):
                raise ValueError(f"expected {n} parameters, got shape {params.shape}")
        self.params = params
        self.w1, self.b1, self.w2, self.b2 = param_views(params, input_dim, hidden_dim, output_dim)


def n_params(input_dim: int, hidden_dim: int, output_dim: int) -> int:
    return hidden_dim * input_dim + hidden_dim + output_dim * hidden_dim + output_dim


def param_views(flat: np.ndarray, input_dim: int, hidden_dim: int, output_dim: int):
    """Views (w1, b1, w2, b2) into a flat parameter or gradient vector."""
    i = 0
    w1 = flat[i:i + hidden_dim * input_dim].reshape(hidden_dim, input_dim)
    i += hidden_dim * input_dim
    b1 = flat[i:i + hidden_dim]
    i += hidden_dim
    w2 = flat[i:i + output_dim * hidden_dim].reshape(output_dim, hidden_dim)
    i += output_dim * hidden_dim
    b2 = flat[i:i + output_dim]
    return w1, b1, w2, b2


def init_network(input_dim: int, hidden_dim: int, output_dim: int,
                 rng: np.random.Generator) -> QNetwork:
    """Fresh network with uniform Glorot weights and zero biases.

    Weight draws consume the generator in flat layout order: all of w1
    row-major, then all of w2 row-major.  Biases draw nothing.
    """
    net = QNetwork(input_dim, hidden_dim, output_dim)
    limit1 = np.sqrt(6.0 / (input_dim + hidden_dim))
    net.w1[...] = rng.uniform(-limit1, limit1, size=(hidden_dim, input_dim))
    limit2 = np.sqrt(6.0 / (hidden_dim + output_dim))
    net.w2[...] = rng.uniform(-limit2, limit2, size=(output_dim, hidden_dim))
    return net


def forward(net: QNetwork, x: np.ndarray) -> np.ndarray:
    """Action values for one state vector of length ``input_dim``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (net.input_dim,):
        raise ValueError(f"state has shape {x.shape}, expected ({net.input_dim},)")
    h = net.w1 @ x
    h += net.b1
    np.maximum(h, 0.0, out=h)
    q = net.w2 @ h
    q += net.b2
    return q


def forward_batch(net: QNetwork, xs: np.ndarray) -> np.ndarray:
    """Action values for a batch of states, one row per state."""
    q = xs @ net.w1.T
    q += net.b1
    np.maximum(q, 0.0, out=q)
    q = q @ net.w2.T
    q += net.b2
    return q


def td_loss_and_grad(net: QNetwork, batch, gamma: float):
    """Mean squared one-step TD error and its semi-gradient.

    The target y = r + gamma * max_a' Q(s', a') is evaluated with the
    same network and treated as a constant: no gradient flows through
    the bootstrap term.  ``batch`` is a non-empty sequence of
    experiences with fields (s, a, r, s_next).

    Returns (loss, grads) with ``grads`` flat in the network's
    parameter layout.
    """
    m = len(batch)
    if m == 0:
        raise ValueError("cannot compute a TD update from an empty batch")
    xs = np.empty((m, net.input_dim))
    xns = np.empty((m, net.input_dim))
    acts = np.empty(m, dtype=np.intp)
    rs = np.empty(m)
    for i, e in enumerate(batch):
        xs[i] = e.s
        xns[i] = e.s_next
        acts[i] = e.a
        rs[i] = e.r

    y = forward_batch(net, xns).max(axis=1)
    y *= gamma
    y += rs

    # forward pass on s with the relu activations kept for backprop
    h = xs @ net.w1.T
    h += net.b1
    np.maximum(h, 0.0, out=h)
    q = h @ net.w2.T
    q += net.b2

    rows = np.arange(m)
    err = q[rows, acts]
    err -= y
    loss = float(err @ err) / m

    # d loss / d q[i, a_i] = 2 (q - y) / m, zero elsewhere
    dq = np.zeros((m, net.output_dim))
    dq[rows, acts] = err * (2.0 / m)

    grads = np.empty_like(net.params)
    gw1, gb1, gw2, gb2 = param_views(grads, net.input_dim, net.hidden_dim, net.output_dim)
    np.matmul(dq.T, h, out=gw2)
    np.sum(dq, axis=0, out=gb2)
    dh = dq @ net.w2
    dh *= h > 0.0
    np.matmul(dh.T, xs, out=gw1)
    np.sum(dh, axis=0, out=gb1)
    return loss, grads


class AdamState:
    """Adam moments for one network, flat like the parameters."""

    __slots__ = ("lr", "beta1", "beta2", "eps", "step", "m", "v", "_s1", "_s2")

    def __init__(self, n: int, lr: float = 0.001, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step = 0
        self.m = np.zeros(n)
        self.v = np.zeros(n)
        # scratch buffers so a step allocates nothing
        self._s1 = np.empty(n)
        self._s2 = np.empty(n)


def adam_step(net: QNetwork, opt: AdamState, grads: np.ndarray) -> None:
    """One Adam update of ``net.params`` in place.

    The step counter increments before the bias corrections, so the
    first call uses t = 1.
    """
    if grads.shape != net.params.shape:
        raise ValueError(f"gradient shape {grads.shape} does not match parameters")
    if not np.isfinite(grads).all():
        raise NonFiniteError("non-finite gradient passed to the optimizer")
    opt.step += 1
    b1, b2 = opt.beta1, opt.beta2
    s1, s2 = opt._s1, opt._s2

    opt.m *= b1
    np.multiply(grads, 1.0 - b1, out=s1)
    opt.m += s1

    opt.v *= b2
    np.multiply(grads, grads, out=s1)
    s1 *= 1.0 - b2
    opt.v += s1

    # s2 <- lr * mhat, s1 <- sqrt(vhat) + eps
    np.multiply(opt.m, opt.lr / (1.0 - b1 ** opt.step), out=s2)
    np.divide(opt.v, 1.0 - b2 ** opt.step, out=s1)
    np.sqrt(s1, out=s1)
    s1 += opt.eps
    s2 /= s1
    net.params -= s2
    if not np.isfinite(net.params).all():
        raise NonFiniteError("parameters diverged to non-finite values")


def net_state(net: QNetwork) -> dict:
    """JSON-ready snapshot of a network's weights."""
    return {
        "input_dim": net.input_dim,
        "hidden_dim": net.hidden_dim,
        "output_dim": net.output_dim,
        "w1": net.w1.tolist(),
        "b1": net.b1.tolist(),
        "w2": net.w2.tolist(),
        "b2": net.b2.tolist(),
    }


def load_network(state: dict) -> QNetwork:
    """Rebuild a network from :func:`net_state` output."""
    net = QNetwork(state["input_dim"], state["hidden_dim"], state["output_dim"])
    net.w1[...] = state["w1"]
    net.b1[...] = state["b1"]
    net.w2[...] = state["w2"]
    net.b2[...] = state["b2"]
    return net
