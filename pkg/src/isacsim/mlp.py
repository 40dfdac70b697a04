"""Small dense network trained online to imitate chosen update decisions.

Plain numpy implementation: leaky rectified hidden layers, sigmoid outputs,
elementwise binary cross entropy and bias-corrected ADAM.  Keeping the
arithmetic explicit makes gradient checks against finite differences direct
and keeps training bit-reproducible for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LEAKY_SLOPE = 0.3
CLIP_EPS = 1e-7


class Mlp:
    """Fully connected network with sigmoid outputs.

    Weights are stored as a list of (w, b) pairs with w of shape
    (fan_in, fan_out).  Initialization is symmetric uniform scaled by the
    inverse square root of the fan-in, drawn from the given generator.
    """

    def __init__(self, sizes, rng: np.random.Generator):
        if len(sizes) < 2:
            raise ValueError(f"need at least input and output sizes, got {sizes}")
        self.sizes = tuple(int(s) for s in sizes)
        self.layers = []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            w = rng.uniform(-bound, bound, size=(fan_in, fan_out))
            b = rng.uniform(-bound, bound, size=fan_out)
            self.layers.append((w, b))

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Output probabilities for a single feature vector or a batch."""
        x = np.asarray(x, dtype=float)
        squeeze = x.ndim == 1
        a = x[None, :] if squeeze else x
        last = len(self.layers) - 1
        for i, (w, b) in enumerate(self.layers):
            z = a @ w + b
            a = _sigmoid(z) if i == last else _leaky(z)
        return a[0] if squeeze else a

    def forward_cached(self, x: np.ndarray):
        """Batch forward pass keeping pre-activations for backpropagation."""
        a = np.asarray(x, dtype=float)
        activations = [a]
        pre = []
        last = len(self.layers) - 1
        for i, (w, b) in enumerate(self.layers):
            z = a @ w + b
            pre.append(z)
            a = _sigmoid(z) if i == last else _leaky(z)
            activations.append(a)
        return activations, pre

    def state_dict(self) -> dict:
        out = {"sizes": np.asarray(self.sizes)}
        for i, (w, b) in enumerate(self.layers):
            out[f"w{i}"] = w
            out[f"b{i}"] = b
        return out

    @classmethod
    def from_state_dict(cls, state: dict) -> "Mlp":
        sizes = tuple(int(s) for s in np.asarray(state["sizes"]))
        net = cls.__new__(cls)
        net.sizes = sizes
        net.layers = [(np.array(state[f"w{i}"], dtype=float),
                       np.array(state[f"b{i}"], dtype=float))
                      for i in range(len(sizes) - 1)]
        return net


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _leaky(z: np.ndarray) -> np.ndarray:
    return np.where(z > 0, z, LEAKY_SLOPE * z)


def bce_loss_and_grad(net: Mlp, batch_x: np.ndarray, batch_y: np.ndarray):
    """Binary cross entropy of a batch and its gradient in every parameter.

    Log arguments are clamped away from 0 and 1; clamped entries contribute a
    constant to the loss and therefore a zero gradient.  The loss is averaged
    over batch rows and output entries.  Returns (loss, grads) with grads a
    list of (dw, db) matching net.layers.
    """
    batch_x = np.atleast_2d(np.asarray(batch_x, dtype=float))
    batch_y = np.atleast_2d(np.asarray(batch_y, dtype=float))
    activations, pre = net.forward_cached(batch_x)
    probs = activations[-1]
    clipped = np.clip(probs, CLIP_EPS, 1.0 - CLIP_EPS)
    loss = float(-np.mean(batch_y * np.log(clipped) +
                          (1.0 - batch_y) * np.log1p(-clipped)))

    denom = probs.size
    live = (probs > CLIP_EPS) & (probs < 1.0 - CLIP_EPS)
    delta = np.where(live, probs - batch_y, 0.0) / denom

    grads = [None] * len(net.layers)
    for i in range(len(net.layers) - 1, -1, -1):
        a_prev = activations[i]
        grads[i] = (a_prev.T @ delta, delta.sum(axis=0))
        if i > 0:
            w, _ = net.layers[i]
            delta = (delta @ w.T) * np.where(pre[i - 1] > 0, 1.0, LEAKY_SLOPE)
    return loss, grads


@dataclass
class AdamState:
    """First and second moment accumulators, one pair per parameter array."""

    m: list = field(default_factory=list)
    v: list = field(default_factory=list)
    t: int = 0

    @classmethod
    def for_net(cls, net: Mlp) -> "AdamState":
        state = cls()
        for w, b in net.layers:
            state.m.extend([np.zeros_like(w), np.zeros_like(b)])
            state.v.extend([np.zeros_like(w), np.zeros_like(b)])
        return state

    def state_dict(self) -> dict:
        out = {"t": np.asarray(self.t)}
        for i, (m, v) in enumerate(zip(self.m, self.v)):
            out[f"m{i}"] = m
            out[f"v{i}"] = v
        return out

    @classmethod
    def from_state_dict(cls, state: dict) -> "AdamState":
        n = sum(1 for key in state if key.startswith("m") and key != "m")
        return cls(m=[np.array(state[f"m{i}"], dtype=float) for i in range(n)],
                   v=[np.array(state[f"v{i}"], dtype=float) for i in range(n)],
                   t=int(state["t"]))


def adam_step(net: Mlp, grads, state: AdamState, lr: float = 1e-3,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> None:
    """Apply one bias-corrected ADAM update to the network in place."""
    state.t += 1
    bc1 = 1.0 - beta1 ** state.t
    bc2 = 1.0 - beta2 ** state.t
    flat_grads = [g for pair in grads for g in pair]
    flat_params = [p for pair in net.layers for p in pair]
    for p, g, m, v in zip(flat_params, flat_grads, state.m, state.v):
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
