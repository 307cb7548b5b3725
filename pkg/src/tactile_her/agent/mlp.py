"""Fully connected network with ReLU hidden layers and hand-written backprop."""
from __future__ import annotations

import numpy as np

from ..errors import UsageError

OUTPUTS = ("identity", "tanh")


class Mlp:
    """Row-major MLP: ``x`` has shape (batch, in), weights have shape (in, out)."""

    def __init__(self, sizes, output="identity", rng=None, final_scale=3e-3):
        if output not in OUTPUTS:
            raise UsageError(f"unknown output activation {output!r}")
        if len(sizes) < 2:
            raise UsageError("need at least input and output sizes")
        self.sizes = tuple(int(s) for s in sizes)
        self.output = output
        rng = np.random.default_rng(0) if rng is None else rng
        self.weights = []
        self.biases = []
        n = len(self.sizes) - 1
        for i, (fan_in, fan_out) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            # uniform fan-in init; small last layer keeps initial outputs near zero
            bound = final_scale if i == n - 1 else 1.0 / np.sqrt(fan_in)
            self.weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            self.biases.append(rng.uniform(-bound, bound, size=fan_out) if i < n - 1 else np.zeros(fan_out))

    @property
    def params(self) -> list:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    @property
    def n_params(self) -> int:
        return sum(p.size for p in self.params)

    def copy(self) -> "Mlp":
        other = Mlp.__new__(Mlp)
        other.sizes = self.sizes
        other.output = self.output
        other.weights = [w.copy() for w in self.weights]
        other.biases = [b.copy() for b in self.biases]
        return other

    def get_flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params])

    def set_flat(self, flat) -> None:
        flat = np.asarray(flat, dtype=float)
        if flat.size != self.n_params:
            raise UsageError(f"expected {self.n_params} parameters, got {flat.size}")
        i = 0
        for p in self.params:
            p[...] = flat[i:i + p.size].reshape(p.shape)
            i += p.size

    def forward(self, x):
        """Return ``(y, cache)``; ``cache[-1]`` is the output pre-activation."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.sizes[0]:
            raise UsageError(f"input width {x.shape[1]} != {self.sizes[0]}")
        acts = [x]
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            if i < last:
                h = np.maximum(z, 0.0)
                acts.append(h)
        y = np.tanh(z) if self.output == "tanh" else z
        return y, (acts, z)

    def __call__(self, x):
        return self.forward(x)[0]

    def backward(self, cache, dz_out):
        """Backprop a gradient w.r.t. the output PRE-activation.

        Returns ``(grads, dx)`` where ``grads`` aligns with :attr:`params`.
        """
        acts, _ = cache
        grads = [None] * (2 * len(self.weights))
        dz = dz_out
        for i in range(len(self.weights) - 1, -1, -1):
            h = acts[i]
            grads[2 * i] = h.T @ dz
            grads[2 * i + 1] = dz.sum(axis=0)
            dh = dz @ self.weights[i].T
            if i > 0:
                dz = dh * (acts[i] > 0)
        return grads, dh

    def backward_output(self, cache, dy):
        """Backprop a gradient w.r.t. the activated output."""
        _, z = cache
        if self.output == "tanh":
            dy = dy * (1.0 - np.tanh(z) ** 2)
        return self.backward(cache, dy)

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(p)) for p in self.params)


def soft_update(target: Mlp, online: Mlp, tau: float) -> None:
    """Polyak averaging ``target <- (1 - tau) target + tau online`` in place."""
    if target.sizes != online.sizes:
        raise UsageError(f"shape mismatch {target.sizes} vs {online.sizes}")
    for tp, op in zip(target.params, online.params):
        tp *= 1.0 - tau
        tp += tau * op


class Sgd:
    def __init__(self, params, lr):
        self.params = params
        self.lr = lr

    def step(self, grads):
        for p, g in zip(self.params, grads):
            p -= self.lr * g


class Adam:
    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr = lr
        self.b1, self.b2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.k = 0

    def step(self, grads):
        self.k += 1
        c1 = 1.0 - self.b1 ** self.k
        c2 = 1.0 - self.b2 ** self.k
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


OPTIMIZERS = {"sgd": Sgd, "adam": Adam}
