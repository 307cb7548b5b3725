from __future__ import annotations

import numpy as np


class Normalizer:
    """Running per-dimension mean/std with a clipped standardization.

    Statistics change only through :meth:`update`; :meth:`normalize` is a pure
    function of the current statistics.
    """

    def __init__(self, size, clip=5.0, eps=1e-2):
        self.size = size
        self.clip = clip
        self.eps = eps
        self.count = 0
        self.sum = np.zeros(size)
        self.sumsq = np.zeros(size)

    def update(self, x):
        x = np.asarray(x, dtype=float).reshape(-1, self.size)
        self.count += x.shape[0]
        self.sum += x.sum(axis=0)
        self.sumsq += (x * x).sum(axis=0)

    @property
    def mean(self):
        if self.count == 0:
            return np.zeros(self.size)
        return self.sum / self.count

    @property
    def std(self):
        if self.count == 0:
            return np.ones(self.size)
        var = self.sumsq / self.count - self.mean ** 2
        return np.sqrt(np.maximum(self.eps ** 2, var))

    def normalize(self, x):
        return np.clip((np.asarray(x, dtype=float) - self.mean) / self.std, -self.clip, self.clip)

    def state(self) -> dict:
        return {"count": np.array([float(self.count)]), "sum": self.sum.copy(), "sumsq": self.sumsq.copy()}

    def load_state(self, d):
        self.count = int(d["count"][0])
        self.sum = np.array(d["sum"], dtype=float)
        self.sumsq = np.array(d["sumsq"], dtype=float)
