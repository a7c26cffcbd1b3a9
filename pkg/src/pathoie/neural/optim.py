"""ADAM updates over named parameter dictionaries."""

from __future__ import annotations

import numpy as np


class AdamState:
    """First/second moment accumulators plus the shared step counter."""

    def __init__(self):
        self.m = {}
        self.v = {}
        self.t = 0

    def slot(self, key, like):
        if key not in self.m:
            self.m[key] = np.zeros_like(like)
            self.v[key] = np.zeros_like(like)
        return self.m[key], self.v[key]


def adam_step(params, grads, state: AdamState, learning_rate=0.001,
              beta1=0.9, beta2=0.999, eps=1e-8) -> None:
    """One bias-corrected ADAM step, in place, over the keys in ``grads``."""
    state.t += 1
    bc1 = 1.0 - beta1 ** state.t
    bc2 = 1.0 - beta2 ** state.t
    for key in sorted(grads):
        g = grads[key]
        m, v = state.slot(key, g)
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        params[key] -= learning_rate * (m / bc1) / (np.sqrt(v / bc2) + eps)
