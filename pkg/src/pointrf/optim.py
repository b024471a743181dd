"""Adam with named parameter groups, each with its own learning rate."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AdamState:
    first_moment: dict = field(default_factory=dict)
    second_moment: dict = field(default_factory=dict)
    step_count: int = 0


class Adam:
    def __init__(self, lrs, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lrs = dict(lrs)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.state = AdamState()

    def reset(self):
        self.state = AdamState()

    def step(self, params, grads):
        """Update ``params`` in place.  Groups missing from ``grads`` are left alone."""
        st = self.state
        st.step_count += 1
        t = st.step_count
        bc1 = 1.0 - self.beta1 ** t
        bc2 = 1.0 - self.beta2 ** t
        for name, g in grads.items():
            p = params[name]
            if name not in st.first_moment:
                st.first_moment[name] = np.zeros_like(p)
                st.second_moment[name] = np.zeros_like(p)
            m = st.first_moment[name]
            v = st.second_moment[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= (self.lrs[name] / bc1) * m / (np.sqrt(v / bc2) + self.eps)

    def keep_rows(self, index):
        """Drop moment rows for removed points (same selection as the cloud)."""
        st = self.state
        for store in (st.first_moment, st.second_moment):
            for name in store:
                store[name] = store[name][index]
