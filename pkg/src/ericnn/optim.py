"""Adam optimizer with bias correction.

One AdamState per parameter tensor; a step updates the parameters in place.
The network-level Adam wrapper walks its slots in fixed layer order so runs
are byte-reproducible.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, ShapeError


@dataclass
class AdamState:
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: np.ndarray | None = None
    v: np.ndarray | None = None


def adam_step(state, params, grads, name="parameter"):
    """Advance one parameter tensor by one Adam step, in place."""
    grads = np.asarray(grads)
    if grads.shape != params.shape:
        raise ShapeError(
            f"gradient shape {grads.shape} != parameter shape {params.shape} for {name}"
        )
    if not np.isfinite(grads).all():
        raise NumericError(f"non-finite gradient for {name}")
    if state.m is None:
        state.m = np.zeros_like(params)
        state.v = np.zeros_like(params)
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads * grads
    m_hat = state.m / (1.0 - state.beta1 ** state.t)
    v_hat = state.v / (1.0 - state.beta2 ** state.t)
    params -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return params


class Adam:
    """Per-parameter Adam slots keyed by name, stepped in insertion order."""

    def __init__(self, lr=1e-4, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.slots = {}

    def step(self, named_grads):
        """named_grads: iterable of (name, params, grads) in fixed order."""
        for name, params, grads in named_grads:
            state = self.slots.get(name)
            if state is None:
                state = AdamState(self.lr, self.beta1, self.beta2, self.eps)
                self.slots[name] = state
            adam_step(state, params, grads, name=name)
