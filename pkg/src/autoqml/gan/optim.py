from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..errors import LengthMismatch


@dataclass
class AdamState:
    """Moment estimates for one parameter vector. Mutated by ``adam_step``."""

    lr: float
    betas: Tuple[float, float]
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    eps: float = 1e-8

    @classmethod
    def create(cls, size: int, lr: float, betas=(0.9, 0.999), eps: float = 1e-8) -> "AdamState":
        return cls(lr, tuple(betas), np.zeros(size), np.zeros(size), 0, eps)


def adam_step(state: AdamState, params, grads) -> np.ndarray:
    """One bias-corrected Adam update; returns the new parameters."""
    params = np.asarray(params, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if params.shape != grads.shape or params.shape != state.m.shape:
        raise LengthMismatch(
            f"params {params.shape}, grads {grads.shape}, state {state.m.shape} must match")
    b1, b2 = state.betas
    state.step += 1
    state.m = b1 * state.m + (1 - b1) * grads
    state.v = b2 * state.v + (1 - b2) * grads ** 2
    m_hat = state.m / (1 - b1 ** state.step)
    v_hat = state.v / (1 - b2 ** state.step)
    return params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
