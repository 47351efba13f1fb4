"""Quantum generator: output distribution, loss and parameter-shift gradient."""

import numpy as np

from ..errors import ParamLengthMismatch
from ..quantum import CircuitTemplate, StateVector, analytic_probabilities, apply_circuit, map_to_range
from .discriminator import PROB_CLAMP, DiscriminatorNet, disc_forward_batch

SHIFT = np.pi / 2


def evaluations_per_gradient(template: CircuitTemplate) -> int:
    """Circuit evaluations charged for one loss-and-gradient call."""
    return 1 + 2 * template.num_params


def generator_probabilities(template: CircuitTemplate, init_state: StateVector, params) -> np.ndarray:
    return analytic_probabilities(apply_circuit(init_state, template, params))


def _check(template, params):
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.size != template.num_params:
        raise ParamLengthMismatch(f"expected {template.num_params} parameters, got {params.size}")
    return params


def expected_loss_and_grad(template: CircuitTemplate, init_state: StateVector, params, log_d, probs=None):
    """``L(theta) = -sum_x p_theta(x) log_d[x]`` and its exact gradient.

    Each slot holds a single RY or RZ rotation, so
    ``dp/dtheta_j = (p(theta + pi/2 e_j) - p(theta - pi/2 e_j)) / 2``.
    ``probs`` may carry an already computed ``p_theta`` to save one evaluation.
    """
    params = _check(template, params)
    log_d = np.asarray(log_d, dtype=float)
    if probs is None:
        probs = generator_probabilities(template, init_state, params)
    loss = -float(probs @ log_d)
    # sum_x dp/dtheta = 0, so a constant offset in log_d cannot change the
    # gradient; removing it makes a flat discriminator give exactly zero
    centered = log_d - log_d[0]
    grad = np.empty(params.size)
    for j in range(params.size):
        shifted = params.copy()
        shifted[j] += SHIFT
        plus = generator_probabilities(template, init_state, shifted)
        shifted[j] -= 2 * SHIFT
        minus = generator_probabilities(template, init_state, shifted)
        grad[j] = -0.5 * float((plus - minus) @ centered)
    return loss, grad


def log_discriminator_on_grid(net: DiscriminatorNet, a: float, b: float, num_qubits: int) -> np.ndarray:
    """``log D(phi(x))`` for every basis index ``x``, clamped away from -inf."""
    values = map_to_range(np.arange(2 ** num_qubits), a, b, num_qubits)
    return np.log(np.clip(disc_forward_batch(net, values), PROB_CLAMP, 1.0))


def generator_loss_and_grad(template: CircuitTemplate, init_state: StateVector, params,
                            net: DiscriminatorNet, a: float, b: float):
    """Analytic non-saturating generator loss and its parameter-shift gradient.

    Costs ``evaluations_per_gradient(template)`` circuit evaluations.
    """
    _check(template, params)
    log_d = log_discriminator_on_grid(net, a, b, template.num_qubits)
    return expected_loss_and_grad(template, init_state, params, log_d)
