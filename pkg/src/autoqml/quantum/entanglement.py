"""Meyer-Wallach entangling capability of a parametrized template."""

import numpy as np

from ..errors import SingleQubit
from .circuits import CircuitTemplate
from .statevector import StateVector, apply_circuit


def meyer_wallach(state: StateVector) -> float:
    """Q = 2 (1 - mean_q Tr rho_q^2) of a pure state."""
    n = state.num_qubits
    if n < 2:
        raise SingleQubit("Meyer-Wallach measure needs at least two qubits")
    psi = state.amplitudes
    purity_sum = 0.0
    for q in range(n):
        t = psi.reshape(2 ** (n - 1 - q), 2, 2 ** q)
        m = np.moveaxis(t, 1, 0).reshape(2, -1)
        rho = m @ m.conj().T
        purity_sum += float(np.sum(np.abs(rho) ** 2))
    q_value = 2.0 * (1.0 - purity_sum / n)
    # rounding can push product states a hair below zero
    return min(max(q_value, 0.0), 1.0)


def entangling_capability(template: CircuitTemplate, n_param_samples: int = 200,
                          rng: np.random.Generator = None) -> float:
    """Mean Meyer-Wallach Q of ``U(theta)|0...0>`` over ``theta ~ U[-pi, pi)``."""
    if template.num_qubits < 2:
        raise SingleQubit("entangling capability is undefined for one qubit")
    if n_param_samples < 1:
        raise ValueError("n_param_samples must be >= 1")
    if rng is None:
        rng = np.random.default_rng()
    if template.num_entanglers == 0:
        # product input, single-qubit gates only: Q is exactly zero
        return 0.0
    zero = StateVector.zero(template.num_qubits)
    values = [
        meyer_wallach(apply_circuit(zero, template, rng.uniform(-np.pi, np.pi, template.num_params)))
        for _ in range(n_param_samples)
    ]
    return float(np.mean(values))
