"""Dense statevector simulation, initial states and Born sampling.

Basis index convention: qubit 0 is the least significant bit, so the basis
state ``|q_{N-1} ... q_1 q_0>`` has index ``sum_q q_q 2**q``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import DegenerateRange, NonPositiveStd, ParamLengthMismatch, QubitCountOutOfRange
from .circuits import MAX_QUBITS, CircuitTemplate, GateOp

SQRT_HALF = 1.0 / np.sqrt(2.0)

_FIXED_GATES = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * SQRT_HALF,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "SX": 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]),
}


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def gate_matrix(kind: str, angle: Optional[float] = None) -> np.ndarray:
    """2x2 unitary of a single-qubit gate."""
    if kind == "RY":
        return ry_matrix(angle)
    if kind == "RZ":
        return rz_matrix(angle)
    return _FIXED_GATES[kind]


@dataclass(frozen=True, eq=False)
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2 ** self.num_qubits:
            raise ValueError(
                f"expected {2 ** self.num_qubits} amplitudes for {self.num_qubits} qubits, got {amps.size}")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, num_qubits: int) -> "StateVector":
        amps = np.zeros(2 ** num_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(num_qubits, amps)

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> "StateVector":
        amps = np.zeros(2 ** num_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(num_qubits, amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __len__(self):
        return self.amplitudes.size


@dataclass(frozen=True)
class InitStrategy:
    """How the register is prepared before the Ansatz.

    ``normal`` falls back to the target data's mean/std (in bin-index units)
    when ``mean``/``std`` are left unset. ``random`` draws from the caller's
    generator unless ``seed`` pins it.
    """

    kind: str
    mean: Optional[float] = None
    std: Optional[float] = None
    seed: Optional[int] = None

    KINDS = ("uniform", "normal", "random")

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in self.KINDS:
            raise ValueError(f"unknown initialization {self.kind!r}; expected one of {self.KINDS}")
        object.__setattr__(self, "kind", kind)


def _check_qubits(n: int):
    if not 1 <= n <= MAX_QUBITS:
        raise QubitCountOutOfRange(f"num_qubits={n} outside [1, {MAX_QUBITS}]")


def prepare_initial_state(strategy: InitStrategy, num_qubits: int, data_mean: float = 0.0,
                          data_std: float = 1.0, rng: Optional[np.random.Generator] = None) -> StateVector:
    """Build the generator's input state for ``strategy``.

    ``uniform`` is the equal superposition. ``normal`` injects the square
    root of a Gaussian evaluated on the bin indices ``0..2**N-1`` and
    renormalized. ``random`` is a product of per-qubit ``RY(theta)|0>`` with
    ``theta ~ U[-pi, pi)``.
    """
    _check_qubits(num_qubits)
    dim = 2 ** num_qubits
    if strategy.kind == "uniform":
        return StateVector(num_qubits, np.full(dim, dim ** -0.5, dtype=complex))
    if strategy.kind == "normal":
        mean = data_mean if strategy.mean is None else strategy.mean
        std = data_std if strategy.std is None else strategy.std
        if not std > 0:
            raise NonPositiveStd(f"normal initialization needs std > 0, got {std}")
        x = np.arange(dim, dtype=float)
        logp = -0.5 * ((x - mean) / std) ** 2
        pmf = np.exp(logp - logp.max())
        pmf /= pmf.sum()
        return StateVector(num_qubits, np.sqrt(pmf).astype(complex))
    if strategy.seed is not None:
        rng = np.random.default_rng(strategy.seed)
    elif rng is None:
        raise ValueError("random initialization needs a generator or a seed")
    thetas = rng.uniform(-np.pi, np.pi, size=num_qubits)
    amps = np.ones(1, dtype=complex)
    # kron builds the most significant qubit first
    for theta in thetas[::-1]:
        amps = np.kron(amps, ry_matrix(theta)[:, 0])
    return StateVector(num_qubits, amps)


def _apply_single(psi: np.ndarray, n: int, q: int, u: np.ndarray) -> np.ndarray:
    t = psi.reshape(2 ** (n - 1 - q), 2, 2 ** q)
    return np.einsum("ab,ibj->iaj", u, t).reshape(-1)


def _apply_op(psi: np.ndarray, n: int, op: GateOp, angle: Optional[float], idx: np.ndarray) -> np.ndarray:
    if op.control is None:
        return _apply_single(psi, n, op.target, gate_matrix(op.kind, angle))
    c, t = op.control, op.target
    cbit = (idx >> c) & 1
    if op.kind == "CZ":
        sign = 1 - 2 * (cbit & (idx >> t) & 1)
        return psi * sign
    if op.kind == "CX":
        return psi[idx ^ (cbit << t)]
    # SWAP: exchange bits c and t
    diff = cbit ^ ((idx >> t) & 1)
    return psi[idx ^ (diff << c) ^ (diff << t)]


def run_ops(psi: np.ndarray, n: int, ops, params=()) -> np.ndarray:
    """Apply ``ops`` to a raw amplitude array; returns a new array."""
    idx = np.arange(2 ** n)
    out = np.array(psi, dtype=complex)
    for op in ops:
        angle = op.angle if op.param is None else params[op.param]
        out = _apply_op(out, n, op, angle, idx)
    return out


def apply_circuit(state: StateVector, template: CircuitTemplate, params=()) -> StateVector:
    """Return ``U(params) |state>``."""
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.size != template.num_params:
        raise ParamLengthMismatch(
            f"expected {template.num_params} parameters, got {params.size}")
    if template.num_qubits != state.num_qubits:
        raise ValueError("template and state qubit counts differ")
    return StateVector(state.num_qubits, run_ops(state.amplitudes, state.num_qubits, template.ops, params))


def analytic_probabilities(state: StateVector) -> np.ndarray:
    return np.abs(state.amplitudes) ** 2


def born_sample(state: StateVector, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Measure the whole register ``n_samples`` times; returns basis indices."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    p = analytic_probabilities(state)
    return rng.choice(p.size, size=n_samples, p=p / p.sum())


def map_to_range(x, a: float, b: float, num_qubits: int):
    """Affine map of basis index ``x`` onto ``[a, b]``.

    ``x = 0`` and ``x = 2**N - 1`` land on ``a`` and ``b`` exactly. Accepts
    scalars or integer arrays.
    """
    if not a < b:
        raise DegenerateRange(f"need a < b, got a={a}, b={b}")
    top = 2 ** num_qubits - 1
    xs = np.asarray(x)
    if np.any(xs < 0) or np.any(xs > top):
        raise ValueError(f"basis index outside [0, {top}]")
    xf = xs.astype(float)
    out = (a * (top - xf) + b * xf) / top
    out = np.where(xs == 0, a, np.where(xs == top, b, out))
    return float(out) if out.ndim == 0 else out
