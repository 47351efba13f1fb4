"""Gate lists and the parametrized Ansatz families used as qGAN generators.

Three families are available:

``zoufal``
    RY layer on every qubit, then ``k`` repetitions of a CZ entangler block
    followed by another RY layer. The entangler is a ring ``(q, q+1 mod N)``
    for ``N >= 3``, a single ``CZ(0, 1)`` for ``N == 2`` and empty for one
    qubit. ``N * (k + 1)`` parameters.
``vallecorsa``
    RY+RZ on every qubit, then ``k`` repetitions of a linear CX chain
    ``(q, q+1)`` followed by another RY+RZ layer. ``2N * (k + 1)`` parameters.
``herr_1``
    RY layer, then ``k`` repetitions of all-to-all CZ followed by an RY layer.
    ``N * (k + 1)`` parameters.

The last two are project-defined stand-ins; their names are kept so search
configurations written for the original tooling still parse.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

from ..errors import ParamLengthMismatch, QubitCountOutOfRange, UnknownFamily

MAX_QUBITS = 12

SINGLE_QUBIT_KINDS = frozenset({"H", "X", "SX", "RY", "RZ"})
TWO_QUBIT_KINDS = frozenset({"CX", "CZ", "SWAP"})
ROTATION_KINDS = frozenset({"RY", "RZ"})
FAMILIES = ("zoufal", "vallecorsa", "herr_1")


@dataclass(frozen=True)
class GateOp:
    """One gate. Rotations carry either a fixed ``angle`` or a ``param`` slot.

    For CX, ``control`` is the control qubit. CZ and SWAP are symmetric and
    use ``control`` as the second qubit.
    """

    kind: str
    target: int
    control: Optional[int] = None
    angle: Optional[float] = None
    param: Optional[int] = None

    def __post_init__(self):
        if self.kind not in SINGLE_QUBIT_KINDS | TWO_QUBIT_KINDS:
            raise ValueError(f"unsupported gate kind {self.kind!r}")
        if self.kind in TWO_QUBIT_KINDS:
            if self.control is None:
                raise ValueError(f"{self.kind} needs a second qubit")
            if self.control == self.target:
                raise ValueError("control and target must differ")
        elif self.control is not None:
            raise ValueError(f"{self.kind} takes no control qubit")
        if self.kind in ROTATION_KINDS:
            if (self.angle is None) == (self.param is None):
                raise ValueError(f"{self.kind} needs exactly one of angle or param")
        elif self.angle is not None or self.param is not None:
            raise ValueError(f"{self.kind} takes no angle")

    @property
    def qubits(self) -> tuple:
        if self.control is None:
            return (self.target,)
        return (self.control, self.target)


@dataclass(frozen=True)
class AnsatzDescriptor:
    family: str
    num_qubits: int
    repetitions: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UnknownFamily(f"unknown Ansatz family {self.family!r}; expected one of {FAMILIES}")
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise QubitCountOutOfRange(
                f"num_qubits={self.num_qubits} outside [1, {MAX_QUBITS}]")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


def parameter_count(family: str, num_qubits: int, repetitions: int) -> int:
    if family not in FAMILIES:
        raise UnknownFamily(family)
    per_layer = 2 * num_qubits if family == "vallecorsa" else num_qubits
    return per_layer * (repetitions + 1)


@dataclass(frozen=True)
class CircuitTemplate:
    num_qubits: int
    ops: tuple
    num_params: int
    descriptor: Optional[AnsatzDescriptor] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        seen = []
        for op in self.ops:
            for q in op.qubits:
                if not 0 <= q < self.num_qubits:
                    raise ValueError(f"qubit {q} outside register of {self.num_qubits}")
            if op.param is not None:
                seen.append(op.param)
        if sorted(seen) != list(range(self.num_params)):
            raise ValueError("every parameter slot must appear exactly once")

    def __len__(self):
        return len(self.ops)

    @property
    def num_entanglers(self) -> int:
        return sum(op.kind in TWO_QUBIT_KINDS for op in self.ops)


def _entangler_pairs(family: str, n: int) -> list:
    if n == 1:
        return []
    if family == "zoufal":
        if n == 2:
            return [(0, 1)]
        return [(q, (q + 1) % n) for q in range(n)]
    if family == "vallecorsa":
        return [(q, q + 1) for q in range(n - 1)]
    return list(combinations(range(n), 2))


def build_ansatz(descriptor: AnsatzDescriptor) -> CircuitTemplate:
    """Expand a descriptor into its gate list."""
    n, k, family = descriptor.num_qubits, descriptor.repetitions, descriptor.family
    ops = []
    slot = 0

    def rotation_layer():
        nonlocal slot
        for q in range(n):
            ops.append(GateOp("RY", q, param=slot))
            slot += 1
            if family == "vallecorsa":
                ops.append(GateOp("RZ", q, param=slot))
                slot += 1

    entangler = "CX" if family == "vallecorsa" else "CZ"
    rotation_layer()
    for _ in range(k):
        for c, t in _entangler_pairs(family, n):
            ops.append(GateOp(entangler, t, control=c))
        rotation_layer()
    assert slot == parameter_count(family, n, k)
    return CircuitTemplate(n, ops, slot, descriptor)


def bind(template: CircuitTemplate, params) -> CircuitTemplate:
    """Replace every parameter slot by its numeric angle."""
    if len(params) != template.num_params:
        raise ParamLengthMismatch(
            f"expected {template.num_params} parameters, got {len(params)}")
    ops = [
        GateOp(op.kind, op.target, angle=float(params[op.param])) if op.param is not None else op
        for op in template.ops
    ]
    return CircuitTemplate(template.num_qubits, ops, 0)


def inverse_template(template: CircuitTemplate, params=()) -> CircuitTemplate:
    """Exact inverse of ``template`` bound at ``params``.

    Gate order is reversed and rotation angles negated; SX is replaced by
    SX^3 so the result stays within the same gate set.
    """
    bound = bind(template, params)
    ops = []
    for op in reversed(bound.ops):
        if op.kind in ROTATION_KINDS:
            ops.append(GateOp(op.kind, op.target, angle=-op.angle))
        elif op.kind == "SX":
            ops.extend([op, op, op])
        else:
            ops.append(op)
    return CircuitTemplate(template.num_qubits, ops, 0)


def custom_template(num_qubits: int, ops: Sequence[GateOp]) -> CircuitTemplate:
    """Template from a hand-written gate list; slot count inferred."""
    num_params = sum(op.param is not None for op in ops)
    return CircuitTemplate(num_qubits, tuple(ops), num_params)
