"""Rewrite templates into the {RZ, SX, CX} basis on a linear qubit chain.

The rewrite is fixed, with no optimisation passes:

* ``RY(t)  -> RZ(0) SX RZ(t + pi) SX RZ(pi)``   (time order, equal up to phase)
* ``H      -> RZ(pi/2) SX RZ(pi/2)``
* ``X      -> SX SX``
* ``CZ     -> H(t) CX H(t)`` with the H gates expanded as above
* ``SWAP   -> CX(a,b) CX(b,a) CX(a,b)``

Two-qubit gates between qubits that are not neighbours on the chain are
routed greedily: the first qubit is SWAPped one step at a time towards the
second until they touch. The layout is not restored afterwards, so later
gates see the permuted placement.

Depth counts ASAP layers; gates on disjoint qubits share a layer.
"""

from __future__ import annotations

import numpy as np

from .circuits import CircuitTemplate, GateOp, bind

HALF_PI = np.pi / 2


def _h(q):
    return [GateOp("RZ", q, angle=HALF_PI), GateOp("SX", q), GateOp("RZ", q, angle=HALF_PI)]


def _swap(a, b):
    return [GateOp("CX", b, control=a), GateOp("CX", a, control=b), GateOp("CX", b, control=a)]


def _single(op: GateOp, q: int) -> list:
    if op.kind == "RZ":
        return [GateOp("RZ", q, angle=op.angle)]
    if op.kind == "SX":
        return [GateOp("SX", q)]
    if op.kind == "X":
        return [GateOp("SX", q), GateOp("SX", q)]
    if op.kind == "H":
        return _h(q)
    if op.kind == "RY":
        return [
            GateOp("RZ", q, angle=0.0),
            GateOp("SX", q),
            GateOp("RZ", q, angle=op.angle + np.pi),
            GateOp("SX", q),
            GateOp("RZ", q, angle=np.pi),
        ]
    raise ValueError(f"not a single-qubit gate: {op.kind}")


def transpile(template: CircuitTemplate, params=None):
    """Basis-gate rewrite of ``template`` bound at ``params`` (zeros if omitted).

    Returns ``(ops, layout)`` where ``ops`` act on physical chain positions
    and ``layout[logical] == physical`` after the last gate.
    """
    if params is None:
        params = np.zeros(template.num_params)
    bound = bind(template, params)
    n = template.num_qubits
    layout = list(range(n))
    out = []
    for op in bound.ops:
        if op.control is None:
            out.extend(_single(op, layout[op.target]))
            continue
        first, second = op.control, op.target
        while abs(layout[first] - layout[second]) > 1:
            here = layout[first]
            step = here + (1 if layout[second] > here else -1)
            out.extend(_swap(here, step))
            other = layout.index(step)
            layout[first], layout[other] = step, here
        pc, pt = layout[op.control], layout[op.target]
        if op.kind == "CX":
            out.append(GateOp("CX", pt, control=pc))
        elif op.kind == "CZ":
            out.extend(_h(pt) + [GateOp("CX", pt, control=pc)] + _h(pt))
        else:
            out.extend(_swap(pc, pt))
    return out, layout


def circuit_depth(ops, num_qubits: int) -> int:
    frontier = [0] * num_qubits
    for op in ops:
        layer = max(frontier[q] for q in op.qubits) + 1
        for q in op.qubits:
            frontier[q] = layer
    return max(frontier, default=0)


def transpile_depth(template: CircuitTemplate) -> int:
    """Layer count of ``template`` after basis rewrite and chain routing."""
    ops, _ = transpile(template)
    return circuit_depth(ops, template.num_qubits)
