"""Portable model file (``.qmodel``).

A ``.qmodel`` is UTF-8 JSON with sorted keys and two-space indentation::

    {
      "format": "autoqml.qmodel",
      "version": 1,
      "ansatz": {"family": str, "num_qubits": int, "repetitions": int},
      "initialization": {"type": str, ...},
      "initial_amplitudes": [float, ...],      # 2**N real amplitudes
      "generator_params": [float, ...],        # one angle per parameter slot
      "data_range": [a, b],
      "discriminator": {
        "type": str, "hidden_sizes": [int, ...],
        "weights": [[[float]]], "biases": [[float]],  # per layer, (out, in)
        "input_shift": float, "input_scale": float
      },
      "training": {"spec_id": str, "run_index": int, "epochs_completed": int,
                   "final_re": float, "final_ks": float, "transpiled_depth": int,
                   "circuit_evaluations": int, "budget_exhausted": bool},
      "spec": {...}                           # the full grid point
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..quantum import (AnsatzDescriptor, CircuitTemplate, StateVector, analytic_probabilities, apply_circuit,
                       born_sample, build_ansatz, map_to_range)
from .discriminator import DiscriminatorNet

FORMAT = "autoqml.qmodel"
VERSION = 1


def dump_model(spec: dict, run: dict, low: float, high: float) -> bytes:
    """Serialize the generator/discriminator pair of one finished run."""
    hidden = spec["discriminator"]["n_hidden"]
    sizes = [1, *hidden, 1]
    template_net = DiscriminatorNet(
        [np.zeros((o, i)) for i, o in zip(sizes[:-1], sizes[1:])],
        [np.zeros(o) for o in sizes[1:]],
    )
    net = template_net.with_flat_params(run["final_discriminator_params"])
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "ansatz": {"family": spec["ansatz"], "num_qubits": spec["num_qubits"],
                   "repetitions": spec["repetitions"]},
        "initialization": spec["initialization"],
        "initial_amplitudes": list(run["initial_amplitudes"]),
        "generator_params": list(run["final_generator_params"]),
        "data_range": [float(low), float(high)],
        "discriminator": {
            "type": spec["discriminator"]["type"],
            "hidden_sizes": list(hidden),
            "weights": [w.tolist() for w in net.weights],
            "biases": [b.tolist() for b in net.biases],
            "input_shift": run["discriminator_input_shift"],
            "input_scale": run["discriminator_input_scale"],
        },
        "training": {k: run[k] for k in (
            "spec_id", "run_index", "epochs_completed", "final_re", "final_ks",
            "transpiled_depth", "circuit_evaluations", "budget_exhausted")},
        "spec": spec,
    }
    return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode()


@dataclass
class QModel:
    template: CircuitTemplate
    initial_state: StateVector
    params: np.ndarray
    discriminator: DiscriminatorNet
    low: float
    high: float
    document: dict

    @property
    def num_qubits(self) -> int:
        return self.template.num_qubits

    def probabilities(self) -> np.ndarray:
        return analytic_probabilities(apply_circuit(self.initial_state, self.template, self.params))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """``n`` generated values in data units."""
        state = apply_circuit(self.initial_state, self.template, self.params)
        return map_to_range(born_sample(state, n, rng), self.low, self.high, self.num_qubits)


def load_model(data: bytes) -> QModel:
    doc = json.loads(data)
    if doc.get("format") != FORMAT:
        raise ValueError("not an autoqml model file")
    if doc.get("version") != VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')}")
    a = doc["ansatz"]
    template = build_ansatz(AnsatzDescriptor(a["family"], a["num_qubits"], a["repetitions"]))
    d = doc["discriminator"]
    net = DiscriminatorNet([np.array(w, dtype=float) for w in d["weights"]],
                           [np.array(b, dtype=float) for b in d["biases"]],
                           d["input_shift"], d["input_scale"])
    low, high = doc["data_range"]
    return QModel(template, StateVector(a["num_qubits"], np.array(doc["initial_amplitudes"])),
                  np.array(doc["generator_params"], dtype=float), net, low, high, doc)
