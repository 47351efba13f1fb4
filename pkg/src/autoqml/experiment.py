"""One point of the hyperparameter grid."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .gan.discriminator import DiscriminatorSpec
from .quantum import AnsatzDescriptor, InitStrategy


@dataclass(frozen=True)
class ExperimentSpec:
    distribution_index: int
    data_path: str
    samples: int
    discretization: str
    ansatz: str
    repetitions: int
    initialization: InitStrategy
    num_qubits: int
    discriminator: DiscriminatorSpec
    generator_lr: float
    generator_betas: Tuple[float, float]
    batch_size: int
    num_epochs: int
    num_training_runs: int
    spec_id: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "generator_betas", tuple(float(b) for b in self.generator_betas))
        if not self.spec_id:
            object.__setattr__(self, "spec_id", _stable_id(self._identity()))

    @property
    def descriptor(self) -> AnsatzDescriptor:
        return AnsatzDescriptor(self.ansatz, self.num_qubits, self.repetitions)

    def _identity(self) -> dict:
        d = self.to_dict()
        d.pop("spec_id")
        return d

    def to_dict(self) -> dict:
        init = {"type": self.initialization.kind}
        for key in ("mean", "std", "seed"):
            value = getattr(self.initialization, key)
            if value is not None:
                init[key] = value
        return {
            "spec_id": self.spec_id,
            "distribution_index": self.distribution_index,
            "data_path": self.data_path,
            "samples": self.samples,
            "discretization": self.discretization,
            "ansatz": self.ansatz,
            "repetitions": self.repetitions,
            "initialization": init,
            "num_qubits": self.num_qubits,
            "discriminator": {
                "type": self.discriminator.type_name,
                "n_hidden": list(self.discriminator.hidden_sizes),
                "lr": self.discriminator.learning_rate,
                "betas": list(self.discriminator.betas),
            },
            "generator_lr": self.generator_lr,
            "generator_betas": list(self.generator_betas),
            "batch_size": self.batch_size,
            "num_epochs": self.num_epochs,
            "num_training_runs": self.num_training_runs,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        init = dict(d["initialization"])
        disc = d["discriminator"]
        spec = cls(
            distribution_index=d["distribution_index"],
            data_path=d["data_path"],
            samples=d["samples"],
            discretization=d["discretization"],
            ansatz=d["ansatz"],
            repetitions=d["repetitions"],
            initialization=InitStrategy(init.pop("type"), **init),
            num_qubits=d["num_qubits"],
            discriminator=DiscriminatorSpec(disc["type"], tuple(disc["n_hidden"]), disc["lr"], tuple(disc["betas"])),
            generator_lr=d["generator_lr"],
            generator_betas=tuple(d["generator_betas"]),
            batch_size=d["batch_size"],
            num_epochs=d["num_epochs"],
            num_training_runs=d["num_training_runs"],
        )
        if d.get("spec_id") and d["spec_id"] != spec.spec_id:
            raise ValueError(f"spec_id {d['spec_id']} does not match its fields ({spec.spec_id})")
        return spec

    @property
    def label(self) -> str:
        return f"{self.ansatz} k={self.repetitions} N={self.num_qubits} init={self.initialization.kind}"


def _stable_id(payload: dict, length: int = 12) -> str:
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:length]


def run_seed(spec_id: str, run_index: int, master_seed: int):
    """Seed sequence for one training run, independent of scheduling."""
    return np.random.SeedSequence([int(master_seed), int(spec_id, 16), int(run_index)])
