import json
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from autoqml.experiment import ExperimentSpec
from autoqml.gan.discriminator import DiscriminatorSpec
from autoqml.gan.training import RunResult
from autoqml.metrics import AggregateStats
from autoqml.quantum import InitStrategy, parameter_count

settings.register_profile("ci", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIGS = os.path.join(ROOT, "configs")

# (initialization, k, mu_ks, sigma_ks, mu_re, sigma_re, mu_depth), 5-qubit zoufal
REFERENCE_TABLE = [
    ("uniform", 1, 0.1780, 0.0519, 0.5692, 0.1325, 41.18),
    ("uniform", 2, 0.1104, 0.0470, 0.3562, 0.0947, 77.09),
    ("uniform", 3, 0.1540, 0.0807, 0.4329, 0.2479, 104.52),
    ("normal", 1, 0.1570, 0.0389, 0.2793, 0.0269, 203.42),
    ("normal", 2, 0.1446, 0.0531, 0.2434, 0.0383, 238.38),
    ("normal", 3, 0.1516, 0.0305, 0.2510, 0.0343, 271.2),
    ("random", 1, 0.3420, 0.1676, 1.1412, 0.6072, 33.75),
    ("random", 2, 0.1992, 0.0970, 0.7595, 0.3290, 74.55),
    ("random", 3, 0.1536, 0.1034, 0.5494, 0.4724, 101.89),
]
REFERENCE_RUNS = 100


def reference_spec(init: str, k: int) -> ExperimentSpec:
    return ExperimentSpec(
        distribution_index=0, data_path="synthetic:0", samples=20000, discretization="optimal",
        ansatz="zoufal", repetitions=k, initialization=InitStrategy(init), num_qubits=5,
        discriminator=DiscriminatorSpec.named("custom_classical_1"), generator_lr=1e-3,
        generator_betas=(0.7, 0.99), batch_size=512, num_epochs=2000, num_training_runs=REFERENCE_RUNS,
    )


def reference_stats():
    return [AggregateStats(f"{init}-k{k}", ks, sks, re, sre, depth, 0.0, 10)
            for init, k, ks, sks, re, sre, depth in REFERENCE_TABLE]


def reference_records():
    """Raw run records whose per-spec aggregates reproduce the reference table.

    Half the runs sit at mu+sigma and half at mu-sigma (population std =
    sigma); integer depths are mixed so their mean is the tabulated value.
    """
    records = []
    for init, k, ks, sks, re, sre, depth in REFERENCE_TABLE:
        spec = reference_spec(init, k)
        n_ceil = int(round((depth - np.floor(depth)) * REFERENCE_RUNS))
        n_params = parameter_count("zoufal", 5, k)
        for i in range(REFERENCE_RUNS):
            sign = 1.0 if i % 2 == 0 else -1.0
            result = RunResult(
                spec_id=spec.spec_id, run_index=i, epochs_completed=0,
                generator_loss_curve=[], discriminator_loss_curve=[], entropy_curve=[],
                initial_re=re, final_ks=ks + sign * sks, final_re=re + sign * sre,
                transpiled_depth=int(np.floor(depth)) + (1 if i < n_ceil else 0),
                circuit_evaluations=0, final_generator_params=[0.0] * n_params,
                final_discriminator_params=[0.0] * 61, discriminator_input_shift=0.0,
                discriminator_input_scale=1.0, initial_amplitudes=[32 ** -0.5] * 32,
                budget_exhausted=False,
            )
            records.append({"format": 1, "status": "ok", "spec": spec.to_dict(), "run_index": i,
                            "result": result.to_dict(),
                            "target": {"low": 0.0, "high": 1.0, "bin_probabilities": [1 / 32] * 32}})
    return records


def write_reference_store(store, n_nodes: int = 3):
    """Populate ``store`` as pipeline 1 would have for the reference grid."""
    records = reference_records()
    ids = sorted({r["spec"]["spec_id"] for r in records})
    for w in range(n_nodes):
        mine = set(ids[w::n_nodes])
        blob = [r for r in records if r["spec"]["spec_id"] in mine]
        store.put_atomic(f"raw/node-{w}.json", json.dumps(blob).encode())


def config_dict(**overrides) -> dict:
    cfg = {
        "name": "test grid",
        "goal": "",
        "metrics": "relative_entropy",
        "n_containers": 1,
        "visualizations": [],
        "distributions": [{"data_path": "synthetic:0", "samples": 2000, "discretization": "optimal"}],
        "ansaetze": [{"type": "zoufal", "repetitions": [1]}],
        "initializations": [{"type": "uniform"}],
        "num_qubits": [2],
        "batch_size": 32,
        "num_epochs": 3,
        "num_training_runs": 1,
        "discriminator": {"type": "custom_classical_1",
                          "hparams": {"lr": [1e-3], "n_hidden": [20], "betas": [0.9, 0.999]}},
        "optimizer": {"lr": [1e-3], "betas": [0.7, 0.99]},
        "master_seed": 0,
    }
    cfg.update(overrides)
    return cfg


@pytest.fixture
def write_config(tmp_path):
    def _write(name="grid", **overrides):
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(config_dict(**overrides), indent=1))
        return path
    return _write
