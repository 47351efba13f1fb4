"""Grid expansion and static scheduling."""

from __future__ import annotations

import itertools
import logging
from typing import List

from ..experiment import ExperimentSpec
from ..quantum import parameter_count
from .config import ExperimentConfig

log = logging.getLogger(__name__)


def expand_grid(config: ExperimentConfig) -> List[ExperimentSpec]:
    """Cartesian product of every enumerated choice, sorted by spec id.

    Axes: distributions x (ansatz, repetitions) x initializations x
    num_qubits x discriminators x generator learning rates.
    """
    ansatz_pairs = [(a.type, k) for a in config.ansaetze for k in a.repetitions]
    specs = {}
    for (di, dist), (family, k), init, n, disc, lr in itertools.product(
            enumerate(config.distributions), ansatz_pairs, config.initializations,
            config.num_qubits, config.discriminators, config.generator_lrs):
        spec = ExperimentSpec(
            distribution_index=di,
            data_path=dist.data_path,
            samples=dist.samples,
            discretization=dist.discretization,
            ansatz=family,
            repetitions=k,
            initialization=init,
            num_qubits=n,
            discriminator=disc,
            generator_lr=lr,
            generator_betas=config.generator_betas,
            batch_size=config.batch_size,
            num_epochs=config.num_epochs,
            num_training_runs=config.num_training_runs,
        )
        if spec.spec_id in specs:
            log.warning("duplicate grid point %s dropped", spec.label)
        specs[spec.spec_id] = spec
    return [specs[k] for k in sorted(specs)]


def schedule_static(specs, n_containers: int) -> List[List[str]]:
    """Round-robin split of the sorted spec ids into ``n_containers`` sets.

    Set sizes differ by at most one; surplus containers get empty sets.
    """
    if n_containers < 1:
        raise ValueError("n_containers must be >= 1")
    ids = sorted(s.spec_id if isinstance(s, ExperimentSpec) else s for s in specs)
    return [ids[w::n_containers] for w in range(n_containers)]


def estimated_evaluations(specs) -> int:
    """Upper bound on circuit evaluations the grid will spend in training."""
    total = 0
    for s in specs:
        p = parameter_count(s.ansatz, s.num_qubits, s.repetitions)
        total += s.num_training_runs * (1 + s.num_epochs * (2 * p + 1))
    return total
