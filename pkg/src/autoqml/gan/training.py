"""Adversarial training loop for one experiment run."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import List

import numpy as np

from ..data import TargetDistribution, bin_index, resample
from ..errors import BinMismatch
from ..experiment import ExperimentSpec
from ..metrics import kl_divergence, ks_statistic
from ..quantum import build_ansatz, map_to_range, prepare_initial_state, transpile_depth
from .discriminator import disc_backward, disc_forward_batch, gan_losses, init_discriminator
from .generator import expected_loss_and_grad, generator_probabilities, log_discriminator_on_grid
from .optim import AdamState, adam_step

KS_SAMPLES = 10_000


@dataclass(frozen=True)
class TrainingBudget:
    """Per-run ceilings: wall-clock seconds and circuit evaluations."""

    max_wall_seconds: float = 3600.0
    max_circuit_evaluations: int = 10 ** 9

    def __post_init__(self):
        if self.max_wall_seconds < 0 or self.max_circuit_evaluations < 0:
            raise ValueError("budgets must be non-negative")


@dataclass
class RunResult:
    spec_id: str
    run_index: int
    epochs_completed: int
    generator_loss_curve: List[float]
    discriminator_loss_curve: List[float]
    entropy_curve: List[float]
    initial_re: float
    final_ks: float
    final_re: float
    transpiled_depth: int
    circuit_evaluations: int
    final_generator_params: List[float]
    final_discriminator_params: List[float]
    discriminator_input_shift: float
    discriminator_input_scale: float
    initial_amplitudes: List[float]
    budget_exhausted: bool
    wall_seconds: float = field(default=0.0, compare=False)

    # wall time is excluded so serialized results stay reproducible
    SERIALIZED_EXCLUDE = ("wall_seconds",)

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if k not in self.SERIALIZED_EXCLUDE}

    @classmethod
    def from_dict(cls, d: dict) -> "RunResult":
        names = cls.__dataclass_fields__
        return cls(**{k: v for k, v in d.items() if k in names})


def _floats(values) -> List[float]:
    return [float(v) for v in np.asarray(values, dtype=float).reshape(-1)]


def train_qgan(spec: ExperimentSpec, target: TargetDistribution, budget: TrainingBudget,
               rng: np.random.Generator, run_index: int = 0) -> RunResult:
    """Train one generator/discriminator pair and collect its metrics.

    Every epoch draws ``batch_size`` real values and ``batch_size`` Born
    samples, takes one discriminator Adam step and then one generator Adam
    step. Relative entropy is recorded after each generator update.

    The circuit-evaluation budget is checked before each epoch, so a run can
    overshoot it by at most one epoch (``1 + 2 * num_params`` evaluations).
    Wall time is checked at the same point.
    """
    n = spec.num_qubits
    if target.num_bins != 2 ** n:
        raise BinMismatch(f"target has {target.num_bins} bins, generator has {2 ** n} outcomes")
    started = time.perf_counter()
    template = build_ansatz(spec.descriptor)
    a, b = target.low, target.high
    grid = map_to_range(np.arange(2 ** n), a, b, n)

    init_state = prepare_initial_state(spec.initialization, n, target.index_mean, target.index_std, rng)
    net = init_discriminator(spec.discriminator, rng)
    net.input_shift = 0.5 * (a + b)
    net.input_scale = 2.0 / (b - a)  # data range -> [-1, 1]
    theta = np.zeros(template.num_params)
    gen_opt = AdamState.create(theta.size, spec.generator_lr, spec.generator_betas)
    disc_opt = AdamState.create(net.num_params, spec.discriminator.learning_rate, spec.discriminator.betas)

    initial_probs = generator_probabilities(template, init_state, theta)
    initial_re = kl_divergence(target.bin_probabilities, initial_probs)
    probs = None
    evaluations = 0
    exhausted = False
    g_curve, d_curve, re_curve = [], [], []
    for _ in range(spec.num_epochs):
        if (evaluations >= budget.max_circuit_evaluations
                or time.perf_counter() - started >= budget.max_wall_seconds):
            exhausted = True
            break
        if probs is None:
            probs = initial_probs
            evaluations += 1

        real = grid[bin_index(resample(target, spec.batch_size, rng), a, b, n)]
        fake = grid[rng.choice(probs.size, size=spec.batch_size, p=probs / probs.sum())]

        loss_d, _ = gan_losses(disc_forward_batch(net, real), disc_forward_batch(net, fake))
        grad_d = disc_backward(net, real, fake)
        net = net.with_flat_params(adam_step(disc_opt, net.flat_params(), grad_d))

        log_d = log_discriminator_on_grid(net, a, b, n)
        loss_g, grad_g = expected_loss_and_grad(template, init_state, theta, log_d, probs=probs)
        theta = adam_step(gen_opt, theta, grad_g)
        evaluations += 2 * template.num_params

        probs = generator_probabilities(template, init_state, theta)
        evaluations += 1
        g_curve.append(loss_g)
        d_curve.append(loss_d)
        re_curve.append(kl_divergence(target.bin_probabilities, probs))

    final_probs = initial_probs if probs is None else probs
    generated = grid[rng.choice(final_probs.size, size=KS_SAMPLES, p=final_probs / final_probs.sum())]
    final_ks = ks_statistic(generated, resample(target, KS_SAMPLES, rng))
    return RunResult(
        spec_id=spec.spec_id,
        run_index=run_index,
        epochs_completed=len(re_curve),
        generator_loss_curve=g_curve,
        discriminator_loss_curve=d_curve,
        entropy_curve=re_curve,
        initial_re=initial_re,
        final_ks=final_ks,
        final_re=re_curve[-1] if re_curve else initial_re,
        transpiled_depth=transpile_depth(template),
        circuit_evaluations=evaluations,
        final_generator_params=_floats(theta),
        final_discriminator_params=_floats(net.flat_params()),
        discriminator_input_shift=float(net.input_shift),
        discriminator_input_scale=float(net.input_scale),
        initial_amplitudes=_floats(init_state.amplitudes.real),
        budget_exhausted=exhausted,
        wall_seconds=time.perf_counter() - started,
    )
