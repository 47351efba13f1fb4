# %% [markdown]
# # Training one quantum generator
#
# A 3-qubit Born machine learns an 8-bin histogram of a bimodal price
# series. The discriminator is a small classical network; the generator
# gradient comes from the parameter-shift rule on the exact statevector.

# %%
import numpy as np

from autoqml.data import discretize, synthetic_prices
from autoqml.experiment import ExperimentSpec
from autoqml.gan.discriminator import DiscriminatorSpec
from autoqml.gan.generator import generator_probabilities
from autoqml.gan.training import TrainingBudget, train_qgan
from autoqml.quantum import AnsatzDescriptor, InitStrategy, StateVector, build_ansatz, map_to_range

# %% [markdown]
# ## Target distribution
#
# `synthetic_prices` stands in for a real price file. Binning onto
# `2**N` equal-width bins over the observed range gives the target.

# %%
prices = synthetic_prices(20_000, np.random.default_rng(0))
target = discretize(prices, 3)
centers = map_to_range(np.arange(8), target.low, target.high, 3)
for c, p in zip(centers, target.bin_probabilities):
    print(f"{c:8.2f}  {p:.4f}  {'#' * int(200 * p)}")

# %% [markdown]
# ## One training run
#
# zoufal Ansatz with two repetitions, uniform initial state, 500 epochs
# of one discriminator step followed by one generator step.

# %%
spec = ExperimentSpec(
    distribution_index=0, data_path="synthetic:0", samples=20_000, discretization="optimal",
    ansatz="zoufal", repetitions=2, initialization=InitStrategy("uniform"), num_qubits=3,
    discriminator=DiscriminatorSpec.named("custom_classical_2", learning_rate=3e-3),
    generator_lr=1e-3, generator_betas=(0.7, 0.99), batch_size=512, num_epochs=500, num_training_runs=1,
)
result = train_qgan(spec, target, TrainingBudget(), np.random.default_rng(7))
print(f"relative entropy {result.initial_re:.4f} -> {result.final_re:.4f}")
print(f"KS {result.final_ks:.4f}, transpiled depth {result.transpiled_depth}, "
      f"{result.circuit_evaluations} circuit evaluations")

# %%
for epoch in (1, 10, 50, 100, 250, 500):
    print(f"epoch {epoch:4d}  RE {result.entropy_curve[epoch - 1]:.4f}")

# %% [markdown]
# ## Learned versus target histogram

# %%
template = build_ansatz(AnsatzDescriptor("zoufal", 3, 2))
init = StateVector(3, np.array(result.initial_amplitudes))
learned = generator_probabilities(template, init, result.final_generator_params)
print("   value  target  learned")
for c, t, q in zip(centers, target.bin_probabilities, learned):
    print(f"{c:8.2f}  {t:.4f}  {q:.4f}")

# %% [markdown]
# ## Does the initial state matter?
#
# Five seeds for each initial state.

# %%
for kind in ("uniform", "normal", "random"):
    s = ExperimentSpec(**{**spec.__dict__, "initialization": InitStrategy(kind), "spec_id": ""})
    finals = [train_qgan(s, target, TrainingBudget(), np.random.default_rng(seed)).final_re for seed in range(5)]
    print(f"{kind:8s} mean RE {np.mean(finals):.4f}  std {np.std(finals):.4f}")
