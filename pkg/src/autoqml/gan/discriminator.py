"""Classical MLP discriminator with hand-written backpropagation.

The network maps one scalar sample to ``D(x) = P(x is real)``. Hidden
layers use LeakyReLU(0.2), the output a sigmoid. Inputs pass through a fixed
affine normalisation ``(x - input_shift) * input_scale`` first; training sets
it so the data range lands on ``[-1, 1]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from ..errors import LengthMismatch, NonFiniteInput

LEAK = 0.2
PROB_CLAMP = 1e-12

# hidden layer sizes of the two named architectures
ARCHITECTURES = {
    "custom_classical_1": (20,),
    "custom_classical_2": (40, 10),
}


@dataclass(frozen=True)
class DiscriminatorSpec:
    type_name: str
    hidden_sizes: Tuple[int, ...]
    learning_rate: float = 1e-4
    betas: Tuple[float, float] = (0.9, 0.999)

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if not self.hidden_sizes or min(self.hidden_sizes) < 1:
            raise ValueError("hidden sizes must all be >= 1")
        b1, b2 = self.betas
        if not 0 < b1 < b2 < 1:
            raise ValueError(f"need 0 < beta1 < beta2 < 1, got {self.betas}")
        if not self.learning_rate > 0:
            raise ValueError("learning rate must be positive")

    @classmethod
    def named(cls, type_name: str, **kwargs) -> "DiscriminatorSpec":
        return cls(type_name, ARCHITECTURES[type_name], **kwargs)


@dataclass
class DiscriminatorNet:
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    input_shift: float = 0.0
    input_scale: float = 1.0
    shapes: List[Tuple[int, int]] = field(init=False)

    def __post_init__(self):
        self.shapes = [w.shape for w in self.weights]

    @property
    def num_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def flat_params(self) -> np.ndarray:
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts += [w.ravel(), b.ravel()]
        return np.concatenate(parts)

    def with_flat_params(self, flat) -> "DiscriminatorNet":
        flat = np.asarray(flat, dtype=float)
        if flat.size != self.num_params:
            raise LengthMismatch(f"expected {self.num_params} values, got {flat.size}")
        weights, biases, pos = [], [], 0
        for out_dim, in_dim in self.shapes:
            weights.append(flat[pos:pos + out_dim * in_dim].reshape(out_dim, in_dim).copy())
            pos += out_dim * in_dim
            biases.append(flat[pos:pos + out_dim].copy())
            pos += out_dim
        return DiscriminatorNet(weights, biases, self.input_shift, self.input_scale)


def layer_sizes(spec: DiscriminatorSpec) -> List[int]:
    return [1, *spec.hidden_sizes, 1]


def init_discriminator(spec: DiscriminatorSpec, rng: np.random.Generator) -> DiscriminatorNet:
    """Glorot-uniform weights, zero biases."""
    sizes = layer_sizes(spec)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return DiscriminatorNet(weights, biases)


def _sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _forward(net: DiscriminatorNet, x: np.ndarray):
    """Returns output logits and the per-layer (input, pre-activation) cache."""
    h = ((x - net.input_shift) * net.input_scale)[:, None]
    cache = []
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = h @ w.T + b
        cache.append((h, z))
        h = z if i == last else np.where(z > 0, z, LEAK * z)
    return h[:, 0], cache


def disc_forward_batch(net: DiscriminatorNet, samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float).reshape(-1)
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("discriminator input must be finite")
    logits, _ = _forward(net, x)
    return _sigmoid(logits)


def disc_forward(net: DiscriminatorNet, sample_value: float) -> float:
    """Probability that ``sample_value`` came from the real data."""
    return float(disc_forward_batch(net, [sample_value])[0])


def gan_losses(disc_probs_real, disc_probs_fake) -> Tuple[float, float]:
    """Non-saturating BCE losses ``(L_D, L_G)``."""
    pr = np.clip(np.asarray(disc_probs_real, dtype=float), PROB_CLAMP, 1 - PROB_CLAMP)
    pf = np.clip(np.asarray(disc_probs_fake, dtype=float), PROB_CLAMP, 1 - PROB_CLAMP)
    loss_d = -np.mean(np.log(pr)) - np.mean(np.log1p(-pf))
    loss_g = -np.mean(np.log(pf))
    return float(loss_d), float(loss_g)


def _backward(net: DiscriminatorNet, cache, grad_logits: np.ndarray) -> np.ndarray:
    grads = [None] * len(net.weights)
    delta = grad_logits[:, None]
    for i in range(len(net.weights) - 1, -1, -1):
        h_in, _ = cache[i]
        grads[i] = (delta.T @ h_in, delta.sum(axis=0))
        if i:
            _, z_prev = cache[i - 1]
            delta = (delta @ net.weights[i]) * np.where(z_prev > 0, 1.0, LEAK)
    return np.concatenate([part.ravel() for gw, gb in grads for part in (gw, gb)])


def disc_backward(net: DiscriminatorNet, real_batch: Sequence[float], fake_batch: Sequence[float]) -> np.ndarray:
    """Gradient of ``L_D`` w.r.t. ``net.flat_params()``.

    Uses the logit form of the BCE derivative, so it is the exact gradient
    of the unclamped loss.
    """
    real = np.asarray(real_batch, dtype=float).reshape(-1)
    fake = np.asarray(fake_batch, dtype=float).reshape(-1)
    if real.size == 0 or fake.size == 0:
        raise ValueError("batches must be non-empty")
    x = np.concatenate([real, fake])
    logits, cache = _forward(net, x)
    p = _sigmoid(logits)
    grad_logits = np.concatenate([(p[:real.size] - 1.0) / real.size, p[real.size:] / fake.size])
    return _backward(net, cache, grad_logits)


def discriminator_loss(net: DiscriminatorNet, real_batch, fake_batch) -> float:
    return gan_losses(disc_forward_batch(net, real_batch), disc_forward_batch(net, fake_batch))[0]
