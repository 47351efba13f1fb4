from .discriminator import (ARCHITECTURES, DiscriminatorNet, DiscriminatorSpec, disc_backward, disc_forward,
                            disc_forward_batch, gan_losses, init_discriminator)
from .generator import evaluations_per_gradient, generator_loss_and_grad, generator_probabilities
from .optim import AdamState, adam_step
