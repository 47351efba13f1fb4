"""Automated architecture search for Born-sampled quantum GANs."""

__version__ = "0.1.0"
