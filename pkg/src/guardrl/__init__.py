"""Guardian-supervised reward-free driving agent, desk scale."""

__version__ = "0.1.0"
