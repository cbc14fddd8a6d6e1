"""Nuclear norms of symmetric tensors via moment relaxations."""

__version__ = "0.1.0"
