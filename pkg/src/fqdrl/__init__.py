"""Federated quantum deep Q-learning on exact statevector simulation."""

__version__ = "0.1.0"
