"""Quantum teleportation of one qubit through W, GHZ and GHZ-like channels
whose qubits are uniformly accelerated, modelled by the single-mode Unruh map."""

__version__ = "0.1.0"
