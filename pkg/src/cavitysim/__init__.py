"""Quantum many-body models in coupled cavity arrays.

Builds lattice Hamiltonians for polariton and photon Bose-Hubbard models,
Jaynes-Cummings lattices and driven effective spin chains, maps microscopic
cavity-QED inputs to effective model constants, evolves dissipative dynamics
with quantum-jump trajectories or a dense master-equation oracle, and scans
mean-field phase diagrams.
"""

__version__ = "0.1.0"
