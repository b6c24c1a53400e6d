"""Topological degeneracy tests for parameter-dependent Hamiltonians.

A loop of real eigenframes is classified in pi_1(SO(n)); a nontrivial class
certifies a degeneracy on every surface bounded by the parameter loop.
"""

__version__ = "0.1.0"
