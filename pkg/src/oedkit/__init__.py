"""Operator evolution dimensions: Pauli-string closure, exact size polynomials and restricted Heisenberg dynamics."""

from .closure import EquivalenceClass, generate_class, oed, partition_all
from .dimpoly import DimensionPolynomial, detect_degree, solve_vandermonde, xy_polynomials
from .dynamics import InitialState, build_generator, evolve
from .models import Hamiltonian, from_config
from .pauli import PauliString, commutator, multiply, parse
from .quench import QuenchGate, extended_class, quenched_evolution, scheduled_class

__version__ = "0.1.0"

__all__ = [
    "DimensionPolynomial",
    "EquivalenceClass",
    "Hamiltonian",
    "InitialState",
    "PauliString",
    "QuenchGate",
    "build_generator",
    "commutator",
    "detect_degree",
    "evolve",
    "extended_class",
    "from_config",
    "generate_class",
    "multiply",
    "oed",
    "parse",
    "partition_all",
    "quenched_evolution",
    "scheduled_class",
    "solve_vandermonde",
    "xy_polynomials",
]
