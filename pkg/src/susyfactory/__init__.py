"""Supersymmetric partner Hamiltonians from complex superpotentials.

Build generator pairs ``A, B`` from a superpotential, form ``H+ = AB`` and
``H- = BA``, compute their (generally complex) spectra and classify how
the spectra are related.
"""

from .analytic import (
    ShapeInvariantCase,
    Su11Coefficients,
    decompose_su11,
    ground_state_eval,
    shape_invariant_energy,
    su11_energy,
)
from .coeff import CoeffFn, lower
from .discretize import FiniteDifference, OperatorMatrix, OscillatorBasis, fd_matrix, ho_matrix
from .expr import conj_reflect, differentiate, evaluate, is_pt_invariant, parse, to_text
from .operator import (
    DiffOperator,
    GeneratorPair,
    HamiltonianPair,
    build_pair,
    classify,
    hamiltonian_pair,
    make_generators,
    multiply,
    scale,
)
from .spectra import Spectrum, converge, eigenvalues, filter_physical
from .verify import PairingReport, match_spectra, quadruplet_check, twins_check

__version__ = "0.1.0"

__all__ = [
    "CoeffFn", "DiffOperator", "FiniteDifference", "GeneratorPair", "HamiltonianPair",
    "OperatorMatrix", "OscillatorBasis", "PairingReport", "ShapeInvariantCase", "Spectrum",
    "Su11Coefficients", "build_pair", "classify", "conj_reflect", "converge", "decompose_su11",
    "differentiate", "eigenvalues", "evaluate", "fd_matrix", "filter_physical", "ground_state_eval",
    "hamiltonian_pair", "ho_matrix", "is_pt_invariant", "lower", "make_generators", "match_spectra",
    "multiply", "parse", "quadruplet_check", "scale", "shape_invariant_energy", "su11_energy",
    "to_text", "twins_check",
]
