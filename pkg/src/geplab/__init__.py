"""Numerical laboratory for general exceptional points in non-Hermitian two-level systems."""

from .classifier import BasisSpec, GEPClassification, SystemSpec, classify
from .linalg import EigenPair, eig
from .pauli import PauliVector, SimilarityTransform
from .ssh import SSHParams

__all__ = [
    "BasisSpec",
    "EigenPair",
    "GEPClassification",
    "PauliVector",
    "SSHParams",
    "SimilarityTransform",
    "SystemSpec",
    "classify",
    "eig",
]

__version__ = "0.1.0"
