"""Quantum Kramers escape rates from the c-number generalized Langevin equation.

The analytic pipeline runs relaxation functions -> variances -> Fokker-Planck
coefficients -> rate; :mod:`qkramers.sim` provides an independent stochastic
cross-check by first-passage Monte Carlo.
"""

from .bath import BathSpec
from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateRootError,
    DomainError,
    EstimateUnavailableError,
    IntegrationError,
    NumericError,
    QKramersError,
    StructuralError,
)
from .potential import CubicPotential
from .resolvent import ExponentialSum, RegionKind

__all__ = [
    "BathSpec",
    "CubicPotential",
    "ExponentialSum",
    "RegionKind",
    "QKramersError",
    "DomainError",
    "ConfigError",
    "NumericError",
    "ConvergenceError",
    "DegenerateRootError",
    "StructuralError",
    "IntegrationError",
    "EstimateUnavailableError",
]

__version__ = "0.1.0"
