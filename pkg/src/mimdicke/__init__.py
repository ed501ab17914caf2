"""Mean-field, linearized-fluctuation and quantum ground-state tools for a
two-mode optical cavity coupled to a movable membrane.

Subpackage map:

- model       parameter containers, unit conversions, critical couplings
- meanfield   steady fields, effective potential, order parameter, sweeps
- dynamics    time integration of the coupled field-membrane equations
- stability   drift matrix, excitation spectra, damping rates
- quantum1d   imaginary-time ground states of the effective 1D problem
- fockcheck   truncated Fock-space Hamiltonian and symmetry checks
- experiment  laboratory-scale estimates (signal, losses, tunneling)
- cli         command-line front end
"""

from .errors import ConvergenceError, MimdickeError, ValidationError
from .model import (
    C_LIGHT,
    HBAR,
    CriticalSet,
    DimensionlessParams,
    PhysicalParams,
    coupling_from_reflectivity,
    critical_coupling,
    critical_power,
    critical_set,
    detuned_critical_coupling,
    eta_from_power,
    lambda_from_physical,
)

__version__ = "0.1.0"

__all__ = [
    "C_LIGHT",
    "HBAR",
    "ConvergenceError",
    "CriticalSet",
    "DimensionlessParams",
    "MimdickeError",
    "PhysicalParams",
    "ValidationError",
    "coupling_from_reflectivity",
    "critical_coupling",
    "critical_power",
    "critical_set",
    "detuned_critical_coupling",
    "eta_from_power",
    "lambda_from_physical",
    "__version__",
]
