"""Post-quench correlation dynamics of the transverse-field XY chain."""

__version__ = "0.1.0"

from .correlators import ContractionSet, XState, contractions, rho_nn, rho_nnn
from .model import ModelParams, bogoliubov, dispersion, mode_coeffs
from .qinfo import (
    CorrelationTriple, classical_correlation, concurrence, correlation_triple, discord,
    mutual_information,
)
from .quadrature import QuadratureSpec, integrate_halfline_even, integrate_periodic

__all__ = [
    "ContractionSet", "CorrelationTriple", "ModelParams", "QuadratureSpec", "XState",
    "bogoliubov", "classical_correlation", "concurrence", "contractions", "correlation_triple",
    "discord", "dispersion", "integrate_halfline_even", "integrate_periodic", "mode_coeffs",
    "mutual_information", "rho_nn", "rho_nnn",
]
