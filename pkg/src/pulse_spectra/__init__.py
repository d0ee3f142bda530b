"""Spectral tails of laser output pulses from a two-level rate-equation model."""
from .errors import DomainError, InsufficientDataError, NumericalError, StiffnessError
from .pump import PumpSpec, normalization_constant, pump_alpha_in
from .rate_model import RateParams, Trajectory, simulate
from .spectrum import QuadratureSettings, Spectrum, default_omega_grid, transform, transform_grid
from .specfit import AlphaFit, PeakSet, fit_alpha, fit_alpha_peaks, find_peaks, oscillation_amplitude

__version__ = "0.1.0"
