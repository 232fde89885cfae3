"""Exponential wave integrator sine pseudospectral solver for the NLS with wave operator."""

from .errors import BlowUpError, ConfigurationError
from .spectral import (
    Grid,
    GridField,
    SpectralField,
    build_grid,
    dst_forward,
    dst_inverse,
    restrict_modes,
    spectral_l2_norm,
    spectral_semi_h1_norm,
)
from .coeffs import SchemeCoefficients, build_coefficients, char_roots
from .stepper import (
    InitialData,
    Nonlinearity,
    SolverConfig,
    cubic,
    first_step,
    gaussian_data,
    initial_fields,
    integrate,
    linear,
    run_problem,
    sine_mode_data,
    step,
    td_initial,
)
from .reference import ReferenceSpec, ewi_reference, model_distance, nls_strang_step
from .analysis import ErrorReport, RateTable, error_report, temporal_rate, diagonal_rate

__version__ = "0.1.0"
