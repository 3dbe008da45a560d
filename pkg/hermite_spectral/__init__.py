"""
Hermite Spectral - filtered Fourier-Hermite solver for 1D kinetic transport
Advection, forced advection, Vlasov-Poisson and linearized Landau damping
"""
__version__ = "0.1.0"

from .analysis import (
    DecayFit,
    DispersionRoot,
    detect_peaks,
    dispersion_residual,
    eigen_report_filtered,
    electric_energy,
    exact_electric_energy,
    fit_decay_rate,
    plasma_dispersion_z,
    recurrence_metric,
    solve_dispersion,
)
from .config import FilterSpec, ForceSpec, HermiteParams, SimConfig
from .dynamics import (
    SpectralState,
    TimeSeries,
    apply_filter,
    initial_state,
    propagate_linear_exact,
    rhs,
    run_simulation,
    step_rk4,
)
from .errors import (
    ConvergenceError,
    FilterError,
    HermiteSpectralError,
    InsufficientPeaksError,
    NumericalError,
)
from .hermite_core import (
    OperatorSet,
    advection_matrix,
    build_dm_scaling,
    build_operators,
    coupling_matrix,
    force_matrix,
    gauss_hermite_rule,
    hermite_he,
)
from .linalg import EigenReport, char_poly_roots_interlace, eig_hessenberg, expm, fit_line

__all__ = [
    "__version__",
    "HermiteParams",
    "FilterSpec",
    "ForceSpec",
    "SimConfig",
    "OperatorSet",
    "hermite_he",
    "gauss_hermite_rule",
    "advection_matrix",
    "force_matrix",
    "coupling_matrix",
    "build_operators",
    "build_dm_scaling",
    "EigenReport",
    "eig_hessenberg",
    "expm",
    "fit_line",
    "char_poly_roots_interlace",
    "SpectralState",
    "TimeSeries",
    "initial_state",
    "rhs",
    "step_rk4",
    "apply_filter",
    "propagate_linear_exact",
    "run_simulation",
    "DecayFit",
    "DispersionRoot",
    "electric_energy",
    "exact_electric_energy",
    "detect_peaks",
    "fit_decay_rate",
    "recurrence_metric",
    "eigen_report_filtered",
    "plasma_dispersion_z",
    "dispersion_residual",
    "solve_dispersion",
    "HermiteSpectralError",
    "FilterError",
    "ConvergenceError",
    "NumericalError",
    "InsufficientPeaksError",
]
