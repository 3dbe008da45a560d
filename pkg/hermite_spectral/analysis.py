"""
Analysis - electric energy diagnostics, decay-rate fitting, recurrence metrics,
eigenvalue reports for the filtered operators and the Landau dispersion relation
"""
import logging
import math
import warnings
from typing import Iterable, List, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy.integrate import quad
from scipy.optimize import newton
from scipy.signal import find_peaks
from scipy.special import wofz

from .config import FilterSpec, HermiteParams
from .dynamics import SpectralState, TimeSeries, electric_field_modes
from .errors import ConvergenceError, InsufficientPeaksError, OutsideValidatedRegionWarning
from .hermite_core import build_operators
from .linalg import EigenReport, eig_hessenberg, fit_line

logger = logging.getLogger(__name__)

SQRT_PI = math.sqrt(math.pi)
DISPERSION_K_RANGE = (0.1, 1.0)
NEWTON_BUDGET = 100
# roundoff floor of the residual grows like k^-2; a root at this level is accepted
RESIDUAL_ACCEPT = 1e-12
# Root of the k = 0.5 dispersion relation; seeds the continuation in k
_SEED_K = 0.5
_SEED_OMEGA = 1.4156 - 0.1534j
_CONTINUATION_STEP = 0.05


class DecayFit(BaseModel):
    t_F: float
    peaks: List[Tuple[float, float]]
    slope: float
    rate: float
    n_peaks: int = Field(ge=2)

    @model_validator(mode="after")
    def _check_consistency(self) -> "DecayFit":
        if self.rate != -self.slope:
            raise ValueError("rate must equal -slope")
        if any(t > self.t_F for t, _ in self.peaks):
            raise ValueError("peaks beyond t_F")
        return self


class DispersionRoot(BaseModel):
    """Root omega = omega_p - i*gamma; gamma > 0 means decay under exp(-i omega t)."""

    k: float
    omega_p: float
    gamma: float
    residual: float
    iterations: int = 0

    @property
    def omega(self) -> complex:
        return complex(self.omega_p, -self.gamma)


def electric_energy(state: SpectralState, params: HermiteParams) -> float:
    """sqrt(D * sum_{m != 0} |E^(m)|^2)."""
    field = electric_field_modes(state, params)
    return math.sqrt(params.D * float(np.sum(np.abs(field) ** 2)))


def exact_electric_energy(t, epsilon: float, params: HermiteParams):
    """Unfiltered continuous advection energy (eps/k) sqrt(D/2) exp(-k^2 t^2 / 2)."""
    t = np.asarray(t, dtype=float)
    value = epsilon / params.k * math.sqrt(params.D / 2.0) * np.exp(-0.5 * (params.k * t) ** 2)
    return float(value) if value.ndim == 0 else value


def nonconstant_mode_energy(state: SpectralState) -> float:
    """sum over m != 0 of ||f^(m)||^2."""
    norms = np.sum(np.abs(state.modes) ** 2, axis=1)
    return float(np.sum(norms) - norms[state.m_c])


def linearized_field_amplitude(state: SpectralState, params: HermiteParams, epsilon: float) -> float:
    """|E^(1)| in the epsilon-scaled convention of the first-order Landau system."""
    return abs(electric_field_modes(state, params)[state.m_c + 1]) / epsilon


def detect_peaks(series: TimeSeries) -> List[Tuple[float, float]]:
    """Strict interior local maxima of E as (t, log E); endpoints are never peaks."""
    t = series.times
    E = series.energies
    if E.size < 3:
        raise ValueError(f"peak detection needs at least 3 samples, got {E.size}")
    # plateau of exactly one sample: strict maxima only
    idx, _ = find_peaks(E, plateau_size=(1, 1))
    return [(float(t[i]), math.log(E[i])) for i in idx if E[i] > 0]


def fit_decay_rate(series: TimeSeries, t_F: float) -> DecayFit:
    """Least-squares line through log-peaks up to t_F; rate is minus the slope."""
    if series.energies.size < 3:
        raise InsufficientPeaksError(0, t_F)
    peaks = [p for p in detect_peaks(series) if p[0] <= t_F]
    if len(peaks) < 2:
        raise InsufficientPeaksError(len(peaks), t_F)
    slope, _ = fit_line(peaks)
    logger.debug("Decay fit t_F=%g over %d peaks: slope %.6f", t_F, len(peaks), slope)
    return DecayFit(t_F=t_F, peaks=peaks, slope=slope, rate=-slope, n_peaks=len(peaks))


def recurrence_metric(series: TimeSeries, t_min: float) -> float:
    """Largest rebound max_{t >= t_min} E(t) / E(0)."""
    t = series.times
    E = series.energies
    if t.size == 0 or t[-1] < t_min:
        raise ValueError(f"series ends before t_min={t_min}")
    if E[0] == 0:
        raise ValueError("E(0) = 0, rebound ratio undefined")
    return float(np.max(E[t >= t_min]) / E[0])


def eigen_report_filtered(
    params: HermiteParams, filter: FilterSpec, dt: float, m: int, with_g: bool = False
) -> EigenReport:
    """Spectrum of A_m = -imkA + H or G_m = -imk(A + (mk)^-2 G) + H.

    Rows zeroed by a cutoff filter carry eigenvalue -inf and are left out.
    """
    if m == 0:
        raise ValueError("filtered eigen report needs m != 0")
    ops = build_operators(params, filter, dt)
    matrix = ops.mode_matrix(m, with_g=with_g)
    alive = ops.sigma > 0
    return eig_hessenberg(matrix[np.ix_(alive, alive)])


def plasma_dispersion_z(zeta: complex) -> complex:
    """Z(zeta) = i sqrt(pi) w(zeta) with w the Faddeeva function."""
    zeta = complex(zeta)
    if not (math.isfinite(zeta.real) and math.isfinite(zeta.imag)):
        raise ValueError(f"zeta must be finite, got {zeta}")
    if abs(zeta) > 10.0 or zeta.imag < -2.0:
        warnings.warn(
            f"Z evaluated at {zeta} outside |zeta| <= 10, Im zeta >= -2",
            OutsideValidatedRegionWarning,
            stacklevel=2,
        )
    return complex(1j * SQRT_PI * wofz(zeta))


def plasma_dispersion_z_prime(zeta: complex) -> complex:
    return -2.0 * (1.0 + zeta * plasma_dispersion_z(zeta))


def dispersion_residual(k: float, omega: complex) -> complex:
    """1 + k^-2 (1 + zeta Z(zeta)) with zeta = omega / (sqrt(2) k)."""
    zeta = omega / (math.sqrt(2.0) * k)
    return 1.0 + (1.0 + zeta * plasma_dispersion_z(zeta)) / k**2


def _z_by_quadrature(zeta: complex, half_width: float = 12.0) -> complex:
    a, b = zeta.real, zeta.imag
    limits = (-half_width, half_width)
    options = dict(limit=400, epsabs=1e-14, epsrel=1e-12)
    if b == 0.0:
        real, _ = quad(lambda x: math.exp(-x * x), *limits, weight="cauchy", wvar=a, **options)
        return real / SQRT_PI + 1j * SQRT_PI * math.exp(-a * a)

    def real_part(x):
        return math.exp(-x * x) * (x - a) / ((x - a) ** 2 + b * b)

    def imag_part(x):
        return math.exp(-x * x) * b / ((x - a) ** 2 + b * b)

    real, _ = quad(real_part, *limits, points=[a], **options)
    imag, _ = quad(imag_part, *limits, points=[a], **options)
    value = complex(real, imag) / SQRT_PI
    if b < 0:
        # Landau contour passes below the pole
        value += 2j * SQRT_PI * np.exp(-zeta * zeta)
    return value


def dispersion_residual_quadrature(k: float, omega: complex) -> complex:
    """Dispersion residual with Z from adaptive quadrature along the real line."""
    zeta = omega / (math.sqrt(2.0) * k)
    return 1.0 + (1.0 + zeta * _z_by_quadrature(zeta)) / k**2


def _newton_root(k: float, omega: complex) -> Tuple[complex, int]:
    scale = 1.0 / (math.sqrt(2.0) * k)

    def residual(w):
        return dispersion_residual(k, w)

    def derivative(w):
        zeta = w * scale
        return (plasma_dispersion_z(zeta) + zeta * plasma_dispersion_z_prime(zeta)) * scale / k**2

    root, info = newton(
        residual, omega, fprime=derivative, tol=1e-14, rtol=1e-13, maxiter=NEWTON_BUDGET,
        full_output=True, disp=False,
    )
    root = complex(root)
    if not info.converged and abs(residual(root)) > RESIDUAL_ACCEPT:
        raise ConvergenceError(f"dispersion Newton iteration failed at k={k}", info.iterations)
    return root, info.iterations


def solve_dispersion(k: float) -> DispersionRoot:
    """Least-damped Langmuir root of the Gaussian-background dispersion relation."""
    low, high = DISPERSION_K_RANGE
    if not low <= k <= high:
        raise ValueError(f"k={k} outside the validated range [{low}, {high}]")

    n_legs = max(1, int(math.ceil(abs(k - _SEED_K) / _CONTINUATION_STEP)))
    omega = _SEED_OMEGA
    iterations = 0
    for kk in np.linspace(_SEED_K, k, n_legs + 1)[1:]:
        omega, used = _newton_root(float(kk), omega)
        iterations += used

    residual = abs(dispersion_residual(k, omega))
    logger.debug("Dispersion root k=%g: omega=%s, residual %.2e", k, omega, residual)
    return DispersionRoot(
        k=k, omega_p=omega.real, gamma=-omega.imag, residual=residual, iterations=iterations
    )


def sweep_dispersion(k_values: Iterable[float]) -> List[DispersionRoot]:
    return [solve_dispersion(float(k)) for k in k_values]
