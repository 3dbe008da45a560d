"""
Dynamics - semi-discrete Fourier-Hermite systems and their time integration
Classical RK4 with per-step filtering, plus exact exponential propagation
for the mode-decoupled advection model
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .config import HermiteParams, SimConfig
from .errors import NumericalError
from .hermite_core import OperatorSet, build_operators
from .linalg import expm

logger = logging.getLogger(__name__)

MAX_STEPS = 10_000_000
# RK4 is stable on the negative real axis down to about -2.785
RK4_REAL_STABILITY = -2.78


class SpectralState(BaseModel):
    """Fourier-Hermite coefficients; row j holds mode m = j - m_c."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    modes: np.ndarray
    time: float = 0.0

    @property
    def m_c(self) -> int:
        return (self.modes.shape[0] - 1) // 2

    @property
    def mode_numbers(self) -> np.ndarray:
        return np.arange(-self.m_c, self.m_c + 1)

    def mode(self, m: int) -> np.ndarray:
        if abs(m) > self.m_c:
            raise ValueError(f"mode {m} outside the window |m| <= {self.m_c}")
        return self.modes[m + self.m_c]

    def as_dict(self) -> Dict[int, np.ndarray]:
        return {int(m): self.mode(int(m)) for m in self.mode_numbers}

    @classmethod
    def zeros(cls, m_c: int, M: int, time: float = 0.0) -> "SpectralState":
        return cls(modes=np.zeros((2 * m_c + 1, M + 1), dtype=complex), time=time)


class Sample(BaseModel):
    t: float
    E: float = Field(ge=0)
    mode_norms: List[float]
    mass: float


class TimeSeries(BaseModel):
    """Sampled diagnostics of one run plus sparse full-state checkpoints."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    samples: List[Sample] = Field(default_factory=list)
    full_state_checkpoints: List[SpectralState] = Field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @property
    def energies(self) -> np.ndarray:
        return np.array([s.E for s in self.samples])

    @property
    def final_state(self) -> Optional[SpectralState]:
        return self.full_state_checkpoints[-1] if self.full_state_checkpoints else None


@lru_cache(maxsize=32)
def operators_for(config: SimConfig) -> OperatorSet:
    return build_operators(config.params, config.filter, config.dt)


def initial_state(config: SimConfig) -> SpectralState:
    """Maxwellian background plus the model's first-harmonic perturbation."""
    if config.m_c < 1:
        raise ValueError(f"Fourier cutoff m_c must be >= 1, got {config.m_c}")
    state = SpectralState.zeros(config.m_c, config.params.M)
    modes = state.modes.copy()
    centre = config.m_c
    modes[centre, 0] = 1.0
    if config.model == "linearized-landau":
        modes[centre + 1, 0] = config.epsilon
    else:
        modes[centre + 1, 0] = 0.5 * config.epsilon
        modes[centre - 1, 0] = 0.5 * config.epsilon
    return SpectralState(modes=modes, time=0.0)


def field_from_density(density: np.ndarray, k: float) -> np.ndarray:
    """E^(m) = -i f_0^(m) / (mk) for m != 0 and E^(0) = 0, over the mode window."""
    m_c = (density.shape[0] - 1) // 2
    m = np.arange(-m_c, m_c + 1, dtype=float)
    field = np.zeros(density.shape, dtype=complex)
    nonzero = m != 0
    field[nonzero] = -1j * density[nonzero] / (m[nonzero] * k)
    return field


def electric_field_modes(state: SpectralState, params: HermiteParams) -> np.ndarray:
    return field_from_density(state.modes[:, 0], params.k)


def _convolve_field(field: np.ndarray, BF: np.ndarray) -> np.ndarray:
    """sum_l E^(l) B f^(m-l), dropping terms whose m-l leaves the window."""
    n = BF.shape[0]
    m_c = (n - 1) // 2
    out = np.zeros_like(BF)
    for j, e in enumerate(field):
        if e == 0:
            continue
        shift = j - m_c
        if shift >= 0:
            out[shift:] += e * BF[: n - shift]
        else:
            out[: n + shift] += e * BF[-shift:]
    return out


def _forcing_field(config: SimConfig, t: float, n_modes: int) -> np.ndarray:
    m_c = (n_modes - 1) // 2
    field = np.zeros(n_modes, dtype=complex)
    amplitude = config.epsilon * math.exp(-config.force.gamma * t) * math.cos(config.force.omega * t)
    field[m_c + 1] = amplitude
    field[m_c - 1] = np.conj(amplitude)
    return field


def _rhs_array(F: np.ndarray, t: float, config: SimConfig, ops: OperatorSet) -> np.ndarray:
    k = config.params.k
    n_modes = F.shape[0]
    m_c = (n_modes - 1) // 2
    with_h = config.filter_mode == "continuous"

    if config.model == "linearized-landau":
        dF = np.zeros_like(F)
        dF[m_c + 1] = ops.mode_matrix(1, with_g=True, with_h=with_h) @ F[m_c + 1]
        return dF

    m = np.arange(-m_c, m_c + 1, dtype=float)
    dF = -1j * k * m[:, None] * (F @ ops.A.T)
    if with_h:
        dF += F * ops.h[None, :]

    if config.model == "forced":
        field = _forcing_field(config, t, n_modes)
    elif config.model == "vlasov-poisson":
        field = field_from_density(F[:, 0], k)
    else:
        return dF
    return dF + _convolve_field(field, F @ ops.B.T)


def rhs(state: SpectralState, t: float, config: SimConfig) -> SpectralState:
    """Time derivative of every Fourier mode for the configured model."""
    return SpectralState(
        modes=_rhs_array(state.modes, t, config, operators_for(config)), time=t
    )


def _check_rk4_stability(config: SimConfig, ops: OperatorSet, dt: float) -> None:
    if config.filter_mode == "continuous" and dt * float(np.min(ops.h)) < RK4_REAL_STABILITY:
        raise NumericalError(
            f"continuous filter term dt*min(h) = {dt * float(np.min(ops.h)):.3g} lies "
            "outside the RK4 stability interval; use filter_mode='discrete'"
        )


def _rk4_array(F, t, dt, config, ops) -> np.ndarray:
    k1 = _rhs_array(F, t, config, ops)
    k2 = _rhs_array(F + 0.5 * dt * k1, t + 0.5 * dt, config, ops)
    k3 = _rhs_array(F + 0.5 * dt * k2, t + 0.5 * dt, config, ops)
    k4 = _rhs_array(F + dt * k3, t + dt, config, ops)
    result = F + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(result)):
        raise NumericalError(f"non-finite coefficients after RK4 step at t={t + dt:.6g}")
    return result


def step_rk4(
    state: SpectralState, dt: float, config: SimConfig, ops: Optional[OperatorSet] = None
) -> SpectralState:
    """Advance one classical RK4 step; no filter is applied here."""
    if dt <= 0:
        raise ValueError(f"time step must be positive, got {dt}")
    ops = ops or operators_for(config)
    _check_rk4_stability(config, ops, dt)
    return SpectralState(
        modes=_rk4_array(state.modes, state.time, dt, config, ops), time=state.time + dt
    )


def apply_filter(state: SpectralState, sigma: np.ndarray) -> SpectralState:
    """Multiply coefficient i of every mode by sigma[i]."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (state.modes.shape[1],):
        raise ValueError(f"sigma must have length {state.modes.shape[1]}, got {sigma.shape}")
    return SpectralState(modes=state.modes * sigma[None, :], time=state.time)


def propagate_linear_exact(
    config: SimConfig, m: int, t: float, ops: Optional[OperatorSet] = None
) -> np.ndarray:
    """exp(t A_m) f^(m)(0) for the advection model, with H taken as continuous."""
    if config.model != "advection":
        raise ValueError(f"exact propagation needs the linear advection model, got {config.model}")
    if abs(m) > config.m_c:
        raise ValueError(f"mode {m} outside the window |m| <= {config.m_c}")
    ops = ops or operators_for(config)
    start = initial_state(config).mode(m).copy()
    if t == 0:
        return start

    # Cutoff rows are hard zeros: propagate only the surviving block
    alive = ops.sigma > 0
    result = np.zeros_like(start)
    block = ops.mode_matrix(m)[np.ix_(alive, alive)]
    result[alive] = expm(block, t) @ start[alive]
    return result


def propagate_modes_exact(
    config: SimConfig, t: float, max_workers: Optional[int] = None
) -> SpectralState:
    """Exact propagation of every advection mode, optionally on a thread pool."""
    ops = operators_for(config)
    mode_numbers = list(range(-config.m_c, config.m_c + 1))
    if max_workers == 1:
        rows = [propagate_linear_exact(config, m, t, ops) for m in mode_numbers]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(lambda m: propagate_linear_exact(config, m, t, ops), mode_numbers))
    return SpectralState(modes=np.array(rows), time=t)


def exact_advection_coefficients(config: SimConfig, t: float) -> SpectralState:
    """Closed-form unfiltered advection solution for the cosine initial data.

    Mode m carries (eps/2) (-imkt)^i / sqrt(i!) exp(-k^2 t^2 / 2); the phase
    (-i)^i matches the -imkA sign of the moment system.
    """
    M = config.params.M
    k = config.params.k
    state = SpectralState.zeros(config.m_c, M, time=t)
    modes = state.modes.copy()
    i = np.arange(M + 1)
    log_fact = np.array([math.lgamma(n + 1) for n in i])
    envelope = math.exp(-0.5 * (k * t) ** 2)
    modes[config.m_c, 0] = 1.0
    for sign in (1, -1):
        if t == 0:
            column = np.zeros(M + 1, dtype=complex)
            column[0] = 1.0
        else:
            magnitude = np.exp(i * math.log(k * t) - 0.5 * log_fact)
            column = magnitude * (-sign * 1j) ** i
        modes[config.m_c + sign] = 0.5 * config.epsilon * column * envelope
    return SpectralState(modes=modes, time=t)


def _sample(F: np.ndarray, t: float, params: HermiteParams, m_c: int) -> Sample:
    field = field_from_density(F[:, 0], params.k)
    norms = np.linalg.norm(F, axis=1)
    return Sample(
        t=t,
        E=math.sqrt(params.D * float(np.sum(np.abs(field) ** 2))),
        mode_norms=[float(x) for x in norms[m_c:]],
        mass=float(F[m_c, 0].real),
    )


def run_simulation(config: SimConfig) -> TimeSeries:
    """Integrate from the initial state to t_end, sampling E(t), mode norms and mass."""
    dt = config.dt
    n_steps = int(math.ceil(config.t_end / dt - 1e-9))
    if n_steps > MAX_STEPS:
        raise ValueError(f"{n_steps} steps exceed the limit of {MAX_STEPS}")

    ops = operators_for(config)
    _check_rk4_stability(config, ops, dt)
    discrete = config.filter_mode == "discrete" and config.filter.variant != "none"
    sigma = ops.sigma[None, :]

    F = initial_state(config).modes.copy()
    series = TimeSeries()
    series.samples.append(_sample(F, 0.0, config.params, config.m_c))
    logger.info(
        "Running %s: M=%d, m_c=%d, dt=%.5g, %d steps, filter=%s (%s)",
        config.model, config.params.M, config.m_c, dt, n_steps,
        config.filter.variant, config.filter_mode,
    )

    for step in range(1, n_steps + 1):
        t_prev = (step - 1) * dt
        F = _rk4_array(F, t_prev, dt, config, ops)
        if discrete:
            F = F * sigma
        t = step * dt
        if step % config.sample_every == 0 or step == n_steps:
            series.samples.append(_sample(F, t, config.params, config.m_c))
        if config.checkpoint_every and step % config.checkpoint_every == 0 and step != n_steps:
            series.full_state_checkpoints.append(SpectralState(modes=F.copy(), time=t))

    series.full_state_checkpoints.append(SpectralState(modes=F, time=n_steps * dt))
    return series
