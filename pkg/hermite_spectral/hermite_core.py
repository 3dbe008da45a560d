"""
Hermite Core - normalized Hermite basis and spectral operator assembly
Builds the advection/force/coupling matrices and the filter diagonals
"""
import logging
import math
from typing import Dict, Tuple

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field

from .config import FilterSpec, HermiteParams
from .errors import ConvergenceError, FilterError

logger = logging.getLogger(__name__)

RealVector = npt.NDArray[np.float64]
RealMatrix = npt.NDArray[np.float64]

# h sentinel for rows the cutoff filter zeroes outright
CUTOFF_SENTINEL = -1e30
MAX_QUADRATURE_POINTS = 200
_NEWTON_BUDGET = 50


def hermite_table(M: int, xi) -> np.ndarray:
    """Evaluate He_0..He_M at xi; result has shape (M+1,) + shape(xi)."""
    if M < 0:
        raise ValueError(f"Hermite order must be non-negative, got {M}")
    xi = np.asarray(xi, dtype=float)
    table = np.empty((M + 1,) + xi.shape)
    table[0] = 1.0
    if M >= 1:
        table[1] = xi
    for n in range(1, M):
        table[n + 1] = (xi * table[n] - math.sqrt(n) * table[n - 1]) / math.sqrt(n + 1)
    return table


def hermite_he(n: int, xi):
    """Normalized Hermite polynomial He_n(xi) by upward three-term recursion."""
    value = hermite_table(n, xi)[n]
    return float(value) if np.ndim(value) == 0 else value


def hermite_function(n: int, xi) -> np.ndarray:
    """He_n(xi) * exp(-xi^2/2), the velocity basis function up to 1/sqrt(2*pi)."""
    xi = np.asarray(xi, dtype=float)
    return hermite_table(n, xi)[n] * np.exp(-0.5 * xi**2)


def filter_diffusion_operator(values: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Finite-difference evaluation of d/dxi[exp(-xi^2/2) d/dxi(exp(xi^2/2) f)].

    The exponential filter is the time-discrete counterpart of a power of this
    operator; its eigenfunctions are He_n exp(-xi^2/2) with eigenvalue -n.
    """
    weight = np.exp(0.5 * xi**2)
    inner = np.gradient(weight * values, xi, edge_order=2) / weight
    return np.gradient(inner, xi, edge_order=2)


def _newton_step(n: int, nodes: np.ndarray) -> np.ndarray:
    # He_n' = sqrt(n) He_{n-1}
    table = hermite_table(n, nodes)
    return table[n] / (math.sqrt(n) * table[n - 1])


def gauss_hermite_rule(n: int) -> Tuple[RealVector, RealVector]:
    """Nodes and weights for the probabilists' Gaussian weight (2*pi)^(-1/2) exp(-xi^2/2).

    Nodes are the roots of He_n, polished by Newton iteration on the recursion
    starting from the eigenvalues of the n x n Jacobi matrix. Weights follow from
    the Christoffel formula 1 / (n He_{n-1}(x)^2), so they sum to one.
    """
    if not 1 <= n <= MAX_QUADRATURE_POINTS:
        raise ValueError(f"quadrature size must lie in [1, {MAX_QUADRATURE_POINTS}], got {n}")
    if n == 1:
        return np.zeros(1), np.ones(1)

    offdiag = np.sqrt(np.arange(1, n, dtype=float))
    jacobi = np.diag(offdiag, 1) + np.diag(offdiag, -1)
    nodes = np.sort(np.linalg.eigvalsh(jacobi))

    scale = max(1.0, float(np.max(np.abs(nodes))))
    for iteration in range(1, _NEWTON_BUDGET + 1):
        step = _newton_step(n, nodes)
        nodes = nodes - step
        if np.max(np.abs(step)) <= 1e-13 * scale:
            nodes = nodes - _newton_step(n, nodes)
            break
    else:
        raise ConvergenceError(f"Gauss-Hermite nodes for n={n} did not converge", _NEWTON_BUDGET)

    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 1.0 / (n * hermite_table(n - 1, nodes)[n - 1] ** 2)
    weights = 0.5 * (weights + weights[::-1])
    logger.debug("Gauss-Hermite rule n=%d converged in %d Newton steps", n, iteration)
    return nodes, weights / weights.sum()


def advection_matrix(M: int) -> RealMatrix:
    """Symmetric tridiagonal A with A[i, i+1] = A[i+1, i] = sqrt(i+1)."""
    offdiag = np.sqrt(np.arange(1, M + 1, dtype=float))
    return np.diag(offdiag, 1) + np.diag(offdiag, -1)


def force_matrix(M: int) -> RealMatrix:
    """Lower bidiagonal B with B[i, i-1] = sqrt(i); first row identically zero."""
    return np.diag(np.sqrt(np.arange(1, M + 1, dtype=float)), -1)


def coupling_matrix(M: int) -> RealMatrix:
    """G: single unit entry at row 1, column 0."""
    G = np.zeros((M + 1, M + 1))
    G[1, 0] = 1.0
    return G


def filter_sigma(M: int, filter: FilterSpec, dt: float) -> RealVector:
    """Per-index multipliers sigma_M(i), i = 0..M, for one time step dt."""
    if dt <= 0:
        raise ValueError(f"time step must be positive, got {dt}")
    x = np.arange(M + 1, dtype=float) / M
    above = x > filter.threshold + 1e-14

    if filter.variant == "none":
        sigma = np.ones(M + 1)
    elif filter.variant == "exponential":
        sigma = np.exp(-filter.alpha * x**filter.p)
    elif filter.variant == "houli-threshold":
        sigma = np.where(above, np.exp(-filter.alpha * x**filter.p), 1.0)
    elif filter.variant == "cutoff":
        sigma = np.where(above, 0.0, 1.0)
    elif filter.variant == "timestep-scaled":
        xp = x**filter.p
        scale = (dt / filter.dt_ref) ** (1.0 - xp)
        sigma = np.where(above, np.exp(-filter.alpha * xp * scale), 1.0)
    else:
        raise FilterError(f"unknown filter variant {filter.variant!r}")

    sigma[: min(filter.protected, M) + 1] = 1.0

    if np.any(sigma < 0) or np.any(sigma > 1):
        raise FilterError("filter multipliers must lie in [0, 1]")
    if np.any(np.diff(sigma) > 0):
        raise FilterError(f"filter {filter.variant!r} is not non-increasing for M={M}, dt={dt}")
    return sigma


class OperatorSet(BaseModel):
    """Assembled spectral operators for one (M, k, filter, dt)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    params: HermiteParams
    dt: float
    A: np.ndarray
    B: np.ndarray
    G: np.ndarray
    h: np.ndarray
    sigma: np.ndarray
    dm_cache: Dict[int, np.ndarray] = Field(default_factory=dict)

    @property
    def has_cutoff(self) -> bool:
        return bool(np.any(self.sigma == 0.0))

    def dm(self, m: int) -> np.ndarray:
        if m not in self.dm_cache:
            self.dm_cache[m] = build_dm_scaling(self.params, m)
        return self.dm_cache[m]

    def mode_matrix(self, m: int, with_g: bool = False, with_h: bool = True) -> np.ndarray:
        """A_m = -imkA + H, or G_m = -imk(A + (mk)^-2 G) + H when with_g is set."""
        mk = m * self.params.k
        base = self.A.astype(complex)
        if with_g:
            if m == 0:
                raise ValueError("G coupling is undefined for Fourier mode m=0")
            base = base + self.G / mk**2
        matrix = -1j * mk * base
        if with_h:
            matrix = matrix + np.diag(self.h)
        return matrix


def build_operators(params: HermiteParams, filter: FilterSpec, dt: float) -> OperatorSet:
    """Assemble A, B, G and the filter diagonal for one time step dt."""
    M = params.M
    if filter.variant != "none" and M < 2:
        raise FilterError(f"a damping filter needs M >= 2, got M={M}")
    sigma = filter_sigma(M, filter, dt)
    if filter.variant != "none" and sigma[-1] == 1.0:
        raise FilterError(
            f"filter {filter.variant!r} leaves the highest mode undamped (sigma_M(M) = 1)"
        )

    h = np.full(M + 1, CUTOFF_SENTINEL)
    alive = sigma > 0
    h[alive] = np.log(sigma[alive]) / dt
    h[0] = 0.0

    logger.debug("Assembled operators M=%d k=%g filter=%s dt=%g", M, params.k, filter.variant, dt)
    return OperatorSet(
        params=params,
        dt=dt,
        A=advection_matrix(M),
        B=force_matrix(M),
        G=coupling_matrix(M),
        h=h,
        sigma=sigma,
    )


def build_dm_scaling(params: HermiteParams, m: int) -> RealVector:
    """Diagonal of D_m symmetrizing A + (mk)^-2 G by similarity."""
    if m == 0:
        raise ValueError("D_m is undefined for m=0")
    mk = abs(m * params.k)
    scaling = np.full(params.M + 1, mk / math.sqrt(mk**2 + 1.0))
    scaling[0] = 1.0
    return scaling
