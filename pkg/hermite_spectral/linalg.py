"""
Small dense complex linear algebra
Shifted QR eigenvalues for Hessenberg input, scaling-and-squaring exponentials,
least-squares lines and tridiagonal interlacing checks
"""
import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict
from scipy.linalg import eigh_tridiagonal, eigvalsh_tridiagonal

from .errors import ConvergenceError, NumericalError

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]

MAX_HESSENBERG_ORDER = 400
DEFLATION_TOL = 1e-14
_EXCEPTIONAL_SHIFT_EVERY = 10
_MAX_TAYLOR_TERMS = 40


class EigenReport(BaseModel):
    """Eigenvalues sorted by (real, imag) together with the spectral abscissa."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    eigenvalues: np.ndarray
    spectral_abscissa: float
    iterations: int


def sort_eigenvalues(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    return values[np.lexsort((values.imag, values.real))]


def _as_square(matrix) -> np.ndarray:
    matrix = np.array(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("matrix entries must be finite")
    return matrix


def _givens(x: complex, y: complex) -> Tuple[complex, complex]:
    r = math.hypot(abs(x), abs(y))
    if r == 0.0:
        return 1.0, 0.0
    return x / r, y / r


def _wilkinson_shift(a: complex, b: complex, c: complex, d: complex) -> complex:
    """Eigenvalue of [[a, b], [c, d]] closest to d."""
    half_trace = 0.5 * (a + d)
    disc = np.sqrt(0.25 * (a - d) ** 2 + b * c)
    mu1, mu2 = half_trace + disc, half_trace - disc
    return mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2


def _qr_sweep(H: np.ndarray, lo: int, hi: int, shift: complex) -> None:
    """One explicitly shifted QR step on the active block H[lo:hi+1, lo:hi+1]."""
    block = slice(lo, hi + 1)
    sub = H[block, block]
    size = hi - lo + 1
    sub[np.diag_indices(size)] -= shift
    rotations = []
    for j in range(size - 1):
        c, s = _givens(sub[j, j], sub[j + 1, j])
        rotations.append((c, s))
        top = sub[j, j:].copy()
        bottom = sub[j + 1, j:].copy()
        sub[j, j:] = np.conj(c) * top + np.conj(s) * bottom
        sub[j + 1, j:] = -s * top + c * bottom
    for j, (c, s) in enumerate(rotations):
        rows = slice(0, min(j + 2, size - 1) + 1)
        left = sub[rows, j].copy()
        right = sub[rows, j + 1].copy()
        sub[rows, j] = left * c + right * s
        sub[rows, j + 1] = -left * np.conj(s) + right * np.conj(c)
    sub[np.diag_indices(size)] += shift
    H[block, block] = sub


def eig_hessenberg(matrix, max_sweeps: Optional[int] = None) -> EigenReport:
    """All eigenvalues of an upper Hessenberg matrix by Wilkinson-shifted QR with deflation."""
    H = _as_square(matrix)
    n = H.shape[0]
    if n > MAX_HESSENBERG_ORDER:
        raise ValueError(f"matrix order {n} exceeds {MAX_HESSENBERG_ORDER}")
    if np.any(np.tril(H, -2) != 0):
        raise ValueError("matrix is not upper Hessenberg")

    budget = max_sweeps if max_sweeps is not None else 100 * n
    scale = max(np.linalg.norm(H), np.finfo(float).tiny)
    eigenvalues = []
    iterations = 0
    since_deflation = 0
    hi = n - 1

    while hi >= 0:
        if hi == 0:
            eigenvalues.append(H[0, 0])
            break
        lo = hi
        while lo > 0:
            neighbours = abs(H[lo - 1, lo - 1]) + abs(H[lo, lo])
            if neighbours == 0.0:
                neighbours = scale
            if abs(H[lo, lo - 1]) < DEFLATION_TOL * neighbours:
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eigenvalues.append(H[hi, hi])
            hi -= 1
            since_deflation = 0
            continue

        iterations += 1
        since_deflation += 1
        if iterations > budget:
            raise ConvergenceError(f"shifted QR did not converge for order {n}", budget)
        if since_deflation % _EXCEPTIONAL_SHIFT_EVERY == 0:
            shift = H[hi, hi] + abs(H[hi, hi - 1])
        else:
            shift = _wilkinson_shift(H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi])
        _qr_sweep(H, lo, hi, shift)

    values = sort_eigenvalues(np.array(eigenvalues))
    logger.debug("QR eigensolver: order %d, %d sweeps", n, iterations)
    return EigenReport(
        eigenvalues=values,
        spectral_abscissa=float(np.max(values.real)),
        iterations=iterations,
    )


def expm(matrix, t: float = 1.0) -> ComplexMatrix:
    """exp(t*matrix) by scaling and squaring around a truncated Taylor series."""
    if t < 0:
        raise ValueError(f"expm requires t >= 0, got {t}")
    X = t * _as_square(matrix)
    n = X.shape[0]
    norm = np.linalg.norm(X, 1)
    squarings = max(0, int(math.ceil(math.log2(norm)))) if norm > 1.0 else 0
    X = X / 2.0**squarings

    result = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for order in range(1, _MAX_TAYLOR_TERMS + 1):
        term = term @ X / order
        result = result + term
        if np.linalg.norm(term, 1) <= np.finfo(float).eps * np.linalg.norm(result, 1):
            break

    for _ in range(squarings):
        result = result @ result
        if not np.all(np.isfinite(result)):
            raise NumericalError(f"overflow while squaring in expm (norm {norm:.3e})")
    return result


def fit_line(points: Sequence[Tuple[float, float]]) -> Tuple[float, float]:
    """Ordinary least-squares slope and intercept through (t, y) points."""
    data = np.asarray(points, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != 2:
        raise ValueError("fit_line needs at least 2 (t, y) points")
    t, y = data[:, 0], data[:, 1]
    if np.ptp(t) == 0.0:
        raise ValueError("fit_line needs at least two distinct t values")
    design = np.column_stack([t, np.ones_like(t)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(slope), float(intercept)


def _symmetric_tridiagonal_parts(matrix) -> Tuple[np.ndarray, np.ndarray]:
    matrix = np.asarray(matrix)
    if np.iscomplexobj(matrix):
        if np.any(matrix.imag != 0):
            raise ValueError("expected a real matrix")
        matrix = matrix.real
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {matrix.shape}")
    if not np.array_equal(matrix, matrix.T):
        raise ValueError("expected a symmetric matrix")
    if np.any(np.triu(matrix, 2) != 0):
        raise ValueError("expected a tridiagonal matrix")
    return np.diag(matrix).copy(), np.diag(matrix, 1).copy()


def tridiagonal_eigh(matrix) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns)."""
    diag, offdiag = _symmetric_tridiagonal_parts(matrix)
    if diag.size == 1:
        return diag.copy(), np.ones((1, 1))
    return eigh_tridiagonal(diag, offdiag)


def char_poly_roots_interlace(matrix) -> bool:
    """Whether roots of consecutive leading principal minors strictly interlace."""
    diag, offdiag = _symmetric_tridiagonal_parts(matrix)
    if np.any(offdiag == 0):
        raise ValueError("interlacing requires nonzero subdiagonal entries")

    previous = diag[:1].copy()
    for order in range(2, diag.size + 1):
        current = eigvalsh_tridiagonal(diag[:order], offdiag[: order - 1])
        if not (np.all(current[:-1] < previous) and np.all(previous < current[1:])):
            return False
        previous = current
    return True
