"""
Exception hierarchy for the filtered Hermite spectral toolkit
"""


class HermiteSpectralError(Exception):
    """Base class for every failure raised by this package."""


class FilterError(HermiteSpectralError):
    """Filter parameters that damp nothing or break the filter invariants."""


class ConvergenceError(HermiteSpectralError):
    """An iterative method ran out of its iteration budget."""

    def __init__(self, message: str, iterations: int):
        super().__init__(f"{message} (after {iterations} iterations)")
        self.iterations = iterations


class NumericalError(HermiteSpectralError):
    """Non-finite values appeared during stepping or matrix exponentiation."""


class InsufficientPeaksError(HermiteSpectralError):
    """Fewer than two peaks are available for a decay-rate fit."""

    def __init__(self, found: int, t_f: float):
        super().__init__(f"need at least 2 peaks before t_F={t_f}, found {found}")
        self.found = found
        self.t_f = t_f


class OutsideValidatedRegionWarning(UserWarning):
    """Plasma dispersion function evaluated outside its validated region."""
