"""
Shared fixtures for the hermite_spectral test suite
"""
import math

import numpy as np
import pytest

from hermite_spectral.config import FilterSpec, HermiteParams, SimConfig
from hermite_spectral.dynamics import Sample, TimeSeries

K = 0.5
PERIOD = 4.0 * math.pi


@pytest.fixture
def params30() -> HermiteParams:
    return HermiteParams.from_period(30)


@pytest.fixture
def hou_li() -> FilterSpec:
    return FilterSpec.hou_li()


@pytest.fixture
def no_filter() -> FilterSpec:
    return FilterSpec.none()


@pytest.fixture
def make_config():
    """Factory for SimConfig with the standard D = 4*pi geometry."""

    def _make(model="advection", M=30, filter=None, epsilon=0.01, t_end=1.0, **overrides) -> SimConfig:
        return SimConfig(
            model=model,
            params=HermiteParams.from_period(M, PERIOD),
            filter=filter if filter is not None else FilterSpec.none(),
            epsilon=epsilon,
            t_end=t_end,
            **overrides,
        )

    return _make


@pytest.fixture
def synthetic_series():
    """TimeSeries built from an energy function sampled on a uniform grid."""

    def _build(energy, t_end=10.0, dt=0.01) -> TimeSeries:
        times = np.arange(0.0, t_end + 0.5 * dt, dt)
        return TimeSeries(
            samples=[Sample(t=float(t), E=float(energy(t)), mode_norms=[1.0], mass=1.0) for t in times]
        )

    return _build


@pytest.fixture
def isolated_env(tmp_path, monkeypatch):
    """Run CLI commands from an empty directory with default settings."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("HERMITE_OUTPUT_DIR", raising=False)
    monkeypatch.delenv("HERMITE_LOG_LEVEL", raising=False)
    return tmp_path
