"""
Configuration models for the filtered Hermite spectral solver
Validated pydantic records plus environment-driven runtime settings
"""
import logging
import math
import os
import sys
from typing import Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

FilterVariant = Literal["none", "exponential", "houli-threshold", "cutoff", "timestep-scaled"]
ModelName = Literal["advection", "forced", "vlasov-poisson", "linearized-landau"]
FilterMode = Literal["discrete", "continuous"]

# Landau damping values at k = 0.5 for the Gaussian background
LANDAU_GAMMA = 0.15336
LANDAU_OMEGA = 1.416

DEFAULT_PERIOD = 4.0 * math.pi
HOU_LI_STRENGTH = 36.0
HOU_LI_ORDER = 36.0
THRESHOLD_FRACTION = 2.0 / 3.0


class HermiteParams(BaseModel):
    """Moment order and spatial periodicity of the Fourier-Hermite discretization."""

    model_config = ConfigDict(frozen=True)

    M: int = Field(ge=1)
    k: float = Field(gt=0)
    D: float = Field(gt=0)

    @model_validator(mode="after")
    def _check_wavenumber(self) -> "HermiteParams":
        if abs(self.k * self.D - 2.0 * math.pi) > 1e-12 * 2.0 * math.pi:
            raise ValueError(f"k*D must equal 2*pi, got k={self.k}, D={self.D}")
        return self

    @classmethod
    def from_period(cls, M: int, D: float = DEFAULT_PERIOD) -> "HermiteParams":
        return cls(M=M, k=2.0 * math.pi / D, D=D)

    @classmethod
    def from_wavenumber(cls, M: int, k: float) -> "HermiteParams":
        return cls(M=M, k=k, D=2.0 * math.pi / k)


class FilterSpec(BaseModel):
    """Variant and parameters defining the filter multipliers sigma_M(i)."""

    model_config = ConfigDict(frozen=True)

    variant: FilterVariant = "exponential"
    alpha: float = Field(default=HOU_LI_STRENGTH, ge=0)
    p: float = Field(default=HOU_LI_ORDER, gt=0)
    threshold: float = Field(default=THRESHOLD_FRACTION, ge=0, le=1)
    dt_ref: Optional[float] = Field(default=None, gt=0)
    protected: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_reference_step(self) -> "FilterSpec":
        if self.variant == "timestep-scaled" and self.dt_ref is None:
            raise ValueError("timestep-scaled filter requires dt_ref")
        return self

    @classmethod
    def none(cls) -> "FilterSpec":
        return cls(variant="none")

    @classmethod
    def hou_li(cls) -> "FilterSpec":
        return cls(variant="exponential", alpha=HOU_LI_STRENGTH, p=HOU_LI_ORDER)


class ForceSpec(BaseModel):
    """Exponentially decaying oscillating force of the forced-advection model."""

    model_config = ConfigDict(frozen=True)

    gamma: float = Field(default=LANDAU_GAMMA, gt=0)
    omega: float = LANDAU_OMEGA


class SimConfig(BaseModel):
    """Everything needed to reproduce one simulation run."""

    model_config = ConfigDict(frozen=True)

    model: ModelName
    params: HermiteParams
    filter: FilterSpec = Field(default_factory=FilterSpec.hou_li)
    epsilon: float = Field(gt=0)
    m_c: int = 1
    cfl_c: float = Field(default=0.5, gt=0)
    t_end: float = Field(gt=0)
    sample_every: int = Field(default=1, ge=1)
    force: ForceSpec = Field(default_factory=ForceSpec)
    filter_mode: FilterMode = "discrete"
    checkpoint_every: Optional[int] = Field(default=None, ge=1)

    @field_validator("m_c")
    @classmethod
    def _check_cutoff(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"Fourier cutoff m_c must be >= 1, got {value}")
        return value

    @property
    def dt(self) -> float:
        return self.cfl_c / math.sqrt(self.params.M)


class RuntimeSettings(BaseModel):
    """Process-level settings sourced from the environment (.env aware)."""

    output_dir: str = "runs"
    log_level: str = "INFO"


def load_settings(env_file: Optional[str] = None) -> RuntimeSettings:
    """Load .env (if present) and read HERMITE_* variables."""
    load_dotenv(env_file or os.path.join(os.getcwd(), ".env"))
    return RuntimeSettings(
        output_dir=os.getenv("HERMITE_OUTPUT_DIR", "runs"),
        log_level=os.getenv("HERMITE_LOG_LEVEL", "INFO").upper(),
    )


def configure_logging(level: str = "INFO") -> None:
    """Route package logging to stderr with a plain message format."""
    logger = logging.getLogger("hermite_spectral")
    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(message)s"))
        logger.addHandler(handler)
    logger.setLevel(getattr(logging, level, logging.INFO))
