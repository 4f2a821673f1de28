# CLI Schemas
# Pydantic models for command inputs and the documents commands print

import math
from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

STEP_MAGNITUDE = math.pi / 2


class RunConfig(BaseModel):
    """Options shared by the analysis, sweep, simulation and formation commands."""

    model_config = ConfigDict(frozen=True)

    graph_path: Optional[Path] = Field(
        default=None, description="Graph file; the built-in ring scenario when omitted"
    )
    gamma: Optional[float] = Field(default=None, gt=0, description="Update gain")
    beta: Optional[float] = Field(default=None, description="DSR gain")
    delta_t: float = Field(default=0.01, gt=0, description="Update time in seconds")
    step_magnitude: float = Field(default=STEP_MAGNITUDE, description="Source step I_d")
    horizon: Optional[float] = Field(default=None, ge=0, description="Run length in seconds")
    output_dir: Path = Field(default=Path("05_outputs"), description="Directory for CSV files")
    tilde_delta_t: Optional[float] = Field(
        default=None, gt=0, description="Update time of the second-order system"
    )

    @field_validator("gamma", "beta", "delta_t", "step_magnitude", "horizon", "tilde_delta_t")
    @classmethod
    def finite(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not math.isfinite(v):
            raise ValueError("must be finite")
        return v

    @property
    def builtin(self) -> bool:
        return self.graph_path is None


class AnalysisReport(BaseModel):
    """Document printed by ``analyze``."""

    agents: int
    lambda_min: float
    lambda_max: float
    real_spectrum: bool
    gamma_bar_general: float
    gamma_bar_real: Optional[float] = None
    gamma: Optional[float] = None
    radius_first_order: Optional[float] = None
    stable_first_order: Optional[bool] = None
    beta_range: Optional[Tuple[float, float]] = None
    beta: Optional[float] = None
    beta_critical: Optional[float] = None
    radius_dsr: Optional[float] = None
    stable_dsr: Optional[bool] = None
    jury_dsr: Optional[bool] = None


class SweepSummary(BaseModel):
    which: str
    points: int
    argmin: float
    min_radius: float
    gamma: Optional[float] = None
    csv: str


class SimulationSummary(BaseModel):
    mode: str
    gamma: float
    beta: Optional[float] = None
    delta_t: float
    steps: int
    spectral_radius: Optional[float] = None
    divergent: bool
    converged: bool
    settling_time: Optional[float] = None
    csv: str


class FormationSummary(BaseModel):
    horizon: float
    steps: int
    leader: Optional[int] = None
    distortion_no_dsr: float
    distortion_dsr: float
    csv: List[str]


def render(doc: BaseModel) -> str:
    """One ``key: value`` line per field, floats to 10 significant digits."""
    lines = []
    for key, value in doc.model_dump().items():
        if value is None:
            continue
        lines.append(f"{key}: {_fmt(value)}")
    return "\n".join(lines) + "\n"


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.10g}"
    if isinstance(value, (list, tuple)):
        return "(" + ", ".join(_fmt(v) for v in value) + ")"
    return str(value)
