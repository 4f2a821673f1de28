"""
Configuration Management Module

Typed application settings for the DSR consensus toolkit, loaded from
``07_configs/config.yaml``. The YAML file carries the built-in ring scenario,
sweep grids, numerical tolerances and the expected values used by the
reproduction run.

Settings take no environment variables: the YAML file and explicit keyword
overrides are the only sources.

Usage:
    from src.core.config import get_settings

    settings = get_settings()
    dt = settings.scenario.delta_t
"""

from functools import lru_cache
from pathlib import Path
from typing import Dict, Literal, Optional, Union

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

PROJECT_ROOT = Path(__file__).resolve().parents[2]
DEFAULT_CONFIG_PATH = PROJECT_ROOT / "07_configs" / "config.yaml"


class ConfigurationError(Exception):
    """Raised when the settings file cannot be read or validated."""
    pass


# =============================================================================
# Sections
# =============================================================================
class PathsConfig(BaseModel):
    graphs: str = "01_data/graphs/"
    output: str = "05_outputs/"


class LoggingConfig(BaseModel):
    level: str = Field(
        default="INFO",
        pattern="^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$",
        description="Logging level",
    )
    file: Optional[str] = Field(default=None, description="Optional log file path")

    @field_validator("level", mode="before")
    @classmethod
    def upper_level(cls, v: str) -> str:
        return v.upper() if isinstance(v, str) else v


class ScenarioConfig(BaseModel):
    """Built-in ring-with-leader scenario."""

    agents: int = Field(default=31, ge=3, description="Non-source agents in the ring")
    leader: int = Field(default=16, ge=1, description="Agent that hears the source")
    delta_t: float = Field(default=0.01, gt=0, description="Update time in seconds")
    step_magnitude: float = Field(default=1.5707963267948966)
    gamma: float = Field(default=0.471, gt=0, description="Update gain")
    beta: float = Field(default=0.8876, description="DSR gain")
    integrator_divisor: int = Field(
        default=10, ge=1, description="Continuous integrator step is delta_t / divisor"
    )
    formation_radius: float = Field(default=1.0, gt=0)
    formation_horizon: float = Field(default=12.04, ge=0)

    @field_validator("leader")
    @classmethod
    def leader_in_ring(cls, v: int, info) -> int:
        agents = info.data.get("agents")
        if agents is not None and v > agents:
            raise ValueError(f"leader {v} outside ring of {agents} agents")
        return v

    @property
    def gamma_t(self) -> float:
        return self.gamma / self.delta_t


class SweepConfig(BaseModel):
    gamma_points: int = Field(default=2048, ge=1)
    beta_step: float = Field(default=1e-4, gt=0)
    fine_gamma_step: float = Field(default=1e-4, gt=0)
    n_jobs: int = Field(default=1, description="joblib workers; 1 runs serially")


class NumericsConfig(BaseModel):
    symmetry_tol: float = 1e-12
    real_tol: float = 1e-9
    pivot_tol: float = 1e-10
    ones_tol: float = 1e-9
    marginal_band: float = 1e-9
    divergence_threshold: float = 1e12
    settling_band: float = Field(default=0.02, gt=0)
    settling_reference: Literal["amplitude", "absolute"] = Field(
        default="absolute",
        description="absolute: +/- settling_band state units; amplitude: fraction of the step",
    )
    min_steps: int = Field(default=1000, ge=1)
    horizon_multiple: float = Field(default=5.0, gt=0)


class SecondOrderConfig(BaseModel):
    tilde_delta_t_coarse: float = Field(default=1e-2, gt=0)
    tilde_delta_t_matched: float = Field(default=8.8759e-5, gt=0)
    tilde_delta_t_large: float = Field(default=8.8759e-4, gt=0)
    horizon: float = Field(default=3.0, gt=0)


class ExpectedValue(BaseModel):
    """One row of the reproduction table."""

    expected: float
    tolerance: float = Field(ge=0)
    comparison: Literal["within", "at_least", "above"] = "within"
    label: str = ""


# =============================================================================
# Settings
# =============================================================================
class Settings(BaseSettings):
    """
    Application settings.

    Attributes:
        paths: Data and output directories relative to the project root
        logging: Log level and optional log file
        scenario: Ring scenario and default gains
        sweep: Gain sweep grids and parallelism
        numerics: Numerical tolerances shared by the services
        second_order: Update times of the second-order comparison
        reproduction: Expected value and tolerance per reproduction row
    """

    model_config = SettingsConfigDict(extra="forbid", case_sensitive=False)

    paths: PathsConfig = Field(default_factory=PathsConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    scenario: ScenarioConfig = Field(default_factory=ScenarioConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    numerics: NumericsConfig = Field(default_factory=NumericsConfig)
    second_order: SecondOrderConfig = Field(default_factory=SecondOrderConfig)
    reproduction: Dict[str, ExpectedValue] = Field(default_factory=dict)

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls,
        init_settings,
        env_settings,
        dotenv_settings,
        file_secret_settings,
    ):
        # init kwargs only: no environment, no dotenv
        return (init_settings,)

    def resolve(self, relative: str) -> Path:
        """Resolve a configured path against the project root."""
        path = Path(relative)
        return path if path.is_absolute() else PROJECT_ROOT / path


def load_settings(path: Union[str, Path] = DEFAULT_CONFIG_PATH, **overrides) -> Settings:
    """
    Load settings from a YAML file.

    Args:
        path: YAML settings file
        **overrides: Top-level sections replacing the file's values

    Returns:
        Validated Settings

    Raises:
        ConfigurationError: If the file is missing, not YAML, or invalid
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except FileNotFoundError:
        raise ConfigurationError(
            f"Configuration file not found: {path}\n"
            f"Please ensure the config file exists at the specified path."
        )
    except yaml.YAMLError as e:
        raise ConfigurationError(f"Invalid YAML in config file {path}: {e}")

    if not isinstance(data, dict):
        raise ConfigurationError(f"Config file {path} must hold a mapping")
    data.update(overrides)
    try:
        return Settings(**data)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid settings in {path}:\n{e}")


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    return load_settings(DEFAULT_CONFIG_PATH)
