"""Unit tests for settings loading."""

import math
import os
import sys
from pathlib import Path

import pytest
import yaml

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from src.core.config import (
    DEFAULT_CONFIG_PATH,
    PROJECT_ROOT,
    ConfigurationError,
    Settings,
    get_settings,
    load_settings,
)


class TestLoadSettings:

    def test_default_file(self):
        settings = load_settings()
        assert settings.scenario.agents == 31
        assert settings.scenario.leader == 16
        assert settings.scenario.gamma == 0.471
        assert settings.scenario.gamma_t == pytest.approx(47.1)
        assert settings.scenario.step_magnitude == pytest.approx(math.pi / 2)
        assert settings.sweep.gamma_points == 2048
        assert settings.numerics.settling_band == 0.02
        assert settings.numerics.settling_reference == "absolute"

    def test_reproduction_rows(self):
        rows = load_settings().reproduction
        assert rows["gamma_bar"].expected == 0.47214
        assert rows["speedup"].comparison == "at_least"
        assert rows["distortion_gap"].comparison == "above"
        assert list(rows)[0] == "lambda_min"

    def test_cached_settings(self):
        assert get_settings() is get_settings()

    def test_environment_is_ignored(self, monkeypatch):
        monkeypatch.setenv("SCENARIO", '{"gamma": 0.3}')
        monkeypatch.setenv("LOGGING", '{"level": "DEBUG"}')
        settings = load_settings()
        assert settings.scenario.gamma == 0.471
        assert settings.logging.level == "INFO"

    def test_overrides(self):
        settings = load_settings(DEFAULT_CONFIG_PATH, logging={"level": "debug"})
        assert settings.logging.level == "DEBUG"

    def test_resolve(self):
        settings = Settings()
        assert settings.resolve("05_outputs/") == PROJECT_ROOT / "05_outputs"
        assert settings.resolve("/tmp/x") == Path("/tmp/x")


class TestBadSettings:

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError) as exc_info:
            load_settings(tmp_path / "absent.yaml")
        assert "not found" in str(exc_info.value)

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("scenario: [unclosed\n")
        with pytest.raises(ConfigurationError):
            load_settings(path)

    def test_not_a_mapping(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigurationError):
            load_settings(path)

    @pytest.mark.parametrize("section,values", [
        ("scenario", {"delta_t": -1.0}),
        ("scenario", {"agents": 10, "leader": 11}),
        ("logging", {"level": "LOUD"}),
        ("numerics", {"settling_band": 0.0}),
        ("numerics", {"settling_reference": "final"}),
        ("unknown", {"x": 1}),
    ])
    def test_invalid_values(self, tmp_path, section, values):
        path = tmp_path / "config.yaml"
        path.write_text(yaml.safe_dump({section: values}))
        with pytest.raises(ConfigurationError):
            load_settings(path)
