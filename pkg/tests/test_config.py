"""Tests for environment-driven settings.

Covers: defaults, TMDIM_ overrides, validation errors and the cached
settings singleton.
"""

import pytest
from pydantic import ValidationError

from tm_dimension.config import Settings, get_settings


class TestSettings:
    def test_defaults(self, clean_settings):
        settings = Settings()
        assert settings.inputs == "1..21"
        assert settings.input_range == range(1, 22)
        assert settings.workers == 0
        assert settings.escape_check
        assert settings.log_format == "json"

    def test_environment_overrides(self, clean_settings, monkeypatch):
        monkeypatch.setenv("TMDIM_BUDGET", "5000")
        monkeypatch.setenv("TMDIM_INPUTS", " 2..9 ")
        monkeypatch.setenv("TMDIM_LOG_LEVEL", "debug")
        settings = Settings()
        assert settings.budget == 5000
        assert settings.inputs == "2..9"
        assert settings.log_level == "DEBUG"

    def test_rejects_bad_range(self, clean_settings, monkeypatch):
        monkeypatch.setenv("TMDIM_INPUTS", "9..2")
        with pytest.raises(ValidationError):
            Settings()

    def test_rejects_bad_log_level(self, clean_settings, monkeypatch):
        monkeypatch.setenv("TMDIM_LOG_LEVEL", "LOUD")
        with pytest.raises(ValidationError, match="TMDIM_LOG_LEVEL"):
            Settings()

    def test_rejects_zero_budget(self, clean_settings, monkeypatch):
        monkeypatch.setenv("TMDIM_BUDGET", "0")
        with pytest.raises(ValidationError):
            Settings()

    def test_rejects_unknown_log_format(self, clean_settings, monkeypatch):
        monkeypatch.setenv("TMDIM_LOG_FORMAT", "xml")
        with pytest.raises(ValidationError):
            Settings()

    def test_settings_are_cached(self, clean_settings):
        assert get_settings() is get_settings()
