"""Shared test fixtures for chirpmai tests."""

import logging

import pytest

from config import reset_config
from handlers.validators import load_run_config


@pytest.fixture(autouse=True)
def isolated_config(monkeypatch):
    """
    Load configuration fresh for every test.

    File logging is disabled so tests never write data/chirpmai.log.
    """
    monkeypatch.setenv("CHIRPMAI_LOG_FILE", "")
    reset_config()
    yield
    reset_config()


@pytest.fixture
def restore_root_logging():
    """Put the root logger back after code that calls logging.basicConfig(force=True)."""
    root = logging.getLogger()
    handlers = list(root.handlers)
    level = root.level
    yield root
    for handler in list(root.handlers):
        if handler not in handlers:
            handler.close()
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def make_run():
    """Factory building a validated RunConfig from keyword overrides."""

    def _make(command: str, **values):
        run, errors = load_run_config(command, values)
        assert errors == [], errors
        return run

    return _make
