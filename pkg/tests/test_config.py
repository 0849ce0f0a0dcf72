from pathlib import Path

import pytest

import config
from config import ConfigError, load_config


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for key in ("SANDPILE_THREADS", "SANDPILE_LOG_LEVEL", "SANDPILE_LOG_FILE", "SANDPILE_OUT_DIR"):
        monkeypatch.delenv(key, raising=False)


def test_defaults(monkeypatch):
    monkeypatch.setattr(config.psutil, "cpu_count", lambda logical=True: 2 if not logical else 4)
    cfg = load_config()
    assert cfg.parallel.threads == 2
    assert cfg.log.level == "INFO"
    assert cfg.log.file == "data/sandpile.log"
    assert cfg.output.out_dir == Path("out")


def test_thread_count_falls_back_to_one(monkeypatch):
    monkeypatch.setattr(config.psutil, "cpu_count", lambda logical=True: None)
    assert load_config().parallel.threads == 1


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("SANDPILE_THREADS", "3")
    monkeypatch.setenv("SANDPILE_LOG_LEVEL", "debug")
    monkeypatch.setenv("SANDPILE_OUT_DIR", "results")
    cfg = load_config()
    assert cfg.parallel.threads == 3
    assert cfg.log.level == "DEBUG"
    assert cfg.with_out_dir("elsewhere").output.out_dir == Path("elsewhere")
    assert cfg.with_out_dir(None).output.out_dir == Path("results")


@pytest.mark.parametrize("key, value", [
    ("SANDPILE_THREADS", "many"),
    ("SANDPILE_THREADS", "0"),
    ("SANDPILE_LOG_LEVEL", "LOUD"),
])
def test_invalid_values_are_rejected(monkeypatch, key, value):
    monkeypatch.setenv(key, value)
    with pytest.raises(ConfigError) as excinfo:
        load_config()
    assert excinfo.value.exit_code == 2
