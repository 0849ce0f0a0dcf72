from dataclasses import dataclass
from pathlib import Path
import os

import psutil
from dotenv import load_dotenv

from lattice import SandpileError

load_dotenv()

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class ConfigError(SandpileError):
    def __init__(self, message: str) -> None:
        super().__init__(message, exit_code=2)


def _get_env(key: str, default: str | None = None) -> str:
    value = os.getenv(key, default)
    return (value or "").strip()


def _default_threads() -> int:
    return max(1, psutil.cpu_count(logical=False) or psutil.cpu_count() or 1)


def _parse_threads(raw: str) -> int:
    if not raw:
        return _default_threads()
    try:
        threads = int(raw)
    except ValueError:
        raise ConfigError(f"SANDPILE_THREADS must be an integer, got {raw!r}") from None
    if threads < 1:
        raise ConfigError(f"SANDPILE_THREADS must be at least 1, got {threads}")
    return threads


@dataclass(frozen=True)
class LogConfig:
    level: str
    file: str


@dataclass(frozen=True)
class ParallelConfig:
    threads: int


@dataclass(frozen=True)
class OutputConfig:
    out_dir: Path


@dataclass(frozen=True)
class Config:
    log: LogConfig
    parallel: ParallelConfig
    output: OutputConfig

    def with_out_dir(self, out_dir: str | Path | None) -> "Config":
        if out_dir is None:
            return self
        return Config(log=self.log, parallel=self.parallel, output=OutputConfig(Path(out_dir)))


def load_config() -> Config:
    threads = _parse_threads(_get_env("SANDPILE_THREADS"))
    log_level = _get_env("SANDPILE_LOG_LEVEL", "INFO").upper()
    if log_level not in _LOG_LEVELS:
        raise ConfigError(f"SANDPILE_LOG_LEVEL must be one of {', '.join(_LOG_LEVELS)}, got {log_level!r}")
    log_file = _get_env("SANDPILE_LOG_FILE", "data/sandpile.log")
    out_dir = _get_env("SANDPILE_OUT_DIR", "out")

    return Config(
        log=LogConfig(level=log_level, file=log_file),
        parallel=ParallelConfig(threads=threads),
        output=OutputConfig(out_dir=Path(out_dir)),
    )
