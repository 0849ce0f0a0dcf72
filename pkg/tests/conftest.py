import asyncio
from pathlib import Path

import numpy as np
import pytest

from artifacts import read_config
from config import Config, LogConfig, OutputConfig, ParallelConfig
from lattice import GridConfig
from main import build_parser, dispatch

FIXTURES = Path(__file__).parent / "fixtures"


def random_stable_config(rng: np.random.Generator, side: int) -> GridConfig:
    return GridConfig.from_array(rng.integers(0, 4, size=(side, side)))


def random_unstable_config(rng: np.random.Generator, side: int, high: int = 8) -> GridConfig:
    return GridConfig.from_array(rng.integers(0, high, size=(side, side)))


@pytest.fixture
def split_generator() -> GridConfig:
    return read_config(FIXTURES / "split_generator.txt")


@pytest.fixture
def app_config(tmp_path: Path) -> Config:
    return Config(
        log=LogConfig(level="DEBUG", file=str(tmp_path / "sandpile.log")),
        parallel=ParallelConfig(threads=1),
        output=OutputConfig(out_dir=tmp_path / "out"),
    )


@pytest.fixture
def run_cli(app_config: Config):
    def run(*argv: str) -> int:
        args = build_parser().parse_args(list(argv))
        return asyncio.run(dispatch(args, app_config))
    return run
