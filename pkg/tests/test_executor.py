import asyncio

import pytest

from config import ParallelConfig
from executor import SweepExecutor
from lattice import Vertex, sink_degree


def _sink_degrees(threads: int) -> list[int]:
    executor = SweepExecutor(ParallelConfig(threads=threads))
    executor.start()
    try:
        items = [(Vertex(r, c), 4) for r in range(1, 5) for c in range(1, 5)]
        return asyncio.run(executor.map(sink_degree, items))
    finally:
        executor.close()


def test_inline_and_pooled_results_agree_and_keep_order():
    inline = _sink_degrees(1)
    assert inline == [2, 1, 1, 2, 1, 0, 0, 1, 1, 0, 0, 1, 2, 1, 1, 2]
    assert _sink_degrees(2) == inline


def test_executor_must_be_started():
    executor = SweepExecutor(ParallelConfig(threads=1))
    with pytest.raises(RuntimeError):
        asyncio.run(executor.map(abs, [1]))
