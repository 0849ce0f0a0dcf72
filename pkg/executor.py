import asyncio
import logging
from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor
from typing import Any, TypeVar

from config import ParallelConfig

logger = logging.getLogger(__name__)

T = TypeVar("T")


class SweepExecutor:
    """Fans pure per-item work out to worker processes.

    Results always come back in input order. With a single worker everything
    runs inline in the calling process.
    """

    def __init__(self, config: ParallelConfig) -> None:
        self._workers = config.threads
        self._pool: ProcessPoolExecutor | None = None
        self._started = False

    @property
    def workers(self) -> int:
        return self._workers

    def start(self) -> None:
        if self._workers > 1:
            self._pool = ProcessPoolExecutor(max_workers=self._workers)
        self._started = True
        logger.debug("Sweep executor started with %d worker(s)", self._workers)

    def close(self) -> None:
        if self._pool:
            self._pool.shutdown(wait=True)
            self._pool = None
        if self._started:
            self._started = False
            logger.debug("Sweep executor closed")

    @property
    def pool(self) -> ProcessPoolExecutor | None:
        if not self._started:
            raise RuntimeError("Sweep executor not started")
        return self._pool

    async def map(self, fn: Callable[..., T], items: Iterable[Any]) -> list[T]:
        """``fn(item)`` for every item; tuple items are unpacked into arguments."""
        pool = self.pool
        args = [item if isinstance(item, tuple) else (item,) for item in items]
        if pool is None:
            return [fn(*a) for a in args]
        loop = asyncio.get_running_loop()
        return list(await asyncio.gather(*(loop.run_in_executor(pool, fn, *a) for a in args)))
