import argparse
import logging
import time
from collections.abc import Awaitable, Callable, Sequence
from typing import Any

from lattice import SandpileError

logger = logging.getLogger(__name__)

Handler = Callable[[argparse.Namespace, dict[str, Any]], Awaitable[int]]


class CommandMiddleware:
    async def __call__(self, handler: Handler, args: argparse.Namespace, data: dict[str, Any]) -> int:
        return await handler(args, data)


class LoggingMiddleware(CommandMiddleware):
    async def __call__(self, handler: Handler, args: argparse.Namespace, data: dict[str, Any]) -> int:
        start = time.monotonic()
        logger.debug("Command %s: %s", args.command, vars(args))
        try:
            result = await handler(args, data)
            elapsed = (time.monotonic() - start) * 1000
            logger.info("Command %s finished in %.1f ms with exit code %d", args.command, elapsed, result)
            return result
        except Exception as e:
            elapsed = (time.monotonic() - start) * 1000
            logger.error(
                "Command %s failed after %.1f ms: %s: %s",
                args.command, elapsed, type(e).__name__, e,
            )
            raise


class ErrorMiddleware(CommandMiddleware):
    """Turns domain errors into their exit codes; anything else propagates."""

    async def __call__(self, handler: Handler, args: argparse.Namespace, data: dict[str, Any]) -> int:
        try:
            return await handler(args, data)
        except SandpileError as e:
            logger.error("%s: %s", type(e).__name__, e)
            return e.exit_code


def wrap(handler: Handler, middlewares: Sequence[CommandMiddleware]) -> Handler:
    """Compose ``middlewares`` around ``handler``; the first one is outermost."""
    wrapped = handler
    for middleware in reversed(middlewares):
        wrapped = _bind(middleware, wrapped)
    return wrapped


def _bind(middleware: CommandMiddleware, inner: Handler) -> Handler:
    async def call(args: argparse.Namespace, data: dict[str, Any]) -> int:
        return await middleware(inner, args, data)
    return call
