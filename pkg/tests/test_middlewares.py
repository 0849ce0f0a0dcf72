import argparse
import asyncio

import pytest

from lattice import DomainError
from middlewares import CommandMiddleware, ErrorMiddleware, LoggingMiddleware, wrap


def _call(handler, middlewares):
    args = argparse.Namespace(command="test")
    return asyncio.run(wrap(handler, middlewares)(args, {}))


def test_result_passes_through():
    async def handler(args, data):
        return 0
    assert _call(handler, [LoggingMiddleware(), ErrorMiddleware()]) == 0


def test_domain_errors_become_exit_codes(caplog):
    async def handler(args, data):
        raise DomainError("vertex (9,9) lies outside the 3x3 box")
    assert _call(handler, [LoggingMiddleware(), ErrorMiddleware()]) == 3
    assert "outside the 3x3 box" in caplog.text


def test_unexpected_errors_propagate():
    async def handler(args, data):
        raise ZeroDivisionError
    with pytest.raises(ZeroDivisionError):
        _call(handler, [LoggingMiddleware(), ErrorMiddleware()])


def test_first_middleware_is_outermost():
    calls = []

    class Tag(CommandMiddleware):
        def __init__(self, name):
            self.name = name

        async def __call__(self, handler, args, data):
            calls.append(self.name)
            return await handler(args, data)

    async def handler(args, data):
        calls.append("handler")
        return 0

    _call(handler, [Tag("outer"), Tag("inner")])
    assert calls == ["outer", "inner", "handler"]
