import argparse
import logging
import sys
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path

from artifacts import MANIFEST_FILE, RunManifest, write_json, write_text
from lattice import SandpileError
from middlewares import Handler

logger = logging.getLogger(__name__)


class UsageError(SandpileError):
    """Flag values that parse but do not make sense together."""

    def __init__(self, message: str) -> None:
        super().__init__(message, exit_code=2)


@dataclass
class Command:
    name: str
    help: str
    handler: Handler
    arguments: Callable[[argparse.ArgumentParser], None] | None = None


@dataclass
class Router:
    name: str
    commands: list[Command] = field(default_factory=list)

    def command(self, name: str, help: str, arguments: Callable[[argparse.ArgumentParser], None] | None = None):
        def register(handler: Handler) -> Handler:
            self.commands.append(Command(name, help, handler, arguments))
            return handler
        return register

    def install(self, subparsers: argparse._SubParsersAction) -> None:
        for cmd in self.commands:
            parser = subparsers.add_parser(cmd.name, help=cmd.help, description=cmd.help)
            if cmd.arguments:
                cmd.arguments(parser)
            parser.set_defaults(handler=cmd.handler)


def add_output_arguments(parser: argparse.ArgumentParser, default_format: str) -> None:
    parser.add_argument("--out", help="directory for output files (default: SANDPILE_OUT_DIR)")
    parser.add_argument("--format", choices=("json", "csv"), default=default_format)


def add_config_arguments(parser: argparse.ArgumentParser, required: bool) -> None:
    parser.add_argument("--config", required=required, help="configuration file (.json or plain-text grid)")
    parser.add_argument("--input-format", choices=("json", "text"), help="override format sniffing of --config")


def emit(text: str, out_dir: Path | None, name: str, manifest: RunManifest) -> None:
    """Write a report to stdout and, when an output directory is set, next to its manifest."""
    sys.stdout.write(text)
    if out_dir is None:
        return
    write_text(out_dir / name, text)
    write_json(out_dir / MANIFEST_FILE, manifest.to_json())
    logger.info("Wrote %s and %s to %s", name, MANIFEST_FILE, out_dir)
