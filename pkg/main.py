import argparse
import asyncio
import logging
import sys
from collections.abc import Sequence
from logging.handlers import RotatingFileHandler
from pathlib import Path

from config import Config, ConfigError, load_config
from executor import SweepExecutor
from handlers import analyze, intervene, simulate, verify
from middlewares import ErrorMiddleware, LoggingMiddleware, wrap

ROUTERS = (simulate.router, analyze.router, intervene.router, verify.router)


def setup_logging(config: Config) -> None:
    log_dir = Path(config.log.file).parent
    log_dir.mkdir(parents=True, exist_ok=True)

    formatter = logging.Formatter(
        fmt="%(asctime)s | %(levelname)-8s | %(name)s | %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )

    file_handler = RotatingFileHandler(
        config.log.file,
        maxBytes=10 * 1024 * 1024,  # 10 MB
        backupCount=5,
        encoding="utf-8",
    )
    file_handler.setFormatter(formatter)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)

    root_logger = logging.getLogger()
    root_logger.setLevel(config.log.level)
    root_logger.addHandler(file_handler)
    root_logger.addHandler(console_handler)


logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sandpile",
        description="Wave analysis of abelian sandpile avalanches on the L x L wired lattice.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for router in ROUTERS:
        router.install(subparsers)
    return parser


async def dispatch(args: argparse.Namespace, config: Config) -> int:
    executor = SweepExecutor(config.parallel)
    executor.start()
    handler = wrap(args.handler, [LoggingMiddleware(), ErrorMiddleware()])
    try:
        return await handler(args, {"config": config, "executor": executor})
    finally:
        executor.close()


async def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config()
    except ConfigError as e:
        print(f"FATAL: {e}", file=sys.stderr)
        return e.exit_code
    setup_logging(config)
    logger.debug("Running %s with %d worker(s)", args.command, config.parallel.threads)
    return await dispatch(args, config)


if __name__ == "__main__":
    try:
        sys.exit(asyncio.run(main()))
    except KeyboardInterrupt:
        logger.info("Stopped by KeyboardInterrupt")
        sys.exit(130)
    except Exception as e:
        logger.critical("Fatal error: %s", e, exc_info=True)
        sys.exit(1)
