import argparse
import logging
from typing import Any

from artifacts import (
    MANIFEST_FILE,
    RunManifest,
    TrajectoryWriter,
    histogram_rows,
    read_config,
    write_config,
    write_csv,
    write_json,
)
from config import Config
from handlers import Router, UsageError, add_config_arguments
from lattice import GridConfig, require_stable
from markov_chain import MAX_SEED, RNG_NAME, generator_size_histogram, make_rng, run

logger = logging.getLogger(__name__)
router = Router(name="simulate")

TRAJECTORY_FILE = "trajectory.jsonl"
FINAL_CONFIG_FILE = "final_config.json"
HISTOGRAM_FILE = "generator_sizes.csv"


def _arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--size", type=int, help="lattice side L (all-zero start unless --config is given)")
    parser.add_argument("--steps", type=int, default=0)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", help="output directory (default: SANDPILE_OUT_DIR)")
    parser.add_argument("--checkpoint-every", type=int, help="write the configuration every K steps")
    parser.add_argument("--histogram", action="store_true", help="also write generator sizes of the final config")
    add_config_arguments(parser, required=False)


def _initial_config(args: argparse.Namespace) -> GridConfig:
    if args.config:
        cfg = read_config(args.config, args.input_format)
        if args.size is not None and args.size != cfg.side:
            raise UsageError(f"--size {args.size} contradicts the L={cfg.side} config in {args.config}")
        require_stable(cfg, "simulate")
        return cfg
    if args.size is None:
        raise UsageError("simulate needs --size or --config")
    if args.size < 1:
        raise UsageError(f"--size must be positive, got {args.size}")
    return GridConfig.filled(args.size)


@router.command("simulate", help="run the sandpile Markov chain", arguments=_arguments)
async def simulate(args: argparse.Namespace, data: dict[str, Any]) -> int:
    config: Config = data["config"]
    if args.steps < 0:
        raise UsageError(f"--steps must be non-negative, got {args.steps}")
    if args.checkpoint_every is not None and args.checkpoint_every < 1:
        raise UsageError(f"--checkpoint-every must be positive, got {args.checkpoint_every}")
    if not 0 <= args.seed <= MAX_SEED:
        raise UsageError(f"--seed must lie in 0..{MAX_SEED}, got {args.seed}")

    cfg = _initial_config(args)
    out_dir = config.with_out_dir(args.out).output.out_dir
    outputs = [TRAJECTORY_FILE, FINAL_CONFIG_FILE] + ([HISTOGRAM_FILE] if args.histogram else [])
    manifest = RunManifest(
        command="simulate",
        parameters={
            "size": cfg.side,
            "steps": args.steps,
            "config": args.config,
            "checkpoint_every": args.checkpoint_every,
            "histogram": args.histogram,
        },
        rng_name=RNG_NAME,
        seed=args.seed,
        outputs=tuple(outputs),
    )

    rng = make_rng(args.seed)
    with TrajectoryWriter(out_dir / TRAJECTORY_FILE, manifest) as writer:
        final, summaries = run(
            cfg, args.steps, rng,
            checkpoint_every=args.checkpoint_every,
            on_checkpoint=writer.checkpoint,
            on_step=writer.step,
        )

    write_config(out_dir / FINAL_CONFIG_FILE, final)
    write_json(out_dir / MANIFEST_FILE, manifest.to_json())
    if args.histogram:
        histogram = generator_size_histogram(final)
        write_csv(out_dir / HISTOGRAM_FILE, ("size", "count"), histogram_rows(histogram))
        logger.info("Final configuration holds %d generators", sum(histogram.values()))

    logger.info(
        "Simulated %d steps on L=%d (seed %d), %d topplings in total; outputs in %s",
        args.steps, cfg.side, args.seed, sum(s.size for s in summaries), out_dir,
    )
    return 0
