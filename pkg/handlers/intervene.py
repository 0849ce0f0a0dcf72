import argparse
import logging
from typing import Any

from artifacts import (
    INTERVENTION_HEADER,
    RunManifest,
    csv_text,
    intervention_rows,
    intervention_to_json,
    json_text,
    read_config,
)
from config import Config
from executor import SweepExecutor
from handlers import Router, add_config_arguments, add_output_arguments, emit
from handlers.analyze import select_generators
from intervention import (
    CornerstoneReport,
    InterventionResult,
    baseline_size,
    cornerstones_from_table,
    removal_row,
    require_maximal_generator,
)

logger = logging.getLogger(__name__)
router = Router(name="intervene")


def _arguments(parser: argparse.ArgumentParser) -> None:
    add_config_arguments(parser, required=True)
    parser.add_argument("--generator", default="auto", help="'r,c' to study the generator containing r,c; 'auto' for all")
    add_output_arguments(parser, default_format="csv")


@router.command("intervene", help="per-vertex removal table, stability level and cornerstones", arguments=_arguments)
async def intervene(args: argparse.Namespace, data: dict[str, Any]) -> int:
    config: Config = data["config"]
    executor: SweepExecutor = data["executor"]

    cfg = read_config(args.config, args.input_format)
    generators = select_generators(cfg, args.generator)
    logger.info("Intervention sweep over %d generator(s) on L=%d", len(generators), cfg.side)

    results: list[tuple[CornerstoneReport, list[InterventionResult]]] = []
    for generator in generators:
        generator = require_maximal_generator(cfg, generator)
        baseline = baseline_size(cfg, generator)
        table = await executor.map(removal_row, [(cfg, generator, baseline, v) for v in generator.members])
        report = cornerstones_from_table(generator, table)
        logger.info(
            "Generator at %s (|A|=%d): stability level %s, %d cornerstone(s)",
            generator.anchor, len(generator), report.stability_level, len(report.cornerstones),
        )
        results.append((report, table))

    output = f"intervention.{args.format}"
    manifest = RunManifest(
        command="intervene",
        parameters={"config": args.config, "generator": args.generator, "format": args.format},
        outputs=(output,) if args.out else (),
    )
    if args.format == "csv":
        text = csv_text(INTERVENTION_HEADER, [row for report, table in results for row in intervention_rows(report, table)])
    else:
        text = json_text({
            "manifest": manifest.to_json(),
            "generators": [intervention_to_json(report, table) for report, table in results],
        })
    out_dir = config.with_out_dir(args.out).output.out_dir if args.out else None
    emit(text, out_dir, output, manifest)
    return 0
