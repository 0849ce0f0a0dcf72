import argparse
import logging
from fractions import Fraction
from typing import Any

from artifacts import (
    RunManifest,
    csv_text,
    json_text,
    parse_vertex,
    rational_str,
    rational_to_json,
    read_config,
    report_to_json,
    wave_trace_to_json,
)
from avalanche import AnalysisReport, brute_force_expected_size, expected_avalanche_size
from config import Config
from executor import SweepExecutor
from handlers import Router, add_config_arguments, add_output_arguments, emit
from lattice import CRITICAL_HEIGHT, GridConfig, PreconditionError, check_vertex
from waves import Generator, WaveTrace, find_generators, first_wave

logger = logging.getLogger(__name__)
router = Router(name="analyze")

ANALYSIS_HEADER = ("anchor_row", "anchor_col", "vertices", "first_wave", "expected_size", "depth", "oracle", "match")


def _arguments(parser: argparse.ArgumentParser) -> None:
    add_config_arguments(parser, required=True)
    parser.add_argument("--generator", default="auto", help="'r,c' to analyze the generator containing r,c; 'auto' for all")
    parser.add_argument("--oracle", action="store_true", help="cross-check against brute-force relaxation")
    parser.add_argument("--trace", action="store_true", help="include the vertices toppled by the first wave (json only)")
    add_output_arguments(parser, default_format="json")


def select_generators(cfg: GridConfig, selector: str) -> list[Generator]:
    generators = find_generators(cfg)
    if selector == "auto":
        return generators
    v = parse_vertex(selector)
    check_vertex(v, cfg.side)
    if cfg.height(v) != CRITICAL_HEIGHT:
        raise PreconditionError(f"Selected vertex {v} has height {cfg.height(v)}, not {CRITICAL_HEIGHT}")
    return [g for g in generators if v in g]


Result = tuple[AnalysisReport, Fraction | None, WaveTrace | None]


def analyze_generator(cfg: GridConfig, generator: Generator, oracle: bool, trace: bool = False) -> Result:
    report = expected_avalanche_size(cfg, generator)
    brute = brute_force_expected_size(cfg, generator.vertices) if oracle else None
    wave = first_wave(cfg, generator).wave if trace else None
    return report, brute, wave


def render(results: list[Result], manifest: RunManifest, fmt: str) -> str:
    if fmt == "csv":
        rows = []
        for report, brute, _ in results:
            anchor = report.generator.anchor
            rows.append([
                str(anchor.row),
                str(anchor.col),
                str(len(report.generator)),
                str(report.wave_tree.wave_size),
                rational_str(report.expected_size),
                str(report.depth),
                "" if brute is None else rational_str(brute),
                "" if brute is None else str(int(brute == report.expected_size)),
            ])
        return csv_text(ANALYSIS_HEADER, rows)

    reports = []
    for report, brute, wave in results:
        entry = report_to_json(report)
        if wave is not None:
            entry["first_wave"] = wave_trace_to_json(wave)
        if brute is not None:
            entry["oracle"] = {"expected_size": rational_to_json(brute), "match": brute == report.expected_size}
        reports.append(entry)
    return json_text({"manifest": manifest.to_json(), "reports": reports})


@router.command("analyze", help="expected avalanche size and depth of every generator", arguments=_arguments)
async def analyze(args: argparse.Namespace, data: dict[str, Any]) -> int:
    config: Config = data["config"]
    executor: SweepExecutor = data["executor"]

    cfg = read_config(args.config, args.input_format)
    generators = select_generators(cfg, args.generator)
    logger.info("Analyzing %d generator(s) on L=%d", len(generators), cfg.side)

    results = await executor.map(analyze_generator, [(cfg, g, args.oracle, args.trace) for g in generators])

    output = f"analysis.{args.format}"
    manifest = RunManifest(
        command="analyze",
        parameters={"config": args.config, "generator": args.generator, "oracle": args.oracle, "trace": args.trace, "format": args.format},
        outputs=(output,) if args.out else (),
    )
    out_dir = config.with_out_dir(args.out).output.out_dir if args.out else None
    emit(render(results, manifest, args.format), out_dir, output, manifest)

    mismatches = [r.generator.anchor for r, brute, _ in results if brute is not None and brute != r.expected_size]
    for anchor in mismatches:
        logger.warning("Oracle mismatch for the generator at %s", anchor)
    return 1 if mismatches else 0
