"""Reading and writing configurations, reports and trajectories.

All numeric output is exact. In CSV a rational is a ``num/den`` string or a
pair of numerator and denominator columns; in JSON it is a
``{"num": ..., "den": ...}`` object. Nothing here embeds timestamps, so equal
inputs give byte-identical files.
"""

import csv
import io
import json
import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, TextIO

from avalanche import AnalysisReport, WaveTree
from intervention import CornerstoneReport, InterventionResult
from lattice import DomainError, GridConfig, SandpileError, Vertex
from markov_chain import StepSummary
from waves import WaveTrace

logger = logging.getLogger(__name__)

ARTIFACT_VERSION = "1"
MANIFEST_FILE = "manifest.json"


class InputDataError(SandpileError):
    def __init__(self, message: str, path: str | Path | None = None) -> None:
        super().__init__(f"{path}: {message}" if path else message, exit_code=3)
        self.path = path


def rational_str(value: Fraction | int) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def rational_to_json(value: Fraction | int) -> dict[str, str]:
    value = Fraction(value)
    return {"num": str(value.numerator), "den": str(value.denominator)}


def rational_from_json(data: Mapping[str, str]) -> Fraction:
    return Fraction(int(data["num"]), int(data["den"]))


def vertex_to_json(v: Vertex) -> list[int]:
    return [v.row, v.col]


def parse_vertex(raw: str) -> Vertex:
    """``"r,c"`` to a vertex."""
    try:
        row, col = (int(part) for part in raw.split(","))
    except ValueError:
        raise DomainError(f"Expected a vertex as 'row,col', got {raw!r}") from None
    return Vertex(row, col)


# ---- configurations ----

def config_to_json(cfg: GridConfig) -> dict[str, Any]:
    return {"L": cfg.side, "heights": list(cfg.heights)}


def config_from_json(data: Any, path: str | Path | None = None) -> GridConfig:
    if not isinstance(data, dict) or "L" not in data or "heights" not in data:
        raise InputDataError('expected an object with "L" and "heights"', path)
    side, heights = data["L"], data["heights"]
    if not isinstance(side, int) or side < 1:
        raise InputDataError(f"L must be a positive integer, got {side!r}", path)
    if not isinstance(heights, list):
        raise InputDataError("heights must be a list", path)
    flat = [h for row in heights for h in row] if heights and isinstance(heights[0], list) else heights
    if len(flat) != side * side or not all(isinstance(h, int) for h in flat):
        raise InputDataError(f"heights must hold {side * side} integers", path)
    return GridConfig(side, tuple(flat))


def config_to_text(cfg: GridConfig) -> str:
    return str(cfg) + "\n"


def config_from_text(text: str, path: str | Path | None = None) -> GridConfig:
    """Whitespace-separated rows; blank lines and ``#`` comments are skipped."""
    rows = []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append([int(tok) for tok in line.split()])
        except ValueError:
            raise InputDataError(f"line {number}: non-integer height", path) from None
    if not rows:
        raise InputDataError("no grid rows found", path)
    if any(len(r) != len(rows) for r in rows):
        raise InputDataError(f"grid is not square ({len(rows)} rows)", path)
    return GridConfig.from_rows(rows)


def sniff_format(path: str | Path) -> str:
    return "json" if Path(path).suffix.lower() == ".json" else "text"


def read_config(path: str | Path, fmt: str | None = None) -> GridConfig:
    fmt = fmt or sniff_format(path)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputDataError(f"cannot read config: {e.strerror}", path) from e
    if fmt == "json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise InputDataError(f"invalid JSON: {e.msg} (line {e.lineno})", path) from e
        cfg = config_from_json(data, path)
    else:
        cfg = config_from_text(text, path)
    logger.debug("Loaded L=%d config from %s (%s)", cfg.side, path, fmt)
    return cfg


def write_config(path: str | Path, cfg: GridConfig, fmt: str | None = None) -> Path:
    path = Path(path)
    fmt = fmt or sniff_format(path)
    if fmt == "json":
        return write_json(path, config_to_json(cfg))
    return write_text(path, config_to_text(cfg))


# ---- reports ----

def wave_trace_to_json(trace: WaveTrace) -> dict[str, Any]:
    return {"size": trace.size, "vertices": [vertex_to_json(v) for v in trace.toppled]}


def wave_tree_to_json(tree: WaveTree) -> dict[str, Any]:
    return {"wave_size": tree.wave_size, "branches": [report_to_json(b) for b in tree.branches]}


def report_to_json(report: AnalysisReport) -> dict[str, Any]:
    return {
        "generator": [vertex_to_json(v) for v in report.generator.members],
        "expected_size": rational_to_json(report.expected_size),
        "depth": report.depth,
        "wave_tree": wave_tree_to_json(report.wave_tree),
    }


INTERVENTION_HEADER = (
    "row", "col", "expected_after_num", "expected_after_den", "ratio_num", "ratio_den", "is_cornerstone",
    "generator_row", "generator_col",
)


def _rational_cells(value: Fraction) -> tuple[str, str]:
    value = Fraction(value)
    return str(value.numerator), str(value.denominator)


def intervention_rows(report: CornerstoneReport, table: Sequence[InterventionResult]) -> list[list[str]]:
    anchor = report.generator.anchor
    return [
        [
            str(r.target.row),
            str(r.target.col),
            *_rational_cells(r.expected_size_after),
            *_rational_cells(r.ratio),
            "1" if r.target in report.cornerstones else "0",
            str(anchor.row),
            str(anchor.col),
        ]
        for r in table
    ]


def intervention_to_json(report: CornerstoneReport, table: Sequence[InterventionResult]) -> dict[str, Any]:
    return {
        "generator": [vertex_to_json(v) for v in report.generator.members],
        "stability_level": rational_to_json(report.stability_level),
        "cornerstones": [vertex_to_json(v) for v in sorted(report.cornerstones)],
        "rows": [
            {
                "target": vertex_to_json(r.target),
                "expected_size_after": rational_to_json(r.expected_size_after),
                "baseline": rational_to_json(r.baseline),
                "ratio": rational_to_json(r.ratio),
            }
            for r in table
        ],
    }


def histogram_rows(histogram: Mapping[int, int]) -> list[list[str]]:
    return [[str(size), str(count)] for size, count in sorted(histogram.items())]


def csv_text(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> Path:
    return write_text(path, csv_text(header, rows))


def json_text(data: Any) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def write_json(path: str | Path, data: Any) -> Path:
    return write_text(path, json_text(data))


# ---- manifests and trajectories ----

@dataclass(frozen=True)
class RunManifest:
    command: str
    parameters: Mapping[str, Any] = field(default_factory=dict)
    rng_name: str | None = None
    seed: int | None = None
    artifact_version: str = ARTIFACT_VERSION
    outputs: tuple[str, ...] = ()

    def to_json(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "parameters": {k: self.parameters[k] for k in sorted(self.parameters)},
            "rng": self.rng_name,
            "seed": self.seed,
            "artifact_version": self.artifact_version,
            "outputs": list(self.outputs),
        }


class TrajectoryWriter:
    """JSON-lines trajectory: a manifest header, then one record per step."""

    def __init__(self, path: str | Path, manifest: RunManifest) -> None:
        self._path = Path(path)
        self._manifest = manifest
        self._file: TextIO | None = None

    def open(self) -> None:
        self._path.parent.mkdir(parents=True, exist_ok=True)
        self._file = self._path.open("w", encoding="utf-8", newline="\n")
        self._write({"manifest": self._manifest.to_json()})

    def close(self) -> None:
        if self._file:
            self._file.close()
            self._file = None
            logger.debug("Trajectory closed: %s", self._path)

    @property
    def file(self) -> TextIO:
        if self._file is None:
            raise RuntimeError("Trajectory writer not opened")
        return self._file

    def __enter__(self) -> "TrajectoryWriter":
        self.open()
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()

    def _write(self, record: dict[str, Any]) -> None:
        self.file.write(json.dumps(record, sort_keys=True) + "\n")

    def step(self, summary: StepSummary) -> None:
        self._write({"t": summary.t, "drop": vertex_to_json(summary.drop), "size": summary.size})

    def checkpoint(self, t: int, cfg: GridConfig) -> None:
        self._write({"t": t, "checkpoint": config_to_json(cfg)})


def read_trajectory(path: str | Path) -> tuple[dict[str, Any], list[dict[str, Any]]]:
    """Manifest header and the remaining records of a trajectory file."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise InputDataError("empty trajectory", path)
    header = json.loads(lines[0])
    if "manifest" not in header:
        raise InputDataError("first record is not a manifest", path)
    return header["manifest"], [json.loads(line) for line in lines[1:]]
