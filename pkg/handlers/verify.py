import argparse
import logging
from typing import Any

from artifacts import RunManifest, csv_text, json_text, rational_str, rational_to_json
from config import Config
from executor import SweepExecutor
from handlers import Router, UsageError, add_output_arguments, emit
from square import VERIFY_QUANTITIES, VerificationRow, verify_square

logger = logging.getLogger(__name__)
router = Router(name="verify")

VERIFICATION_HEADER = ("N", "quantity", "k", "closed_form", "algorithmic", "match")


def _arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n-min", type=int, default=1)
    parser.add_argument("--n-max", type=int, default=12)
    parser.add_argument("--background", type=int, choices=(0, 1, 2), default=0)
    parser.add_argument("--corrupt", choices=VERIFY_QUANTITIES, help="shift one closed form to exercise the mismatch path")
    add_output_arguments(parser, default_format="csv")


def render(rows: list[VerificationRow], manifest: RunManifest, fmt: str) -> str:
    if fmt == "csv":
        return csv_text(VERIFICATION_HEADER, [
            [
                str(r.n),
                r.quantity,
                "" if r.k is None else str(r.k),
                rational_str(r.closed_form),
                rational_str(r.algorithmic),
                "1" if r.match else "0",
            ]
            for r in rows
        ])
    return json_text({
        "manifest": manifest.to_json(),
        "rows": [
            {
                "N": r.n,
                "quantity": r.quantity,
                "k": r.k,
                "closed_form": rational_to_json(r.closed_form),
                "algorithmic": rational_to_json(r.algorithmic),
                "match": r.match,
            }
            for r in rows
        ],
    })


@router.command("verify-square", help="check every square closed form against the algorithms", arguments=_arguments)
async def verify(args: argparse.Namespace, data: dict[str, Any]) -> int:
    config: Config = data["config"]
    executor: SweepExecutor = data["executor"]

    if not 1 <= args.n_min <= args.n_max:
        raise UsageError(f"Need 1 <= --n-min <= --n-max, got {args.n_min}..{args.n_max}")

    sizes = list(range(args.n_min, args.n_max + 1))
    logger.info("Verifying squares N=%d..%d on background %d", args.n_min, args.n_max, args.background)
    per_size = await executor.map(verify_square, [(n, args.background, args.corrupt) for n in sizes])
    rows = [row for block in per_size for row in block]

    output = f"verification.{args.format}"
    manifest = RunManifest(
        command="verify-square",
        parameters={
            "n_min": args.n_min,
            "n_max": args.n_max,
            "background": args.background,
            "corrupt": args.corrupt,
            "format": args.format,
        },
        outputs=(output,) if args.out else (),
    )
    out_dir = config.with_out_dir(args.out).output.out_dir if args.out else None
    emit(render(rows, manifest, args.format), out_dir, output, manifest)

    mismatches = [r for r in rows if not r.match]
    for r in mismatches:
        logger.warning(
            "Mismatch at N=%d %s%s: closed form %s, algorithm %s",
            r.n, r.quantity, "" if r.k is None else f" k={r.k}", r.closed_form, r.algorithmic,
        )
    logger.info("Verification: %d rows, %d mismatches", len(rows), len(mismatches))
    return 1 if mismatches else 0
