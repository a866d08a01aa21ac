from argparse import Namespace
from pathlib import Path
from typing import Literal, Optional
import logging
from pydantic import BaseModel, Field

from emfield.cli.runner import CommandRun, add_output
from emfield.core.errors import EXIT_OK
from emfield.services.dataset_io import atomic_write, file_digest, load_manifest, load_map, manifest_grid
from emfield.services.metrics import DEFAULT_WINDOW, evaluate_maps

logger = logging.getLogger(__name__)


class MetricsOptions(BaseModel):
    ssim_mode: Literal["global", "windowed"] = "global"
    window: int = Field(DEFAULT_WINDOW, ge=1)
    c1: Optional[float] = Field(None, gt=0)
    c2: Optional[float] = Field(None, gt=0)


def register(subparsers):
    parser = subparsers.add_parser("metrics", help="NMSE / RMSE / MAE / SSIM between two maps")
    parser.add_argument("pred", type=Path, help="predicted map (.emfg f32 or 8-bit image)")
    parser.add_argument("truth", type=Path, help="ground-truth map (.emfg f32 or 8-bit image)")
    parser.add_argument("--manifest", type=Path, default=None, help="take the grid geometry from a manifest")
    parser.add_argument("--ssim-mode", choices=["global", "windowed"], default="global")
    parser.add_argument("--window", type=int, default=DEFAULT_WINDOW, help="windowed SSIM side (odd)")
    parser.add_argument("--c1", type=float, default=None)
    parser.add_argument("--c2", type=float, default=None)
    add_output(parser, required=False)
    parser.set_defaults(handler=run)


def run(args: Namespace) -> int:
    options = MetricsOptions(ssim_mode=args.ssim_mode, window=args.window, c1=args.c1, c2=args.c2)
    grid = manifest_grid(load_manifest(args.manifest)) if args.manifest else None
    pred = load_map(args.pred, grid)
    truth = load_map(args.truth, grid if grid is not None else pred.grid)

    report = evaluate_maps(
        pred, truth, ssim_mode=options.ssim_mode, c1=options.c1, c2=options.c2, window=options.window
    )
    print(report.to_text(), end="")

    with CommandRun("metrics", args.out) as command:
        atomic_write(command.output("metrics.txt"), report.to_text().encode("utf-8"))
        command.finish(
            config={"pred": str(args.pred), "truth": str(args.truth), **options.model_dump()},
            input_digests={str(p): file_digest(p) for p in (args.pred, args.truth)},
        )
    return EXIT_OK
