from argparse import Namespace
from functools import partial
from pathlib import Path
from typing import Any, Dict, Literal
import logging
from pydantic import BaseModel, Field

from emfield.cli.runner import CommandRun, KernelFactory, add_output, add_scene_source, prepare_scene, run_scene_command
from emfield.core.config import settings
from emfield.physics.forward_solver import solve_forward
from emfield.services.dataset_io import (
    atomic_write,
    export_heatmap,
    load_truth,
    manifest_digests,
    pathloss_config,
    save_grid,
)
from emfield.services.exposure_map import field_to_pathloss
from emfield.services.metrics import evaluate_maps

logger = logging.getLogger(__name__)


class SolveOptions(BaseModel):
    tol: float = Field(..., gt=0, lt=1)
    max_iter: int = Field(..., ge=1)
    restart: int = Field(..., ge=1)
    colormap: Literal["grayscale", "viridis"] = "grayscale"


def register(subparsers):
    parser = subparsers.add_parser("solve", help="forward VIE solve for the total field")
    add_scene_source(parser, batch=True)
    add_output(parser)
    parser.add_argument("--tol", type=float, default=None, help=f"relative residual (default {settings.SOLVER_TOL:g})")
    parser.add_argument("--max-iter", type=int, default=None, help=f"default {settings.SOLVER_MAX_ITER}")
    parser.add_argument("--restart", type=int, default=None, help=f"GMRES cycle length (default {settings.SOLVER_RESTART})")
    parser.add_argument("--colormap", choices=["grayscale", "viridis"], default="grayscale")
    parser.set_defaults(handler=run)


def process(manifest_path: Path, out_dir: Path, kernel_for: KernelFactory, options: SolveOptions) -> Dict[str, Any]:
    prepared = prepare_scene(manifest_path, kernel_for)
    cfg = pathloss_config(prepared.manifest)
    truth = load_truth(prepared.manifest, prepared.scene.grid)

    with CommandRun("solve", out_dir) as command:
        with command.timed("solve"):
            e_tot, report = solve_forward(
                prepared.kernel,
                prepared.contrast,
                prepared.incident,
                tol=options.tol,
                max_iter=options.max_iter,
                restart=options.restart,
            )
        pathloss = field_to_pathloss(e_tot, cfg)

        save_grid(command.output("e_tot.emfg"), e_tot)
        save_grid(command.output("pathloss.emfg"), pathloss)
        export_heatmap(pathloss, command.output("pathloss.png"), options.colormap)
        # Ground truth in the manifest: score the map right away
        if truth is not None:
            metrics = evaluate_maps(pathloss, truth)
            atomic_write(command.output("metrics.txt"), metrics.to_text().encode("utf-8"))

        record = command.finish(
            config={"manifest": str(manifest_path), **options.model_dump(), **cfg.model_dump()},
            input_digests=manifest_digests(prepared.manifest),
            solve_report=report,
        )
    return {"outputs": record.outputs, "converged": report.converged}


def run(args: Namespace) -> int:
    options = SolveOptions(
        tol=settings.SOLVER_TOL if args.tol is None else args.tol,
        max_iter=settings.SOLVER_MAX_ITER if args.max_iter is None else args.max_iter,
        restart=settings.SOLVER_RESTART if args.restart is None else args.restart,
        colormap=args.colormap,
    )
    return run_scene_command(args, partial(process, options=options))
