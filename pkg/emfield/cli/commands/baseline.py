from argparse import Namespace
from functools import partial
from pathlib import Path
from typing import Any, Dict, Literal
import logging
from pydantic import BaseModel, Field

from emfield.cli.runner import CommandRun, KernelFactory, add_output, add_scene_source, run_scene_command
from emfield.services.dataset_io import (
    atomic_write,
    export_heatmap,
    load_manifest,
    load_scene,
    load_truth,
    manifest_digests,
    pathloss_config,
    save_grid,
)
from emfield.services.exposure_map import baseline_free_space, baseline_log_distance, normalize_db_map
from emfield.services.metrics import evaluate_maps

logger = logging.getLogger(__name__)


class BaselineOptions(BaseModel):
    model: Literal["free-space", "log-distance"] = "log-distance"
    exponent: float = Field(2.0, gt=0)
    pl0_db: float = 40.0
    ref_distance: float = Field(1.0, gt=0)
    colormap: Literal["grayscale", "viridis"] = "grayscale"


def register(subparsers):
    parser = subparsers.add_parser("baseline", help="empirical path-loss baseline map")
    add_scene_source(parser, batch=True)
    add_output(parser)
    parser.add_argument("--model", choices=["free-space", "log-distance"], default="log-distance")
    parser.add_argument("--n", type=float, default=2.0, help="log-distance exponent")
    parser.add_argument("--pl0", type=float, default=40.0, help="path loss at d0 (dB)")
    parser.add_argument("--d0", type=float, default=1.0, help="reference distance (m)")
    parser.add_argument("--colormap", choices=["grayscale", "viridis"], default="grayscale")
    parser.set_defaults(handler=run)


def process(manifest_path: Path, out_dir: Path, kernel_for: KernelFactory, options: BaselineOptions) -> Dict[str, Any]:
    manifest = load_manifest(manifest_path)
    scene = load_scene(manifest)
    cfg = pathloss_config(manifest)
    truth = load_truth(manifest, scene.grid)

    with CommandRun("baseline", out_dir) as command:
        with command.timed("baseline"):
            if options.model == "free-space":
                loss_db = baseline_free_space(scene)
            else:
                loss_db = baseline_log_distance(
                    scene, options.exponent, options.ref_distance, options.pl0_db
                )
            normalized = normalize_db_map(loss_db, cfg, as_gain=True)

        save_grid(command.output("baseline_db.emfg"), loss_db)
        save_grid(command.output("baseline.emfg"), normalized)
        export_heatmap(normalized, command.output("baseline.png"), options.colormap)
        if truth is not None:
            metrics = evaluate_maps(normalized, truth)
            atomic_write(command.output("metrics.txt"), metrics.to_text().encode("utf-8"))
        record = command.finish(
            config={"manifest": str(manifest_path), **options.model_dump(), **cfg.model_dump()},
            input_digests=manifest_digests(manifest),
        )
    return {"outputs": record.outputs}


def run(args: Namespace) -> int:
    options = BaselineOptions(
        model=args.model,
        exponent=args.n,
        pl0_db=args.pl0,
        ref_distance=args.d0,
        colormap=args.colormap,
    )
    return run_scene_command(args, partial(process, options=options))
