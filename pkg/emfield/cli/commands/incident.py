from argparse import Namespace
from functools import partial
from pathlib import Path
from typing import Any, Dict, Literal
import logging
from pydantic import BaseModel

from emfield.cli.runner import (
    CommandRun,
    KernelFactory,
    add_output,
    add_scene_source,
    run_scene_command,
)
from emfield.physics.greens_operator import incident_field
from emfield.services.dataset_io import export_heatmap, load_manifest, load_scene, manifest_digests, save_grid
from emfield.services.exposure_map import field_magnitude_map

logger = logging.getLogger(__name__)


class IncidentOptions(BaseModel):
    colormap: Literal["grayscale", "viridis"] = "grayscale"


def register(subparsers):
    parser = subparsers.add_parser("incident", help="incident field of the transmitter in free space")
    add_scene_source(parser, batch=True)
    add_output(parser)
    parser.add_argument("--colormap", choices=["grayscale", "viridis"], default="grayscale")
    parser.set_defaults(handler=run)


def process(manifest_path: Path, out_dir: Path, kernel_for: KernelFactory, options: IncidentOptions) -> Dict[str, Any]:
    manifest = load_manifest(manifest_path)
    scene = load_scene(manifest)

    with CommandRun("incident", out_dir) as command:
        with command.timed("incident"):
            e_inc = incident_field(scene)
        save_grid(command.output("e_inc.emfg"), e_inc)
        export_heatmap(field_magnitude_map(e_inc), command.output("e_inc_magnitude.png"), options.colormap)
        record = command.finish(
            config={"manifest": str(manifest_path), **options.model_dump()},
            input_digests=manifest_digests(manifest),
        )
    return {"outputs": record.outputs}


def run(args: Namespace) -> int:
    options = IncidentOptions(colormap=args.colormap)
    return run_scene_command(args, partial(process, options=options))
