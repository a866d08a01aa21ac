from argparse import Namespace
from pathlib import Path
import logging
from pydantic import BaseModel

from emfield.cli.runner import CommandRun, add_output, add_scene_source, prepare_scene
from emfield.core.errors import EXIT_OK
from emfield.models.loss import LossWeights
from emfield.physics.losses import loss_composite
from emfield.services.dataset_io import (
    atomic_write,
    file_digest,
    load_grid,
    load_truth,
    manifest_digests,
    pathloss_config,
)
from emfield.services.exposure_map import field_to_pathloss

logger = logging.getLogger(__name__)


class LossOptions(BaseModel):
    weights: LossWeights
    free_space_mask: bool = False
    with_data: bool = False


def register(subparsers):
    parser = subparsers.add_parser("loss", help="physics-loss breakdown of a stored field")
    add_scene_source(parser)
    parser.add_argument("field", type=Path, help="complex field (.emfg, c64)")
    add_output(parser, required=False)
    parser.add_argument("--lambda-pde", type=float, default=0.5)
    parser.add_argument("--lambda-vie", type=float, default=0.5)
    parser.add_argument("--beta", type=float, default=0.1)
    parser.add_argument("--pde-sign", choices=["-1", "+1", "-", "+"], default="-1")
    parser.add_argument("--free-space-mask", action="store_true")
    parser.add_argument("--with-data", action="store_true", help="add the data term against the manifest's truth map")
    parser.set_defaults(handler=run)


def run(args: Namespace) -> int:
    options = LossOptions(
        weights=LossWeights(
            lambda_pde=args.lambda_pde,
            lambda_vie=args.lambda_vie,
            beta=args.beta,
            pde_sign=args.pde_sign,
        ),
        free_space_mask=args.free_space_mask,
        with_data=args.with_data,
    )
    prepared = prepare_scene(args.manifest)
    field = load_grid(args.field).to_field(prepared.scene.grid)
    mask = prepared.scene.free_space_mask() if options.free_space_mask else None

    prediction = target = None
    if options.with_data:
        cfg = pathloss_config(prepared.manifest)
        target = load_truth(prepared.manifest, prepared.scene.grid)
        if target is None:
            logger.warning("--with-data given but the manifest has no truth_path; data term skipped")
        else:
            prediction = field_to_pathloss(field, cfg)

    breakdown = loss_composite(
        prepared.kernel,
        prepared.contrast,
        field,
        prepared.incident,
        weights=options.weights,
        prediction=prediction,
        target=target,
        mask=mask,
    )
    text = "pde\tvie\tdata\tcomposite\n" + breakdown.as_row() + "\n"
    print(text, end="")

    with CommandRun("loss", args.out) as command:
        atomic_write(command.output("loss.tsv"), text.encode("utf-8"))
        command.finish(
            config={"manifest": str(args.manifest), "field": str(args.field), **options.model_dump()},
            input_digests={**manifest_digests(prepared.manifest), str(args.field): file_digest(args.field)},
        )
    return EXIT_OK
