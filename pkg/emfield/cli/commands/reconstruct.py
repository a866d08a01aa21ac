from argparse import Namespace
from pathlib import Path
from typing import Literal
import logging
from pydantic import BaseModel

from emfield.cli.runner import CommandRun, add_output, add_scene_source, prepare_scene
from emfield.core.config import settings
from emfield.core.errors import EXIT_OK
from emfield.models.loss import LossWeights
from emfield.models.optimizer import OptimizerConfig
from emfield.physics.reconstructor import reconstruct_field
from emfield.services.dataset_io import atomic_write, export_heatmap, manifest_digests, pathloss_config, save_grid
from emfield.services.exposure_map import field_to_pathloss

logger = logging.getLogger(__name__)


class ReconstructOptions(BaseModel):
    weights: LossWeights
    optimizer: OptimizerConfig
    free_space_mask: bool = False
    colormap: Literal["grayscale", "viridis"] = "grayscale"


def register(subparsers):
    parser = subparsers.add_parser("reconstruct", help="gradient-descent field reconstruction on the physics loss")
    add_scene_source(parser)
    add_output(parser)
    parser.add_argument("--lambda-pde", type=float, default=0.5)
    parser.add_argument("--lambda-vie", type=float, default=0.5)
    parser.add_argument("--beta", type=float, default=0.1)
    parser.add_argument("--pde-sign", choices=["-1", "+1", "-", "+"], default="-1")
    parser.add_argument("--max-iters", type=int, default=None, help=f"default {settings.RECON_MAX_ITERS}")
    parser.add_argument("--step", type=float, default=None, help=f"initial step (default {settings.RECON_STEP_INIT:g})")
    parser.add_argument("--free-space-mask", action="store_true", help="evaluate the PDE loss on free-space cells only")
    parser.add_argument("--colormap", choices=["grayscale", "viridis"], default="grayscale")
    parser.set_defaults(handler=run)


def run(args: Namespace) -> int:
    optimizer = OptimizerConfig(
        **{k: v for k, v in (("max_iters", args.max_iters), ("step_init", args.step)) if v is not None}
    )
    options = ReconstructOptions(
        weights=LossWeights(
            lambda_pde=args.lambda_pde,
            lambda_vie=args.lambda_vie,
            beta=args.beta,
            pde_sign=args.pde_sign,
        ),
        optimizer=optimizer,
        free_space_mask=args.free_space_mask,
        colormap=args.colormap,
    )
    prepared = prepare_scene(Path(args.manifest))
    cfg = pathloss_config(prepared.manifest)
    mask = prepared.scene.free_space_mask() if options.free_space_mask else None

    with CommandRun("reconstruct", args.out) as command:
        with command.timed("reconstruct"):
            field, report = reconstruct_field(
                prepared.kernel,
                prepared.contrast,
                prepared.incident,
                weights=options.weights,
                cfg=options.optimizer,
                mask=mask,
            )
        pathloss = field_to_pathloss(field, cfg)

        save_grid(command.output("e_rec.emfg"), field)
        atomic_write(command.output("loss_history.tsv"), report.history_table().encode("utf-8"))
        save_grid(command.output("pathloss.emfg"), pathloss)
        export_heatmap(pathloss, command.output("pathloss.png"), options.colormap)
        command.finish(
            config={"manifest": str(args.manifest), **options.model_dump(), **cfg.model_dump()},
            input_digests=manifest_digests(prepared.manifest),
            reconstruction_report=report,
        )

    print(f"{report.stop_reason}: {report.iterations} iterations, composite {report.loss_history[-1].composite:.6e}")
    return EXIT_OK
