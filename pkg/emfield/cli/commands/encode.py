from argparse import Namespace
import io
import logging
import numpy as np

from emfield.cli.runner import CommandRun, add_output, add_scene_source
from emfield.core.errors import EXIT_OK
from emfield.physics.greens_operator import incident_field
from emfield.services.dataset_io import atomic_write, load_manifest, load_scene, manifest_digests
from emfield.services.exposure_map import encode_inputs

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("encode", help="four-channel network input stack (.npy)")
    add_scene_source(parser)
    add_output(parser)
    parser.set_defaults(handler=run)


def run(args: Namespace) -> int:
    manifest = load_manifest(args.manifest)
    scene = load_scene(manifest)
    stack = encode_inputs(scene, incident_field(scene)).astype(np.float32)

    buffer = io.BytesIO()
    np.save(buffer, stack)
    with CommandRun("encode", args.out) as command:
        atomic_write(command.output("inputs.npy"), buffer.getvalue())
        command.finish(
            config={"manifest": str(args.manifest), "channels": ["building", "tx", "re_inc", "im_inc"]},
            input_digests=manifest_digests(manifest),
        )
    logger.info(f"Encoded input stack {stack.shape}")
    return EXIT_OK
