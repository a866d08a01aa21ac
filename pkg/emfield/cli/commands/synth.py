from argparse import Namespace
import logging

from emfield.cli.runner import CommandRun, add_output
from emfield.core.errors import EXIT_OK
from emfield.services.synthetic import write_synthetic_scene

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("synth", help="write a random synthetic scene and its manifest")
    parser.add_argument("--size", type=int, default=64)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--buildings", type=int, default=None, help="number of rectangular buildings")
    add_output(parser)
    parser.set_defaults(handler=run)


def run(args: Namespace) -> int:
    with CommandRun("synth", args.out) as command:
        # Declared up front so a failed write is cleaned up
        command.output("mask.png")
        manifest = command.output("manifest.env")
        write_synthetic_scene(args.out, size=args.size, seed=args.seed, n_buildings=args.buildings)
        command.finish(config={"size": args.size, "seed": args.seed, "buildings": args.buildings})
    print(manifest)
    return EXIT_OK
