from argparse import Namespace
import logging

from emfield.cli.runner import CommandRun, add_output
from emfield.core.errors import EXIT_OK, InvalidInputError, SelfTestFailure
from emfield.services.dataset_io import atomic_write
from emfield.services.selftest import run_selftest

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("selftest", help="oracle checks on random small instances")
    parser.add_argument("--size", type=int, default=12, help="grid side for operator/solver checks")
    parser.add_argument("--seed", type=int, default=7)
    add_output(parser, required=False)
    parser.set_defaults(handler=run)


def run(args: Namespace) -> int:
    if args.size < 4:
        raise InvalidInputError("--size must be at least 4")
    results = run_selftest(size=args.size, seed=args.seed)
    text = "\n".join(r.line() for r in results) + "\n"
    print(text, end="")

    failed = [r for r in results if not r.passed]
    if failed:
        raise SelfTestFailure(f"{len(failed)} of {len(results)} checks failed")

    with CommandRun("selftest", args.out) as command:
        atomic_write(command.output("selftest.txt"), text.encode("utf-8"))
        command.finish(config={"size": args.size, "seed": args.seed})
    return EXIT_OK
