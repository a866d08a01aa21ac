"""
Command-line surface: scene -> incident field -> forward solve / reconstruction
-> path-loss map -> metrics, plus the self-test oracles.
"""

from argparse import ArgumentParser
from typing import List, Optional
import logging

from pydantic import ValidationError

from emfield import __version__
from emfield.core.config import settings
from emfield.core.errors import EXIT_IO, EXIT_VALIDATION, EmfieldError

logger = logging.getLogger(__name__)


def build_parser() -> ArgumentParser:
    from emfield.cli.commands import COMMANDS

    parser = ArgumentParser(prog="emfield", description="2-D TM volume-integral-equation EMF engine")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def configure_logging(verbose: bool = False):
    level = logging.DEBUG if verbose else getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO)
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)

    try:
        return args.handler(args)
    except EmfieldError as e:
        logger.error(f"{args.command}: {e}")
        return e.exit_code
    except ValidationError as e:
        logger.error(f"{args.command}: invalid input: {e}")
        return EXIT_VALIDATION
    except ValueError as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_VALIDATION
    except OSError as e:
        logger.error(f"{args.command}: IO error: {e}")
        return EXIT_IO
