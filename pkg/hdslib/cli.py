from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from typing import Any, cast

try:
    import coloredlogs

    HAS_COLOREDLOGS = True
except ModuleNotFoundError:
    HAS_COLOREDLOGS = False

log = logging.getLogger(__name__)


def _get_first_docstring_line(obj: Any) -> str | None:
    try:
        return cast(str, obj.__doc__.split("\n")[1].strip())
    except (AttributeError, IndexError):
        return None


class Fail(BaseException):
    """
    Failure that causes the program to exit with an error message.

    No stack trace is printed.
    """

    #: Process exit code
    exit_code = 2


class Command:
    """
    Base class for actions run from command line
    """

    NAME: str | None = None

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.setup_logging()

    @classmethod
    def command_name(cls) -> str:
        if cls.NAME is not None:
            return cls.NAME
        else:
            return cls.__name__.lower()

    def setup_logging(self) -> None:
        FORMAT = "%(asctime)-15s %(levelname)s %(name)s %(message)s"
        if self.args.debug:
            level = logging.DEBUG
        elif self.args.verbose:
            level = logging.INFO
        else:
            level = logging.WARN

        if HAS_COLOREDLOGS:
            coloredlogs.install(level=level, fmt=FORMAT)
        else:
            logging.basicConfig(level=level, stream=sys.stderr, format=FORMAT)

    def main(self) -> int:
        """
        Run the command, returning the process exit code
        """
        raise NotImplementedError(f"{self.__class__.__name__}.main is not implemented")

    @classmethod
    def add_subparser(cls, subparsers: argparse._SubParsersAction[Any]) -> argparse.ArgumentParser:
        parser = subparsers.add_parser(
            cls.command_name(),
            help=_get_first_docstring_line(cls),
        )
        parser.set_defaults(command=cls)
        parser.add_argument(
            "-v",
            "--verbose",
            action="store_true",
            help="verbose output",
        )
        parser.add_argument(
            "--debug",
            action="store_true",
            help="debugging output",
        )
        return cast(argparse.ArgumentParser, parser)


def make_parser(version: str) -> argparse.ArgumentParser:
    from .commands import COMMANDS

    parser = argparse.ArgumentParser(
        prog="hds", description="Numerical laboratory for maximal inequalities of contraction semigroups"
    )
    parser.add_argument("--version", action="version", version="%(prog)s " + version)
    subparsers = parser.add_subparsers(help="sub-command help", dest="command_name")
    subparsers.required = True
    for c in COMMANDS:
        c.add_subparser(subparsers)
    return parser


def run(argv: Sequence[str] | None = None, version: str = "") -> int:
    """
    Parse the command line, run the selected command and return its exit code.

    Exit codes: 0 when all executed suites pass, 1 on suite failure, 2 on
    usage or configuration errors.
    """
    parser = make_parser(version)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    try:
        command = args.command(args)
        return command.main()
    except Fail as e:
        print(e, file=sys.stderr)
        return e.exit_code
