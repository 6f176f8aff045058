import sys
from argparse import ArgumentParser as StdlibArgumentParser
from typing import NoReturn

USAGE_EXIT_CODE = 1


class ArgumentParser(StdlibArgumentParser):
    """
    An argument parser that exits with code 1 on usage errors, the same code used for configuration errors, so that
    code 2 is left to numerical failures.
    """

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT_CODE, f"{self.prog}: error: {message}\n")


def add_common_arguments(parser: StdlibArgumentParser):
    parser.add_argument(
        "-c",
        "--config",
        default="reference",
        help="Path to a JSON or YAML configuration file, or the name of a bundled preset.",
    )
    parser.add_argument(
        "-o",
        "--out",
        default=".",
        help="Directory where CSV tables are written. Created if it does not exist.",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="Recorded in the provenance header of every table. Nothing is random, so it does not affect results.",
    )
    parser.add_argument("-q", "--quiet", action="store_true", help="Only log warnings and errors.")
    parser.add_argument(
        "-l",
        "--log-style",
        default="gaudy",
        choices=["1", "2", "3", "minimal", "moderate", "gaudy"],
        help="Sets the amount to decoration to add around logs from 1 (minimal) to 3 (gaudy).",
    )
    parser.add_argument(
        "-t",
        "--no-timestamps",
        action="store_true",
        help="Omit timestamps from the logs of sweep points.",
    )
