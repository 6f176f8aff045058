import pytest

from torsiongate import __version__
from torsiongate.__main__ import argument_parser
from torsiongate.argparse import USAGE_EXIT_CODE, ArgumentParser


@pytest.fixture
def parser() -> ArgumentParser:
    return argument_parser()


def test_common_defaults(parser):
    args = parser.parse_args(["coupling"])
    assert args.command == "coupling"
    assert args.config == "reference"
    assert args.out == "."
    assert args.seed is None
    assert args.log_style == "gaudy"
    assert not args.quiet and not args.no_timestamps


def test_common_arguments(parser):
    args = parser.parse_args(["gate", "-c", "config.yml", "-o", "out", "--seed", "7", "-q", "-l", "2", "-t"])
    assert (args.config, args.out, args.seed, args.log_style) == ("config.yml", "out", 7, "2")
    assert args.quiet and args.no_timestamps


def test_simulate_arguments(parser):
    args = parser.parse_args(["simulate", "--gamma-hz", "50", "--trajectory"])
    assert args.gamma_hz == 50.0
    assert args.trajectory
    assert parser.parse_args(["simulate"]).gamma_hz is None


def test_figures_arguments(parser):
    assert parser.parse_args(["figures", "fig2a", "fig3b"]).names == ["fig2a", "fig3b"]


def test_sweep_arguments(parser):
    args = parser.parse_args(["sweep", "trap.power_W", "0.6", "1.0", "5", "g0"])
    assert (args.param, args.lo, args.hi, args.n, args.observable) == ("trap.power_W", 0.6, 1.0, 5, "g0")


@pytest.mark.parametrize(
    "argv, error",
    [
        ([], "the following arguments are required: COMMAND"),
        (["entangle"], "invalid choice: 'entangle'"),
        (["figures", "fig9"], "invalid choice: 'fig9'"),
        (["sweep", "trap.power_W", "0.6", "1.0", "five", "g0"], "invalid int value: 'five'"),
        (["sweep", "trap.power_W", "0.6", "1.0", "5", "fidelity"], "invalid choice: 'fidelity'"),
        (["coupling", "--log-style", "loud"], "invalid choice: 'loud'"),
    ],
    ids=["no_command", "unknown_command", "unknown_figure", "bad_count", "bad_observable", "bad_log_style"],
)
def test_usage_errors_exit_with_code_1(parser, argv, error, capsys):
    with pytest.raises(SystemExit) as exc:
        parser.parse_args(argv)
    assert exc.value.code == USAGE_EXIT_CODE == 1
    assert error in capsys.readouterr().err


def test_version(parser, capsys):
    with pytest.raises(SystemExit) as exc:
        parser.parse_args(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip() == f"torsiongate {__version__}"


def test_help_lists_the_commands(parser, capsys):
    with pytest.raises(SystemExit):
        parser.parse_args(["--help"])
    out = capsys.readouterr().out
    for command in ("coupling", "gate", "simulate", "figures", "sweep"):
        assert command in out
