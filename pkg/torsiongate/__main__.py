import logging
import math
import os
import sys

from pydantic import ValidationError

from torsiongate import __version__
from torsiongate.argparse import ArgumentParser, add_common_arguments
from torsiongate.dynamics import NumericalFailure
from torsiongate.dynamics.experiments import dephasing_scan
from torsiongate.dynamics.states import state_fidelity
from torsiongate.experiments import IncompleteExperiment, provenance
from torsiongate.experiments.figures import FIGURES, gate_point, simulate_point
from torsiongate.experiments.sweep import OBSERVABLE_UNITS, sweep
from torsiongate.logging import LogContext, LogStyle, configure_logging, log_context
from torsiongate.models.config import ExperimentConfig, load_config
from torsiongate.models.utils.io import ChainedException
from torsiongate.physics import DomainError
from torsiongate.physics.ellipsoid_optics import REFERENCE_C1, multipole_coefficients
from torsiongate.physics.gate_design import (
    closing_g0,
    cphase_phase,
    discrepancy_report,
    normal_mode_spin_state,
    required_coupling_product,
    select_m,
)
from torsiongate.physics.trap_coupling import coupling_g0, torsional_mode

logger = logging.getLogger(__name__)

DISCREPANCY_TOLERANCE = 0.1


def argument_parser() -> ArgumentParser:
    parser = ArgumentParser(
        "torsiongate", description="Torsional coupling of levitated nanodiamonds and the gate it mediates."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    add_common_arguments(commands.add_parser("coupling", help="Print torsional frequency, g₀ and multipole terms."))
    add_common_arguments(
        commands.add_parser("gate", help="Print the gate schedule, required couplings and feasible m.")
    )

    simulate = commands.add_parser("simulate", help="Simulate the CPHASE gate and print its infidelity.")
    add_common_arguments(simulate)
    simulate.add_argument(
        "--gamma-hz", type=float, default=None, help="Override the spin dephasing rate as Γ/2π in Hz."
    )
    simulate.add_argument("--trajectory", action="store_true", help="Also write the trajectory table to --out.")

    figures = commands.add_parser("figures", help="Write the CSV table of one or more figures.")
    add_common_arguments(figures)
    figures.add_argument("names", nargs="+", choices=list(FIGURES), help="Figures to compute.")

    sweeper = commands.add_parser("sweep", help="Sweep one numeric configuration key.")
    add_common_arguments(sweeper)
    sweeper.add_argument("param", help="Dotted configuration key, e.g. trap.power_W.")
    sweeper.add_argument("lo", type=float)
    sweeper.add_argument("hi", type=float)
    sweeper.add_argument("n", type=int)
    sweeper.add_argument("observable", choices=list(OBSERVABLE_UNITS))
    return parser


def khz(omega: float) -> str:
    return f"2π × {omega / (2 * math.pi) / 1e3:.3f} kHz"


def print_echo(config: ExperimentConfig):
    print("Configuration:")
    for key, value in config.echo().items():
        print(f"  {key} = {value}")


def run_coupling(config: ExperimentConfig, args):
    geom, trap = config.geometry.particle(), config.trap.trap()
    mode = torsional_mode(geom, trap)
    dipole = coupling_g0(geom, trap)
    corrected = coupling_g0(geom, trap, use_multipole=True)
    coefficients = multipole_coefficients(geom, trap.spacing)
    print_echo(config)
    print(f"omega/2pi = {mode.omega / (2 * math.pi) / 1e6:.6f} MHz")
    print(f"g0/2pi = {dipole.g0 / (2 * math.pi) / 1e3:.6f} kHz")
    print(f"g0/2pi (multipole corrected) = {corrected.g0 / (2 * math.pi) / 1e3:.6f} kHz")
    print(f"Re G_zz = {dipole.green_zz_re:.6e} m^-3/F, Im G_zz = {dipole.green_zz_im:.6e} m^-3/F")
    print(f"C1 = {coefficients.c1:.6e} (reference {REFERENCE_C1}), C2 = {coefficients.c2:.6e}")
    print(f"n_th = {config.noise.occupancy(mode.omega):.6e}")


def run_gate(config: ExperimentConfig, args):
    design = config.design()
    schedule = design.schedule
    omega0, g0 = config.omega0(), config.g0()
    print_echo(config)
    print(f"calibration = {design.calibration.value}, m = {design.m}")
    print(f"g0 = {khz(design.g0)}" + (" (snapped to close the loops)" if design.g0 != g0 else ""))
    print(f"g1 = {khz(design.g1)}, g2 = {khz(design.g2)}")
    print(f"phi = {design.phi:.9f} rad")
    print(f"t_m = {schedule.t_m * 1e6:.6f} us, t_gate = {schedule.t_gate * 1e6:.6f} us")
    for pulse in schedule.pulses:
        print(f"  t = {pulse.time * 1e6:.6f} us: U_{pulse.axis}({pulse.angle:.9f})")

    g_stated = math.sqrt(required_coupling_product(omega0, g0, design.m))
    print(f"Equal couplings for phi = pi/2 (stated algebra): {khz(g_stated)}")
    feasible = select_m(omega0, g0, config.gate.t2_s, config.gate.g_cap_rad_s)
    print(f"Feasible m: {', '.join(str(gate.m) for gate in feasible) or 'none'}")

    print("Formula versus reference values:")
    for row in discrepancy_report(omega0, g0):
        print(
            f"  m = {row.m}: t_gate {row.t_gate * 1e6:.3f} us (reference {_micro(row.t_gate_reference)}), "
            f"g {khz(row.g_equal)} (reference {_khz_or_dash(row.g_equal_reference)}), "
            f"normal-mode g {khz(row.g_normal_mode)}, loop mismatch {row.closure_mismatch:.3f}"
        )
        for value, reference, label in (
            (row.t_gate, row.t_gate_reference, "gate time"),
            (row.g_equal, row.g_equal_reference, "coupling"),
        ):
            if reference is not None and abs(value - reference) > DISCREPANCY_TOLERANCE * reference:
                logger.warning(f"m = {row.m}: formula {label} differs from the reference value by more than 10%")

    for label, coupling in (("as configured", g0), ("with closed loops", _closing_or_none(omega0, g0, design.m))):
        if coupling is None:
            continue
        g_equal = math.sqrt(required_coupling_product(omega0, coupling, design.m))
        phi = cphase_phase(omega0, coupling, g_equal, g_equal, design.m)
        spins = normal_mode_spin_state(omega0, coupling, g_equal, g_equal, design.m, -phi)
        print(f"Stated protocol, normal-mode prediction {label}: F = {state_fidelity(spins):.6f}")


def _closing_or_none(omega0: float, g0: float, m: int) -> float | None:
    try:
        return closing_g0(omega0, g0, m)
    except DomainError:
        return None


def _micro(value: float | None) -> str:
    return "-" if value is None else f"{value * 1e6:.3f} us"


def _khz_or_dash(value: float | None) -> str:
    return "-" if value is None else khz(value)


def run_simulate(config: ExperimentConfig, args):
    if args.gamma_hz is not None:
        config = config.model_copy(
            update={"noise": config.noise.model_copy(update={"gamma_hz": args.gamma_hz, "gamma_rad_s": None})}
        )
    print_echo(config)
    point = gate_point(config, config.gate.m, config.kappa(), config.n_th(), config.rwa)
    base = simulate_point(point)
    gammas = [config.gamma()]
    if config.noise.gamma_rad_s is None and config.noise.gamma_hz:
        gammas.append(config.noise.gamma_hz)
    results = dephasing_scan(base, gammas)
    result = results[0]
    print(f"kappa = {config.kappa():.6e} rad/s, n_th = {config.n_th():.6e}, n_fock = {base.n_fock}")
    print(f"F_max = {result.fidelity_max:.9f}")
    print(f"xi = {result.infidelity:.6e} (Gamma = {config.gamma():.6e} rad/s)")
    if len(results) > 1:
        print(f"xi = {results[1].infidelity:.6e} (Gamma read as {config.noise.gamma_hz} rad/s)")
    if result.mode_purity_tm is not None:
        print(f"mode purity at t_m = {result.mode_purity_tm:.9f}")
    if args.trajectory:
        table = result.to_table()
        table.provenance = provenance(config, args.seed)
        table.write(args.out)


def run_figures(config: ExperimentConfig, args):
    for name in args.names:
        with log_context(LogContext.EXPERIMENT, f"Figure {name}") as footer:
            path = FIGURES[name](config, args.seed).write(args.out)
            footer(f"Wrote {path}")
            print(path)


def run_sweep(config: ExperimentConfig, args):
    table = sweep(config, args.param, args.lo, args.hi, args.n, args.observable, seed=args.seed)
    print(table.write(args.out))


COMMANDS = {
    "coupling": run_coupling,
    "gate": run_gate,
    "simulate": run_simulate,
    "figures": run_figures,
    "sweep": run_sweep,
}


def main(argv: list[str] | None = None) -> int:
    args = argument_parser().parse_args(argv)
    configure_logging(
        root_logger=logging.getLogger(),
        style=LogStyle.parse(args.log_style),
        timestamps=not args.no_timestamps,
        level=logging.WARNING if args.quiet else logging.INFO,
    )

    if not os.path.exists(args.config) and os.path.sep in args.config:
        logger.error(f"Configuration file does not exist: {os.path.abspath(args.config)}")
        return 1

    with log_context(LogContext.RUN, f"torsiongate {args.command}") as footer:
        try:
            config = load_config(args.config)
            COMMANDS[args.command](config, args)
        except (ValidationError, ChainedException, DomainError, KeyError, ValueError) as e:
            logger.error(str(e))
            footer("Failed")
            return 1
        except NumericalFailure as e:
            logger.error(f"Numerical failure: {e}")
            if isinstance(e, IncompleteExperiment):
                path = e.table.write(args.out)
                logger.warning(f"Partial table with {len(e.table.rows)} rows written to {path}")
            footer("Aborted")
            return 2
        footer("Done")
    return 0


if __name__ == "__main__":
    exit(code=main(sys.argv[1:]))
