"""
Runners reproducing the coupling and infidelity figures as result tables.
"""

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict

from torsiongate.dynamics.experiments import GateResult, cphase_experiment, dephasing_scan
from torsiongate.experiments import IncompleteExperiment, SweepInterrupted, evaluate, provenance
from torsiongate.models.config import ExperimentConfig
from torsiongate.models.results import Column, ResultTable
from torsiongate.physics.ellipsoid_optics import fixed_volume_geometry, polarizability, sphere_reference
from torsiongate.physics.gate_design import PhaseCalibration, mode_displacement
from torsiongate.physics.trap_coupling import aspect_ratio_optimum, coupling_g0

logger = logging.getLogger(__name__)

SPHERE_RADIUS = 250e-9
"""Radius of the equal-volume sphere every geometry of the aspect-ratio sweep is derived from."""

ASPECT_RATIOS = (1.0, 3.0, 200)
SPACING_RATIOS = (0.5, 2.0, 400)
POWERS_MW = (600, 800, 1000)
GAMMA_HZ_MAX = 1000.0
KAPPA_RATIOS = (1e-6, 1e-3)
"""Range of κ/ω₀ scanned at Γ = 0, logarithmically spaced."""

DEPHASING_MS = (4, 10, 16)
THERMAL_MS = (4, 10)
THERMAL_OCCUPANCIES = (1.0, 2.0)


def to_khz(omega: float) -> float:
    return omega / (2 * math.pi) / 1e3


def run_fig2a(config: ExperimentConfig, seed: int | None = None) -> ResultTable:
    """
    Anisotropy and coupling of fixed-volume ellipsoids against aspect ratio. Δα is normalized by α_∥ of the
    equal-volume sphere and both g₀ curves by the largest dipole-only coupling on the grid, since the sphere itself
    does not couple.
    """
    rho, eps_r = config.geometry.rho_kg_m3, config.geometry.eps_r
    trap = config.trap.trap()
    ratios = np.linspace(*ASPECT_RATIOS)
    sphere_alpha = polarizability(sphere_reference(SPHERE_RADIUS, rho, eps_r)).alpha_par

    delta_alpha, dipole, multipole = [], [], []
    for ratio in ratios:
        geom = fixed_volume_geometry(float(ratio), SPHERE_RADIUS, rho, eps_r)
        delta_alpha.append(polarizability(geom).delta_alpha)
        dipole.append(coupling_g0(geom, trap).g0)
        multipole.append(coupling_g0(geom, trap, use_multipole=True).g0)
    reference = max(dipole)

    optimum = aspect_ratio_optimum(ratios, delta_alpha, multipole)
    logger.info(
        f"Largest coupling at a/b = {optimum.ratio:.3f} (interior maximum: {optimum.interior}), "
        f"Δα saturates past a/b = {optimum.delta_alpha_knee:.3f}, "
        f"g₀ changes by {optimum.sensitivity:.1%} from a/b = 1.6 to 1.7"
    )
    table = ResultTable(
        name="fig2a",
        columns=[
            Column(name="aspect_ratio"),
            Column(name="delta_alpha_norm"),
            Column(name="g0_dipole_norm"),
            Column(name="g0_multipole_norm"),
            Column(name="g0_dipole", unit="kHz"),
            Column(name="g0_multipole", unit="kHz"),
        ],
        provenance=provenance(config, seed, sphere_radius_m=f"{SPHERE_RADIUS:.6e}"),
        notes=[
            f"aspect_ratio_optimum={optimum.ratio:.6f}",
            f"interior_maximum={int(optimum.interior)}",
            f"delta_alpha_knee={optimum.delta_alpha_knee:.6f}",
            f"sensitivity_1.6_1.7={optimum.sensitivity:.6f}",
        ],
    )
    for ratio, da, g_dip, g_mul in zip(ratios, delta_alpha, dipole, multipole):
        table.add_row(
            [ratio, da / sphere_alpha, g_dip / reference, g_mul / reference, to_khz(g_dip), to_khz(g_mul)]
        )
    return table


def run_fig2b(config: ExperimentConfig, seed: int | None = None) -> ResultTable:
    """Dipole coupling g₀/2π against particle spacing for three trap powers."""
    geom = config.geometry.particle()
    wavelength = config.trap.wavelength_m
    ratios = np.linspace(*SPACING_RATIOS)
    table = ResultTable(
        name="fig2b",
        columns=[Column(name="R_over_lambda")] + [Column(name=f"g0_{p}mW", unit="kHz") for p in POWERS_MW],
        provenance=provenance(config, seed),
    )
    for ratio in ratios:
        row = [ratio]
        for power_mw in POWERS_MW:
            trap = config.trap.model_copy(update={"power_w": power_mw / 1e3, "spacing_m": ratio * wavelength}).trap()
            row.append(to_khz(coupling_g0(geom, trap).g0))
        table.add_row(row)
    peak = ratios[int(np.argmax(table.column(f"g0_{POWERS_MW[-1]}mW")))]
    table.notes.append(f"peak_R_over_lambda={peak:.6f}")
    logger.info(f"Strongest coupling at R/λ = {peak:.4f}")
    return table


class GatePoint(BaseModel):
    """A picklable gate simulation request."""

    model_config = ConfigDict(frozen=True)

    omega0: float
    g0: float
    g1: float
    g2: float
    m: int
    kappa: float
    n_th: float
    rwa: bool
    n_fock: int
    calibration: PhaseCalibration
    samples: int
    tolerance: float
    method: str
    check_positivity: bool
    convergence: float | None = None

    def __str__(self) -> str:
        rwa = "on" if self.rwa else "off"
        return f"m={self.m}, κ/ω₀={self.kappa / self.omega0:.2e}, n_th={self.n_th}, rwa={rwa}"


def simulate_point(point: GatePoint) -> GateResult:
    return cphase_experiment(
        point.omega0,
        point.g0,
        point.g1,
        point.g2,
        point.m,
        kappa=point.kappa,
        n_th=point.n_th,
        rwa=point.rwa,
        n_fock=point.n_fock,
        calibration=point.calibration,
        samples=point.samples,
        tolerance=point.tolerance,
        method=point.method,
        check_positivity=point.check_positivity,
        convergence=point.convergence,
    )


def gate_point(config: ExperimentConfig, m: int, kappa: float, n_th: float, rwa: bool) -> GatePoint:
    design = config.model_copy(update={"gate": config.gate.model_copy(update={"m": m})}).design()
    numerics = config.numerics
    return GatePoint(
        omega0=design.omega0,
        g0=design.g0,
        g1=design.g1,
        g2=design.g2,
        m=m,
        kappa=kappa,
        n_th=n_th,
        rwa=rwa,
        n_fock=numerics.cutoff_for(n_th, mode_displacement(design.omega0, design.g0, design.g1, design.g2)),
        calibration=design.calibration,
        samples=numerics.samples,
        tolerance=numerics.tolerance,
        method=numerics.method,
        check_positivity=numerics.check_positivity,
        convergence=numerics.cutoff_convergence,
    )


def run_fig3a(config: ExperimentConfig, seed: int | None = None) -> ResultTable:
    """
    Infidelity against spin dephasing Γ/2π for m = 4, 10, 16, and for m = 4 with the counter-rotating mode terms.
    One trajectory per column is simulated at Γ = 0; the dephasing grid is applied to it exactly.
    """
    kappa, n_th = config.kappa(), config.n_th()
    points = [gate_point(config, m, kappa, n_th, rwa=True) for m in DEPHASING_MS]
    points.append(gate_point(config, DEPHASING_MS[0], kappa, n_th, rwa=False))
    gammas_hz = np.linspace(0, GAMMA_HZ_MAX, config.numerics.fig3_points)
    table = ResultTable(
        name="fig3a",
        columns=[Column(name="gamma", unit="Hz")]
        + [Column(name=f"xi_m{m}") for m in DEPHASING_MS]
        + [Column(name=f"xi_m{DEPHASING_MS[0]}_norwa")],
        provenance=provenance(
            config,
            seed,
            kappa_rad_s=f"{kappa:.6e}",
            n_th=f"{n_th:.6e}",
            gamma_axis="gamma/2pi",
            **{f"g0_m{point.m}_khz": f"{point.g0 / (2 * np.pi) / 1e3:.3f}" for point in points if point.rwa},
        ),
    )
    try:
        bases = evaluate(simulate_point, points, config.numerics.workers)
    except SweepInterrupted as e:
        raise IncompleteExperiment(table, e) from e

    columns = [[result.infidelity for result in dephasing_scan(base, 2 * np.pi * gammas_hz)] for base in bases]
    for index, gamma_hz in enumerate(gammas_hz):
        table.add_row([gamma_hz] + [column[index] for column in columns])
    return table


def run_fig3b(config: ExperimentConfig, seed: int | None = None) -> ResultTable:
    """Infidelity against torsional damping κ/ω₀ at Γ = 0 for hot baths, n_th = 1 and 2."""
    omega0 = config.omega0()
    kappa_ratios = np.logspace(*np.log10(KAPPA_RATIOS), config.numerics.kappa_points)
    combinations = [(m, n_th) for m in THERMAL_MS for n_th in THERMAL_OCCUPANCIES]
    points = [
        gate_point(config, m, ratio * omega0, n_th, rwa=config.rwa)
        for ratio in kappa_ratios
        for m, n_th in combinations
    ]
    table = ResultTable(
        name="fig3b",
        columns=[Column(name="kappa_over_omega")]
        + [Column(name=f"xi_m{m}_nth{n_th:g}") for m, n_th in combinations],
        provenance=provenance(config, seed),
    )

    def fill(results: list[GateResult]):
        width = len(combinations)
        for index, ratio in enumerate(kappa_ratios[: len(results) // width]):
            table.add_row([ratio] + [result.infidelity for result in results[index * width : (index + 1) * width]])

    try:
        results = evaluate(simulate_point, points, config.numerics.workers)
    except SweepInterrupted as e:
        fill(e.completed)
        raise IncompleteExperiment(table, e) from e
    fill(results)
    return table


def run_fig3(config: ExperimentConfig, panel: str, seed: int | None = None) -> ResultTable:
    match panel:
        case "a":
            return run_fig3a(config, seed)
        case "b":
            return run_fig3b(config, seed)
        case _:
            raise ValueError(f"unknown panel `{panel}`, expected `a` or `b`")


FIGURES = {
    "fig2a": run_fig2a,
    "fig2b": run_fig2b,
    "fig3a": run_fig3a,
    "fig3b": run_fig3b,
}
