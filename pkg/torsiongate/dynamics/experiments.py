"""
End-to-end numerical experiments: the echoed CPHASE gate under mode damping, thermal occupation and spin
dephasing, dephasing sweeps derived from a single trajectory, and the driven single-qubit check.
"""

import logging
import math
from typing import Literal, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from torsiongate.dynamics import NumericalFailure
from torsiongate.dynamics.lindblad import LindbladModel, evolve_lindblad
from torsiongate.dynamics.operators import (
    CUTOFF_CONVERGENCE,
    PAULI_X,
    PAULI_Z,
    SpaceSpec,
    build_hamiltonian,
    build_operators,
    check_cutoff,
    default_n_fock,
    mode_frame,
    thermal_state,
)
from torsiongate.dynamics.states import (
    DensityMatrix,
    coherent_state,
    mode_occupations,
    partial_trace_modes,
    partial_trace_spins,
    plus_state,
    projector,
    purity,
    state_fidelity,
)
from torsiongate.models.results import Column, ResultTable
from torsiongate.physics import require
from torsiongate.physics.gate_design import (
    GateSchedule,
    PhaseCalibration,
    Pulse,
    PulseSchedule,
    cphase_phase,
    gate_schedule,
    mode_displacement,
)

logger = logging.getLogger(__name__)

WINDOW_FRACTION = 0.05
WINDOW_SAMPLES = 21
MAX_CUTOFF_STEPS = 4


class TrajectoryRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    time: float
    fidelity: float
    purity: float
    """Purity of the reduced two-qubit state."""

    n1: float
    n2: float


class GateResult(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    fidelity_max: float
    """Largest target fidelity over the final stretch of the schedule."""

    trajectory: list[TrajectoryRow]
    spin_states: list[np.ndarray] = Field(repr=False)
    """Reduced two-qubit state at each trajectory time."""

    schedule: GateSchedule = Field(repr=False)
    mode_purity_tm: float | None = None
    """Purity of the joint mode state right after the echo flip, 1 when the modes have disentangled."""

    gamma: float = 0.0
    """Spin dephasing rate in rad/s the result was obtained with."""

    n_fock: int | None = None
    """Fock cutoff per mode of the run."""

    @property
    def infidelity(self) -> float:
        return 1 - self.fidelity_max

    def to_table(self, name: str = "trajectory") -> ResultTable:
        table = ResultTable(
            name=name,
            columns=[
                Column(name="t_seconds", unit="s"),
                Column(name="fidelity"),
                Column(name="purity"),
                Column(name="n1"),
                Column(name="n2"),
            ],
        )
        for row in self.trajectory:
            table.add_row([row.time, row.fidelity, row.purity, row.n1, row.n2])
        return table


def _window_start(duration: float) -> float:
    return duration * (1 - WINDOW_FRACTION)


def _fidelity_max(trajectory: Sequence[TrajectoryRow], duration: float) -> float:
    start = _window_start(duration) * (1 - 1e-12)
    return max(row.fidelity for row in trajectory if row.time >= start)


def gate_sample_times(schedule: GateSchedule, samples: int) -> np.ndarray:
    uniform = np.linspace(0, schedule.duration, samples)
    window = np.linspace(_window_start(schedule.duration), schedule.duration, WINDOW_SAMPLES)
    return np.unique(np.concatenate([uniform, window, [schedule.t_m]]))


def cphase_experiment(
    omega0: float,
    g0: float,
    g1: float,
    g2: float,
    m: int,
    kappa: float = 0.0,
    n_th: float = 0.0,
    gamma: float = 0.0,
    rwa: bool = True,
    n_fock: int | None = None,
    calibration: PhaseCalibration = PhaseCalibration.NORMAL_MODE,
    samples: int = 101,
    tolerance: float = 1e-10,
    method: Literal["adaptive", "fixed"] = "adaptive",
    check_positivity: bool = False,
    convergence: float | None = CUTOFF_CONVERGENCE,
) -> GateResult:
    """
    Prepare |++⟩ with both modes thermal, run the echoed gate schedule with the Z correction of `calibration` and
    measure the overlap with the CZ target over time. Couplings are taken as given; whether they satisfy the CZ
    condition is up to the caller.

    Without an explicit `n_fock` the cutoff starts from the thermal tail and the largest coherent excursion of the
    modes. When `convergence` is set the run is repeated with two more Fock levels per mode until the infidelity
    moves by less than `convergence`, and the finer run is returned. `NumericalFailure` is raised when that does
    not happen within MAX_CUTOFF_STEPS extensions.
    """
    n_fock = n_fock or default_n_fock(n_th, mode_displacement(omega0, g0, g1, g2))
    check_cutoff(n_th, n_fock)
    phi = cphase_phase(omega0, g0, g1, g2, m)
    schedule = gate_schedule(omega0, g0, m, phi, calibration.correction_angle(phi))

    def run(cutoff: int) -> GateResult:
        return _gate_run(
            omega0,
            g0,
            g1,
            g2,
            schedule,
            cutoff,
            kappa=kappa,
            n_th=n_th,
            gamma=gamma,
            rwa=rwa,
            samples=samples,
            tolerance=tolerance,
            method=method,
            check_positivity=check_positivity,
        )

    result = run(n_fock)
    if convergence is None:
        return result
    for _ in range(MAX_CUTOFF_STEPS):
        finer = run(n_fock + 2)
        change = abs(finer.infidelity - result.infidelity)
        if change < convergence:
            logger.info(f"Infidelity settled to {change:.2e} between n_fock={n_fock} and n_fock={n_fock + 2}")
            return finer
        logger.warning(f"Infidelity moved by {change:.2e} from n_fock={n_fock} to n_fock={n_fock + 2}")
        n_fock, result = n_fock + 2, finer
    raise NumericalFailure(
        f"infidelity did not settle to {convergence:.1e} in the Fock cutoff up to n_fock={n_fock}", schedule.duration
    )


def _gate_run(
    omega0: float,
    g0: float,
    g1: float,
    g2: float,
    schedule: GateSchedule,
    n_fock: int,
    kappa: float,
    n_th: float,
    gamma: float,
    rwa: bool,
    samples: int,
    tolerance: float,
    method: Literal["adaptive", "fixed"],
    check_positivity: bool,
) -> GateResult:
    space = SpaceSpec(n_fock=n_fock)
    ops = build_operators(space)
    model = LindbladModel(
        hamiltonian=build_hamiltonian(ops, omega0, g0, g1, g2, rwa=rwa),
        operators=ops,
        kappa=kappa,
        n_th=n_th,
        gamma=gamma,
        rwa=rwa,
        frame=mode_frame(ops, omega0),
    )
    mode = thermal_state(n_th, n_fock)
    rho0 = np.kron(plus_state(), np.kron(mode, mode))

    def observe(state: DensityMatrix):
        spins = partial_trace_spins(state.matrix, space)
        mode_purity = purity(partial_trace_modes(state.matrix, space)) if state.time == schedule.t_m else None
        return state.time, spins, mode_occupations(state.matrix, ops), mode_purity

    logger.info(
        f"Simulating m={schedule.m} gate over {schedule.duration * 1e6:.3f} µs at n_fock={n_fock}, "
        f"κ={kappa:.3e} rad/s, n_th={n_th}, Γ={gamma:.3e} rad/s, rwa={'on' if rwa else 'off'}"
    )
    observations = evolve_lindblad(
        model,
        schedule,
        rho0,
        times=gate_sample_times(schedule, samples),
        method=method,
        tolerance=tolerance,
        check_positivity=check_positivity,
        observe=observe,
    )

    trajectory, spin_states, mode_purity_tm = [], [], None
    for time, spins, (n1, n2), mode_purity in observations:
        trajectory.append(TrajectoryRow(time=time, fidelity=state_fidelity(spins), purity=purity(spins), n1=n1, n2=n2))
        spin_states.append(spins)
        if mode_purity is not None:
            mode_purity_tm = mode_purity
    result = GateResult(
        fidelity_max=_fidelity_max(trajectory, schedule.duration),
        trajectory=trajectory,
        spin_states=spin_states,
        schedule=schedule,
        mode_purity_tm=mode_purity_tm,
        gamma=gamma,
        n_fock=n_fock,
    )
    logger.info(f"Infidelity ξ = {result.infidelity:.4e}")
    return result


def _hamming_distances(sites: int) -> np.ndarray:
    configs = np.arange(2**sites)
    return np.array([[bin(i ^ j).count("1") for j in configs] for i in configs])


def dephasing_scan(base: GateResult, gammas: Sequence[float]) -> list[GateResult]:
    """
    Results for additional spin dephasing rates (rad/s) on top of `base`. Dephasing commutes with the σᶻ-conserving
    gate dynamics, the echo flips and the mode dissipators, so each coherence between spin configurations i and j is
    only multiplied by exp(−Γt·h/2), with h the number of qubits in which i and j differ.
    """
    distances = _hamming_distances(2)
    results = []
    for gamma in gammas:
        require(gamma >= 0, f"dephasing rate must not be negative, got {gamma}")
        trajectory, spin_states = [], []
        for row, spins in zip(base.trajectory, base.spin_states):
            dephased = spins * np.exp(-gamma * row.time * distances / 2)
            spin_states.append(dephased)
            trajectory.append(row.model_copy(update={"fidelity": state_fidelity(dephased), "purity": purity(dephased)}))
        results.append(
            base.model_copy(
                update={
                    "fidelity_max": _fidelity_max(trajectory, base.schedule.duration),
                    "trajectory": trajectory,
                    "spin_states": spin_states,
                    "gamma": base.gamma + gamma,
                }
            )
        )
    return results


class BlochRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    time: float
    x: float
    y: float
    z: float


def single_qubit_drive(
    omega_rabi: float,
    g_spin: float,
    omega_mode: float,
    echo: bool,
    duration: float,
    n_fock: int = 8,
    samples: int = 101,
    initial_spin: np.ndarray | None = None,
    mode_alpha: complex = 0.0,
    tolerance: float = 1e-10,
) -> list[BlochRow]:
    """
    One qubit driven as H = (Ω/2)σˣ + g σᶻ(b† + b) + ω b†b, optionally with a σˣ π-pulse at half time. The qubit starts
    in `initial_spin` (|0⟩ by default) and the mode in the coherent state |mode_alpha⟩.
    """
    require(duration > 0, f"duration must be positive, got {duration}")
    space = SpaceSpec(n_fock=n_fock, sites=1)
    ops = build_operators(space)
    (b,), (sigma_z,), (sigma_x,) = ops.b, ops.sigma_z, ops.sigma_x
    hamiltonian = omega_rabi / 2 * sigma_x + g_spin * sigma_z @ (b + b.conj().T) + omega_mode * ops.number[0]
    model = LindbladModel(hamiltonian=hamiltonian, operators=ops, frame=mode_frame(ops, omega_mode))
    pulses = (Pulse(time=duration / 2, axis="x", angle=math.pi),) if echo else ()

    spin = np.array([1.0, 0.0], dtype=complex) if initial_spin is None else np.asarray(initial_spin, dtype=complex)
    rho0 = projector(np.kron(spin / np.linalg.norm(spin), coherent_state(mode_alpha, n_fock)))

    def observe(state: DensityMatrix) -> BlochRow:
        reduced = partial_trace_spins(state.matrix, space)
        return BlochRow(
            time=state.time,
            x=float(np.real(np.trace(PAULI_X @ reduced))),
            y=float(2 * np.imag(reduced[1, 0])),
            z=float(np.real(np.trace(PAULI_Z @ reduced))),
        )

    return evolve_lindblad(
        model, PulseSchedule(duration=duration, pulses=pulses), rho0, samples=samples, tolerance=tolerance, observe=observe
    )
