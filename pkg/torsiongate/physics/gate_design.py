"""
Closed-form algebra of the spin-echo Sørensen–Mølmer gate between two NV spins that share the coupled torsional
modes of two levitated particles.

Two phase calibrations are supported. `PhaseCalibration.STATED` is the textbook reduction in which the echoed
propagator is diag(e^{iφ},1,1,e^{iφ}) and the coupling condition for φ = π/2 yields CZ.
`PhaseCalibration.NORMAL_MODE` follows the exact normal-mode solution of the same Hamiltonian, where the echoed
propagator is exp(−iφ σᶻ⊗σᶻ); the Z correction is then U_z(−2φ) and CZ is reached at φ = π/4.
"""

import logging
import math
from enum import Enum
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from torsiongate.constants import HBAR, NV_GYROMAGNETIC_RATIO, NV_ZERO_FIELD_SPLITTING, TWO_PI
from torsiongate.physics import require

logger = logging.getLogger(__name__)

FINITE_DIFFERENCE_STEP = 1e-6

REFERENCE_GATE_TIMES = {4: 22.5e-6, 10: 56.3e-6, 16: 90e-6}
"""Gate times (s) quoted for the reference operating points at ω₀ = 2π×1 MHz, g₀ = 2π×100 kHz."""

REFERENCE_COUPLINGS = {4: TWO_PI * 460e3, 10: TWO_PI * 290e3, 16: TWO_PI * 250e3}
"""Spin-torsion couplings (rad/s) quoted for the same operating points."""


class PhaseCalibration(str, Enum):
    STATED = "stated"
    NORMAL_MODE = "normal_mode"

    @property
    def cz_phase(self) -> float:
        """The value of φ at which the corrected gate is CZ."""
        return math.pi / 2 if self is PhaseCalibration.STATED else math.pi / 4

    def correction_angle(self, phi: float) -> float:
        return -phi if self is PhaseCalibration.STATED else -2 * phi


class SpinQubitParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    splitting: float
    """Energy splitting E_i between |S_z=0⟩ and |S_z=−1⟩ in rad/s."""

    d_split_d_zeta: float
    """Derivative of the splitting with respect to the NV axis angle ζ, in rad/s per radian."""

    g_spin: float = 0.0
    """Spin-torsion coupling g_i in rad/s; carries the sign of `d_split_d_zeta`."""

    gamma_dephase: float = 0.0
    """Spin dephasing rate Γ in rad/s."""

    @model_validator(mode="after")
    def check_rates(self):
        if self.gamma_dephase < 0:
            raise ValueError(f"gamma_dephase must not be negative, got {self.gamma_dephase}")
        return self


class NormalModes(BaseModel):
    model_config = ConfigDict(frozen=True)

    omega_plus: float
    omega_minus: float


class Pulse(BaseModel):
    model_config = ConfigDict(frozen=True)

    time: float
    """Application time in seconds."""

    axis: Literal["x", "z"]

    angle: float
    """Rotation angle θ of U_axis(θ) = exp(−iθ/2·Σσ^axis) in radians."""

    qubits: tuple[int, ...] | None = None
    """Qubits the rotation acts on; all of them when None."""


class PulseSchedule(BaseModel):
    model_config = ConfigDict(frozen=True)

    duration: float
    """Total evolution time in seconds."""

    pulses: tuple[Pulse, ...] = ()

    @model_validator(mode="after")
    def check_pulse_times(self):
        if not self.duration > 0:
            raise ValueError(f"schedule duration must be positive, got {self.duration}")
        times = [pulse.time for pulse in self.pulses]
        if any(t < 0 or t > self.duration for t in times):
            raise ValueError(f"pulse times {times} fall outside [0, {self.duration}]")
        if any(later < earlier for earlier, later in zip(times, times[1:])):
            raise ValueError(f"pulse times must be ordered, got {times}")
        return self


class GateSchedule(PulseSchedule):
    m: int = 1
    t_m: float = 0.0
    phi: float = 0.0

    @property
    def t_gate(self) -> float:
        return self.duration


class FeasibleGate(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: int
    t_gate: float
    g_equal: float


class GateDesign(BaseModel):
    model_config = ConfigDict(frozen=True)

    omega0: float
    g0: float
    g1: float
    g2: float
    m: int
    phi: float
    calibration: PhaseCalibration
    schedule: GateSchedule = Field(repr=False)


class DiscrepancyRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: int
    t_gate: float
    t_gate_reference: float | None
    g_equal: float
    g_equal_reference: float | None
    g_normal_mode: float
    closure_mismatch: float


# NV spin


def _spin_one_matrices() -> tuple[np.ndarray, np.ndarray]:
    # basis ordered S_z = +1, 0, −1
    sz = np.diag([1.0, 0.0, -1.0])
    sx = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]) / math.sqrt(2)
    return sz, sx


def _splitting(field_tesla: float, zeta: float) -> float:
    sz, sx = _spin_one_matrices()
    hamiltonian = NV_ZERO_FIELD_SPLITTING * sz @ sz + NV_GYROMAGNETIC_RATIO * field_tesla * (
        math.cos(zeta) * sz + math.sin(zeta) * sx
    )
    energies, vectors = np.linalg.eigh(hamiltonian)
    overlaps = np.abs(vectors) ** 2
    zero_branch = int(np.argmax(overlaps[1]))
    minus_branch = int(np.argmax(overlaps[2]))
    if zero_branch == minus_branch:
        # ties are broken in favour of the S_z=0 branch keeping its largest overlap
        minus_branch = int(np.argmax(np.where(np.arange(3) == zero_branch, -1.0, overlaps[2])))
    return float(energies[minus_branch] - energies[zero_branch])


def nv_level_splitting(field_tesla: float, zeta: float) -> tuple[float, float]:
    """
    Splitting between the branches adiabatically connected to |S_z=−1⟩ and |S_z=0⟩ of the NV ground state in a
    field of magnitude `field_tesla` tilted by `zeta` from the NV axis, and its derivative with respect to zeta.
    """
    require(field_tesla >= 0, f"magnetic field must not be negative, got {field_tesla}")
    splitting = _splitting(field_tesla, zeta)
    derivative = (
        _splitting(field_tesla, zeta + FINITE_DIFFERENCE_STEP) - _splitting(field_tesla, zeta - FINITE_DIFFERENCE_STEP)
    ) / (2 * FINITE_DIFFERENCE_STEP)
    return splitting, derivative


def spin_torsion_coupling(derivative: float, inertia: float, omega: float) -> float:
    """
    Zero-point angular spread of the torsional mode times the angular gradient of the spin splitting.

    The coupling is signed: it follows the sign of `derivative`, so a splitting that falls as the particle twists
    gives a negative g_i. Only the product g₁g₂ enters the gate phase.
    """
    require(inertia > 0, f"moment of inertia must be positive, got {inertia}")
    require(omega > 0, f"mode frequency must be positive, got {omega}")
    return math.sqrt(HBAR / (8 * inertia * omega)) * derivative


def spin_qubit(field_tesla: float, zeta: float, inertia: float, omega: float, gamma: float = 0.0) -> SpinQubitParams:
    splitting, derivative = nv_level_splitting(field_tesla, zeta)
    return SpinQubitParams(
        splitting=splitting,
        d_split_d_zeta=derivative,
        g_spin=spin_torsion_coupling(derivative, inertia, omega),
        gamma_dephase=gamma,
    )


# Gate algebra


def _check_modes(omega0: float, g0: float):
    require(omega0 > 0, f"omega0 must be positive, got {omega0}")
    require(0 <= g0 < omega0, f"g0 must lie in [0, omega0), got g0={g0}, omega0={omega0}")


def normal_modes(omega0: float, g0: float) -> NormalModes:
    _check_modes(omega0, g0)
    return NormalModes(omega_plus=(omega0 + g0) / 2, omega_minus=(omega0 - g0) / 2)


def cphase_phase(omega0: float, g0: float, g1: float, g2: float, m: int) -> float:
    _check_modes(omega0, g0)
    require(m >= 1, f"m must be a positive integer, got {m}")
    return 8 * g0 * g1 * g2 * m * math.pi / (omega0 * (omega0 + g0) * (omega0 - g0))


def mode_displacement(omega0: float, g0: float, g1: float, g2: float) -> float:
    """
    Bound on the coherent excursion |α| of either local mode from its starting state during one echo segment:
    each normal mode at ω₀ ± g₀ is pushed by at most (|g₁| + |g₂|)/√2 and travels up to twice its static shift.
    """
    _check_modes(omega0, g0)
    return 2 * (abs(g1) + abs(g2)) / (omega0 - g0)


def required_coupling_product(omega0: float, g0: float, m: int) -> float:
    _check_modes(omega0, g0)
    require(g0 > 0, "g0 must be positive for the gate to entangle")
    require(m >= 1, f"m must be a positive integer, got {m}")
    return omega0 * (omega0 + g0) * (omega0 - g0) / (16 * g0 * m)


def cz_coupling_product(omega0: float, g0: float, m: int, calibration: PhaseCalibration) -> float:
    product = required_coupling_product(omega0, g0, m)
    return product if calibration is PhaseCalibration.STATED else product / 2


def select_m(omega0: float, g0: float, t2: float, g_cap: float) -> list[FeasibleGate]:
    """
    All m whose gate time stays below T₂/5 and whose equal couplings g₁ = g₂ stay below both the cap and ω₀.
    """
    require(t2 > 0, f"T2 must be positive, got {t2}")
    require(g_cap > 0, f"g_cap must be positive, got {g_cap}")
    feasible = []
    m = 1
    while (t_gate := 4 * math.pi * m / omega0) < t2 / 5:
        g_equal = math.sqrt(required_coupling_product(omega0, g0, m))
        if g_equal <= min(g_cap, omega0):
            feasible.append(FeasibleGate(m=m, t_gate=t_gate, g_equal=g_equal))
        m += 1
    return feasible


def analytic_echo_propagator(omega0: float, g0: float, g1: float, g2: float, m: int) -> np.ndarray:
    phi = cphase_phase(omega0, g0, g1, g2, m)
    return np.diag(np.exp(1j * phi * np.array([1.0, 0.0, 0.0, 1.0])))


def analytic_gate(omega0: float, g0: float, g1: float, g2: float, m: int) -> np.ndarray:
    phi = cphase_phase(omega0, g0, g1, g2, m)
    return np.diag(np.exp(2j * phi * np.array([0.0, 0.0, 0.0, 1.0])))


def gate_schedule(
    omega0: float, g0: float, m: int, phi: float, correction_angle: float | None = None
) -> GateSchedule:
    """
    Echo flip of both qubits at t_m, a second flip at 2t_m and the closing Z rotation (−φ unless overridden).
    """
    modes = normal_modes(omega0, g0)
    require(m >= 1, f"m must be a positive integer, got {m}")
    t_m = 2 * math.pi * m / (modes.omega_plus + modes.omega_minus)
    correction = -phi if correction_angle is None else correction_angle
    pulses = (
        Pulse(time=t_m, axis="x", angle=math.pi),
        Pulse(time=2 * t_m, axis="x", angle=math.pi),
        Pulse(time=2 * t_m, axis="z", angle=correction),
    )
    return GateSchedule(duration=2 * t_m, pulses=pulses, m=m, t_m=t_m, phi=phi)


def loop_closure_mismatch(omega0: float, g0: float, m: int) -> float:
    """
    Fraction of a cycle (in [0, 0.5]) by which the normal modes ω₀ ± g₀ miss a closed phase-space loop at t_m.
    """
    _check_modes(omega0, g0)
    turns = m * g0 / omega0
    return abs(turns - round(turns))


def closing_g0(omega0: float, g0: float, m: int) -> float:
    """The mode coupling nearest to g0 for which both normal modes complete whole cycles at t_m."""
    _check_modes(omega0, g0)
    require(m >= 1, f"m must be a positive integer, got {m}")
    snapped = max(1, round(m * g0 / omega0)) * omega0 / m
    require(snapped < omega0, f"no closing mode coupling below omega0 exists for m={m}")
    if snapped != g0:
        logger.info(
            f"Mode coupling snapped from 2π×{g0 / TWO_PI / 1e3:.3f} kHz to 2π×{snapped / TWO_PI / 1e3:.3f} kHz "
            f"to close the phase-space loops at m={m}"
        )
    return snapped


def design_gate(
    omega0: float,
    g0: float,
    m: int,
    g1: float | None = None,
    g2: float | None = None,
    calibration: PhaseCalibration = PhaseCalibration.NORMAL_MODE,
    close_loops: bool = False,
) -> GateDesign:
    if close_loops:
        g0 = closing_g0(omega0, g0, m)
    if g1 is None or g2 is None:
        g1 = g2 = math.sqrt(cz_coupling_product(omega0, g0, m, calibration))
    phi = cphase_phase(omega0, g0, g1, g2, m)
    schedule = gate_schedule(omega0, g0, m, phi, calibration.correction_angle(phi))
    return GateDesign(
        omega0=omega0, g0=g0, g1=g1, g2=g2, m=m, phi=phi, calibration=calibration, schedule=schedule
    )


# Normal-mode closed form

SPIN_CONFIGURATIONS = ((1, 1), (1, -1), (-1, 1), (-1, -1))
"""σᶻ eigenvalues of the basis |00⟩, |01⟩, |10⟩, |11⟩."""


def _driven_segment(beta: complex, omega: float, force: float, duration: float) -> tuple[complex, float]:
    # ωc†c + f(c + c†) acting on the coherent state |β⟩ for `duration`; returns the new amplitude and the phase
    shift = force / omega
    rotated = (beta + shift) * np.exp(-1j * omega * duration)
    phase = force * force * duration / omega - shift * beta.imag + shift * rotated.imag
    return complex(rotated - shift), float(phase)


def _coherent_overlap(bra: complex, ket: complex) -> complex:
    return complex(np.exp(-0.5 * abs(bra) ** 2 - 0.5 * abs(ket) ** 2 + np.conj(bra) * ket))


def normal_mode_spin_state(
    omega0: float,
    g0: float,
    g1: float,
    g2: float,
    m: int,
    correction_angle: float,
    rho_spin: np.ndarray | None = None,
) -> np.ndarray:
    """
    Exact two-qubit state after the echoed schedule under the rotating-wave Hamiltonian, with both torsional modes
    starting in the vacuum. Open phase-space loops are accounted for through the overlap of the final coherent
    states, so the result is valid for any (ω₀, g₀, m).
    """
    _check_modes(omega0, g0)
    if rho_spin is None:
        plus = np.full(4, 0.5, dtype=complex)
        rho_spin = np.outer(plus, plus.conj())
    t_m = 2 * math.pi * m / omega0
    modes = ((omega0 + g0, 1.0), (omega0 - g0, -1.0))

    phases = np.zeros(4)
    amplitudes = np.zeros((4, 2), dtype=complex)
    for index, (z1, z2) in enumerate(SPIN_CONFIGURATIONS):
        for flip in (1, -1):
            for k, (omega, parity) in enumerate(modes):
                force = flip * (g1 * z1 + parity * g2 * z2) / math.sqrt(2)
                amplitudes[index, k], phase = _driven_segment(amplitudes[index, k], omega, force, t_m)
                phases[index] += phase
        phases[index] -= correction_angle * (z1 + z2) / 2

    out = np.empty((4, 4), dtype=complex)
    for i in range(4):
        for j in range(4):
            overlap = _coherent_overlap(amplitudes[j, 0], amplitudes[i, 0]) * _coherent_overlap(
                amplitudes[j, 1], amplitudes[i, 1]
            )
            out[i, j] = rho_spin[i, j] * np.exp(1j * (phases[i] - phases[j])) * overlap
    return out


def discrepancy_report(omega0: float, g0: float, ms: tuple[int, ...] = (4, 10, 16)) -> list[DiscrepancyRow]:
    rows = []
    for m in ms:
        rows.append(
            DiscrepancyRow(
                m=m,
                t_gate=4 * math.pi * m / omega0,
                t_gate_reference=REFERENCE_GATE_TIMES.get(m),
                g_equal=math.sqrt(required_coupling_product(omega0, g0, m)),
                g_equal_reference=REFERENCE_COUPLINGS.get(m),
                g_normal_mode=math.sqrt(cz_coupling_product(omega0, g0, m, PhaseCalibration.NORMAL_MODE)),
                closure_mismatch=loop_closure_mismatch(omega0, g0, m),
            )
        )
    return rows
