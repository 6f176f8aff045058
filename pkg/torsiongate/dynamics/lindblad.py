"""
Lindblad integration of the qubit–mode density matrix through a schedule of instantaneous pulses.

    ρ̇ = −i[H, ρ] + κ(n̄+1) Σᵢ 𝒟[bᵢ]ρ + κn̄ Σᵢ 𝒟[bᵢ†]ρ + (Γ/4) Σᵢ 𝒟[σᵢᶻ]ρ,   𝒟[A]ρ = AρA† − ½{A†A, ρ}

When a diagonal frame generator F is given, the state is integrated as ρ_I = e^{iFt} ρ e^{−iFt}. The Hamiltonian
H − F is then split into components oscillating as e^{iνt}, and every collapse operator must be an eigenoperator of
the frame so that its dissipator is frame invariant. Reported states are always in the lab frame.
"""

import logging
import math
from typing import Callable, Literal, Sequence, TypeVar

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import norm as sparse_norm

from torsiongate.dynamics import NumericalFailure
from torsiongate.dynamics.operators import OperatorSet
from torsiongate.dynamics.states import DensityMatrix
from torsiongate.physics import DomainError, require
from torsiongate.physics.gate_design import Pulse, PulseSchedule

logger = logging.getLogger(__name__)

HERMITICITY_TOLERANCE = 1e-12
TRACE_DRIFT_LIMIT = 1e-7
SAMPLE_HERMITICITY_SLACK = 1e-10
SAMPLE_EIGENVALUE_SLACK = -1e-8
FIXED_STEPS = 200_000

T = TypeVar("T")


class LindbladModel(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    hamiltonian: sp.csr_matrix
    """Hamiltonian in rad/s over the full space."""

    operators: OperatorSet
    kappa: float = 0.0
    """Torsional energy decay rate κ = ω/Q in rad/s."""

    n_th: float = 0.0
    """Mean thermal occupancy of the bath."""

    gamma: float = 0.0
    """Spin dephasing rate Γ in rad/s."""

    rwa: bool = True
    """Whether the Hamiltonian was built without the counter-rotating mode-mode terms."""

    frame: np.ndarray | None = Field(default=None, repr=False)
    """Diagonal of the rotating-frame generator, or None to integrate in the lab frame."""

    @field_validator("hamiltonian", mode="before")
    @classmethod
    def to_csr(cls, value) -> sp.csr_matrix:
        return sp.csr_matrix(value)

    @model_validator(mode="after")
    def check_model(self):
        for name in ("kappa", "n_th", "gamma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must not be negative, got {getattr(self, name)}")
        dim = self.operators.space.dim
        if self.hamiltonian.shape != (dim, dim):
            raise ValueError(f"hamiltonian shape {self.hamiltonian.shape} does not match the space dimension {dim}")
        scale = max(sparse_norm(self.hamiltonian), 1.0)
        asymmetry = sparse_norm(self.hamiltonian - self.hamiltonian.conj().T)
        if asymmetry > HERMITICITY_TOLERANCE * scale:
            raise ValueError(f"hamiltonian is not Hermitian (residual {asymmetry:.2e})")
        return self

    def collapse_operators(self) -> list[tuple[float, sp.csr_matrix]]:
        channels = []
        for b, b_dag in zip(self.operators.b, self.operators.b_dag):
            channels.append((self.kappa * (self.n_th + 1), b))
            channels.append((self.kappa * self.n_th, b_dag))
        for sigma_z in self.operators.sigma_z:
            channels.append((self.gamma / 4, sigma_z))
        return [(rate, op) for rate, op in channels if rate > 0]


def _frequency_components(hamiltonian: sp.csr_matrix, frame: np.ndarray | None) -> list[tuple[float, sp.csr_matrix]]:
    if frame is None:
        return [(0.0, hamiltonian)]
    coo = (hamiltonian - sp.diags(frame)).tocoo()
    keep = coo.data != 0
    rows, cols, data = coo.row[keep], coo.col[keep], coo.data[keep]
    nu = frame[rows] - frame[cols]
    resolution = 1e-9 * max(float(np.max(np.abs(frame))), 1.0)
    keys = np.rint(nu / resolution).astype(np.int64)
    components = []
    for key in np.unique(keys):
        selected = keys == key
        matrix = sp.csr_matrix((data[selected], (rows[selected], cols[selected])), shape=hamiltonian.shape)
        components.append((float(np.mean(nu[selected])), matrix))
    return components


def _check_eigenoperator(op: sp.csr_matrix, frame: np.ndarray):
    coo = op.tocoo()
    shifts = frame[coo.row] - frame[coo.col]
    if shifts.size and np.ptp(shifts) > 1e-9 * max(float(np.max(np.abs(frame))), 1.0):
        raise DomainError("collapse operators must be eigenoperators of the rotating frame")


def _lindblad_rhs(model: LindbladModel):
    dim = model.operators.space.dim
    components = _frequency_components(model.hamiltonian, model.frame)
    channels = model.collapse_operators()
    if model.frame is not None:
        for _, op in channels:
            _check_eigenoperator(op, model.frame)
    decay = sp.csr_matrix((dim, dim), dtype=complex)
    for rate, op in channels:
        decay = decay + rate * (op.conj().T @ op)
    decay = sp.csr_matrix(decay)

    def rhs(t, y):
        rho = y.reshape(dim, dim)
        half = -0.5 * (decay @ rho)
        for nu, component in components:
            half += (-1j * np.exp(1j * nu * t)) * (component @ rho)
        out = half + half.conj().T
        for rate, op in channels:
            out += rate * (op @ (op @ rho).conj().T)
        return out.ravel()

    return rhs


def pulse_unitary(pulse: Pulse, ops: OperatorSet) -> sp.csr_matrix:
    """U_axis(θ) = exp(−iθ/2 Σσ^axis) over the selected qubits, identity on the modes."""
    paulis = ops.sigma_x if pulse.axis == "x" else ops.sigma_z
    qubits = range(ops.space.sites) if pulse.qubits is None else pulse.qubits
    unitary = ops.identity
    for qubit in qubits:
        require(0 <= qubit < ops.space.sites, f"pulse addresses qubit {qubit} outside the space")
        # σ² = 1, so exp(−iθσ/2) = cos(θ/2) − i sin(θ/2) σ
        single = math.cos(pulse.angle / 2) * ops.identity - 1j * math.sin(pulse.angle / 2) * paulis[qubit]
        unitary = unitary @ single
    return sp.csr_matrix(unitary)


def _to_frame(unitary: sp.csr_matrix, frame: np.ndarray | None, t: float) -> sp.csr_matrix:
    if frame is None:
        return unitary
    coo = unitary.tocoo()
    data = coo.data * np.exp(1j * (frame[coo.row] - frame[coo.col]) * t)
    return sp.csr_matrix((data, (coo.row, coo.col)), shape=unitary.shape)


def _to_lab(rho: np.ndarray, frame: np.ndarray | None, t: float) -> np.ndarray:
    if frame is None:
        return rho.copy()
    phases = np.exp(-1j * frame * t)
    return phases[:, None] * rho * phases.conj()[None, :]


def _fixed_step(rhs, rho: np.ndarray, t0: float, targets: Sequence[float], step: float) -> list[np.ndarray]:
    states = []
    y, t = rho.ravel().copy(), t0
    for target in targets:
        n_steps = max(1, math.ceil((target - t) / step - 1e-9))
        h = (target - t) / n_steps
        for _ in range(n_steps):
            k1 = rhs(t, y)
            k2 = rhs(t + h / 2, y + h / 2 * k1)
            k3 = rhs(t + h / 2, y + h / 2 * k2)
            k4 = rhs(t + h, y + h * k3)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
            if not np.all(np.isfinite(y)):
                raise NumericalFailure("fixed-step integration diverged", t - h)
        t = target
        states.append(y)
    return states


def _adaptive(rhs, rho: np.ndarray, t0: float, targets: Sequence[float], tolerance: float) -> list[np.ndarray]:
    solution = solve_ivp(
        rhs,
        t_span=(t0, targets[-1]),
        y0=rho.ravel(),
        method="DOP853",
        t_eval=targets,
        rtol=tolerance,
        atol=tolerance,
    )
    if solution.status != 0 or solution.y.shape[1] != len(targets):
        last = float(solution.t[-1]) if solution.t.size else t0
        raise NumericalFailure(f"adaptive integration failed: {solution.message}", last)
    return [solution.y[:, i] for i in range(len(targets))]


def _check_sample(state: DensityMatrix, check_positivity: bool):
    drift = abs(state.trace - 1)
    if drift > TRACE_DRIFT_LIMIT:
        raise NumericalFailure(f"trace drifted by {drift:.2e}", state.time)
    if (error := state.hermiticity_error()) > SAMPLE_HERMITICITY_SLACK:
        logger.warning(f"State at t={state.time:.6e} s deviates from Hermitian by {error:.2e}")
    if check_positivity and (eigenvalue := state.min_eigenvalue()) < SAMPLE_EIGENVALUE_SLACK:
        logger.warning(f"State at t={state.time:.6e} s has a negative eigenvalue {eigenvalue:.2e}")


def evolve_lindblad(
    model: LindbladModel,
    schedule: PulseSchedule,
    rho0: DensityMatrix | np.ndarray,
    samples: int = 101,
    times: Sequence[float] | None = None,
    method: Literal["adaptive", "fixed"] = "adaptive",
    tolerance: float = 1e-10,
    step: float | None = None,
    check_positivity: bool = False,
    observe: Callable[[DensityMatrix], T] | None = None,
) -> list[DensityMatrix] | list[T]:
    """
    Integrate the master equation over [0, schedule.duration] and return the state at each sample time. Samples
    default to `samples` uniform times; `times` replaces them. A sample at a pulse time shows the state after the
    pulse. When `observe` is given, it is applied to each sample and its results are returned in place of the
    states.
    """
    duration = schedule.duration
    rho = np.array(rho0.matrix if isinstance(rho0, DensityMatrix) else rho0, dtype=complex)
    require(rho.shape == (model.operators.space.dim,) * 2, f"initial state has shape {rho.shape}")
    if times is None:
        require(samples >= 1, f"samples must be positive, got {samples}")
        times = np.linspace(0, duration, samples) if samples > 1 else np.array([duration])
    sample_times = np.sort(np.asarray(times, dtype=float))
    require(
        sample_times.size > 0 and sample_times[0] >= 0 and sample_times[-1] <= duration * (1 + 1e-12),
        "sample times must lie within the schedule",
    )

    snap = 1e-12 * duration
    pulse_times = sorted({p.time for p in schedule.pulses if p.time > 0})
    for t in pulse_times:
        sample_times[np.abs(sample_times - t) <= snap] = t
    sample_times[np.abs(sample_times - duration) <= snap] = duration

    rhs = _lindblad_rhs(model)
    frame = model.frame
    unitaries = [(p.time, pulse_unitary(p, model.operators)) for p in schedule.pulses]
    advance = (
        (lambda state, t0, targets: _adaptive(rhs, state, t0, targets, tolerance))
        if method == "adaptive"
        else (lambda state, t0, targets: _fixed_step(rhs, state, t0, targets, step or duration / FIXED_STEPS))
    )
    observe = observe or (lambda state: state)
    results = []

    def record(matrix: np.ndarray, t: float):
        state = DensityMatrix(matrix=_to_lab(matrix, frame, t), time=t)
        _check_sample(state, check_positivity)
        results.append(observe(state))

    def apply_pulses(matrix: np.ndarray, t: float) -> np.ndarray:
        for time, unitary in unitaries:
            if time == t:
                u = _to_frame(unitary, frame, time)
                matrix = u @ (u @ matrix).conj().T
        return matrix

    t0 = 0.0
    rho = apply_pulses(rho, 0.0)
    for _ in sample_times[sample_times == 0.0]:
        record(rho, 0.0)
    for t1 in [t for t in pulse_times if t < duration] + [duration]:
        inner = [t for t in sample_times if t0 < t < t1]
        states = advance(rho, t0, inner + [t1])
        for t, y in zip(inner, states):
            record(y.reshape(rho.shape), t)
        rho = states[-1].reshape(rho.shape)
        rho = apply_pulses(rho, t1)
        for _ in sample_times[sample_times == t1]:
            record(rho, t1)
        drift = abs(np.trace(rho) - 1)
        if drift > TRACE_DRIFT_LIMIT:
            raise NumericalFailure(f"trace drifted by {drift:.2e}", t0)
        t0 = t1
    return results
