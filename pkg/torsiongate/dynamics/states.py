import math

import numpy as np
from pydantic import BaseModel, ConfigDict

from torsiongate.dynamics.operators import OperatorSet, SpaceSpec

TARGET_STATE = np.array([1.0, 1.0, 1.0, -1.0], dtype=complex) / 2
"""CZ applied to |++⟩: (|00⟩ + |01⟩ + |10⟩ − |11⟩)/2."""

PLUS = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2)


class DensityMatrix(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray
    time: float = 0.0
    """Time stamp in seconds."""

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))[0])


def projector(vector: np.ndarray) -> np.ndarray:
    vector = np.asarray(vector, dtype=complex)
    return np.outer(vector, vector.conj())


def product_state(spin: np.ndarray, *modes: np.ndarray) -> np.ndarray:
    state = np.asarray(spin, dtype=complex)
    for mode in modes:
        state = np.kron(state, mode)
    return state


def plus_state(sites: int = 2) -> np.ndarray:
    """|+⟩^⊗sites as a density matrix."""
    vector = PLUS
    for _ in range(sites - 1):
        vector = np.kron(vector, PLUS)
    return projector(vector)


def coherent_state(alpha: complex, n_fock: int) -> np.ndarray:
    """Truncated coherent state vector, renormalized over the kept Fock levels."""
    if alpha == 0:
        vector = np.zeros(n_fock, dtype=complex)
        vector[0] = 1.0
        return vector
    n = np.arange(n_fock)
    log_factorial = np.array([math.lgamma(k + 1) for k in n])
    vector = np.exp(n * np.log(abs(alpha)) - 0.5 * log_factorial) * np.exp(1j * np.angle(alpha) * n)
    return vector / np.linalg.norm(vector)


def _split(rho: np.ndarray, space: SpaceSpec) -> np.ndarray:
    return np.asarray(rho).reshape(space.spin_dim, space.mode_dim, space.spin_dim, space.mode_dim)


def partial_trace_spins(rho: np.ndarray, space: SpaceSpec) -> np.ndarray:
    """Trace out the torsional modes, leaving the qubit state."""
    return np.einsum("iaja->ij", _split(rho, space))


def partial_trace_modes(rho: np.ndarray, space: SpaceSpec) -> np.ndarray:
    """Trace out the qubits, leaving the joint state of the torsional modes."""
    return np.einsum("iaib->ab", _split(rho, space))


def state_fidelity(rho_nv: np.ndarray, target: np.ndarray = TARGET_STATE) -> float:
    value = float(np.real(target.conj() @ rho_nv @ target))
    return min(1.0, max(0.0, value))


def purity(rho: np.ndarray) -> float:
    # tr ρ² = Σ|ρ_jk|² for Hermitian ρ
    return float(np.real(np.vdot(rho, rho)))


def trace_distance(first: np.ndarray, second: np.ndarray) -> float:
    difference = np.asarray(first) - np.asarray(second)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (difference + difference.conj().T)))))


def mode_occupations(rho: np.ndarray, ops: OperatorSet) -> tuple[float, ...]:
    diagonal = np.real(np.diagonal(rho))
    return tuple(float(np.real(n.diagonal()) @ diagonal) for n in ops.number)
