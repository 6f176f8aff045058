"""
Truncated Fock-space operators for qubit–torsional-mode pairs and the Hamiltonian of two NV spins coupled through
two interacting torsional modes.

The tensor ordering is all qubits first, then all modes: qubit1 ⊗ qubit2 ⊗ mode1 ⊗ mode2 for two sites. A qubit in
|0⟩ (S_z = 0) is the +1 eigenstate of σᶻ.
"""

import logging
import math
from enum import Enum
from functools import reduce

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, model_validator

from torsiongate.physics import DomainError, require

logger = logging.getLogger(__name__)

TAIL_WARNING = 1e-6
TAIL_LIMIT = 1e-4
CUTOFF_CONVERGENCE = 1e-4
"""Largest change of the infidelity tolerated when the Fock cutoff grows by two."""


class CutoffError(DomainError):
    """Raised when the Fock cutoff discards more than the tolerated thermal weight."""


class Frame(str, Enum):
    LAB = "lab"
    INTERACTION = "interaction"


class SpaceSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_fock: int
    """Fock cutoff per torsional mode, shared by every mode."""

    sites: int = 2
    """Number of qubit–mode pairs."""

    @model_validator(mode="after")
    def check_sizes(self):
        if self.n_fock < 2:
            raise ValueError(f"n_fock must be at least 2, got {self.n_fock}")
        if self.sites not in (1, 2):
            raise ValueError(f"sites must be 1 or 2, got {self.sites}")
        return self

    @property
    def spin_dim(self) -> int:
        return 2**self.sites

    @property
    def mode_dim(self) -> int:
        return self.n_fock**self.sites

    @property
    def dim(self) -> int:
        return self.spin_dim * self.mode_dim

    @property
    def factor_dims(self) -> tuple[int, ...]:
        return (2,) * self.sites + (self.n_fock,) * self.sites


class OperatorSet(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    space: SpaceSpec
    b: tuple[sp.csr_matrix, ...]
    """Annihilation operator of each mode."""
    sigma_z: tuple[sp.csr_matrix, ...]
    sigma_x: tuple[sp.csr_matrix, ...]
    identity: sp.csr_matrix

    @property
    def b_dag(self) -> tuple[sp.csr_matrix, ...]:
        return tuple(op.conj().T.tocsr() for op in self.b)

    @property
    def number(self) -> tuple[sp.csr_matrix, ...]:
        return tuple((op.conj().T @ op).tocsr() for op in self.b)


def annihilation(n_fock: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, n_fock)), offsets=1, format="csr", dtype=complex)


PAULI_Z = np.diag([1.0, -1.0]).astype(complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def embed(local, position: int, dims: tuple[int, ...]) -> sp.csr_matrix:
    """Place `local` on tensor factor `position` with identities elsewhere."""
    factors = [sp.identity(d, dtype=complex, format="csr") for d in dims]
    factors[position] = sp.csr_matrix(local, dtype=complex)
    return reduce(lambda left, right: sp.kron(left, right, format="csr"), factors)


def build_operators(space: SpaceSpec) -> OperatorSet:
    dims = space.factor_dims
    sites = space.sites
    return OperatorSet(
        space=space,
        b=tuple(embed(annihilation(space.n_fock), sites + i, dims) for i in range(sites)),
        sigma_z=tuple(embed(PAULI_Z, i, dims) for i in range(sites)),
        sigma_x=tuple(embed(PAULI_X, i, dims) for i in range(sites)),
        identity=sp.identity(space.dim, dtype=complex, format="csr"),
    )


def build_hamiltonian(
    ops: OperatorSet,
    omega0: float,
    g0: float,
    g1: float,
    g2: float,
    frame: Frame = Frame.INTERACTION,
    rwa: bool = True,
    splittings: tuple[float, float] = (0.0, 0.0),
) -> sp.csr_matrix:
    """
    H = Σᵢ [ω₀ bᵢ†bᵢ + gᵢ σᵢᶻ(bᵢ† + bᵢ)] + g₀(b₁†b₂ + b₂†b₁), plus g₀(b₁†b₂† + b₁b₂) when `rwa` is off. The lab
    frame adds the spin splittings Eᵢ/2·σᵢᶻ.
    """
    require(ops.space.sites == 2, "the gate Hamiltonian needs two sites")
    b1, b2 = ops.b
    b1d, b2d = ops.b_dag
    n1, n2 = ops.number
    sz1, sz2 = ops.sigma_z

    hamiltonian = omega0 * (n1 + n2)
    hamiltonian = hamiltonian + g1 * sz1 @ (b1d + b1) + g2 * sz2 @ (b2d + b2)
    hamiltonian = hamiltonian + g0 * (b1d @ b2 + b2d @ b1)
    if not rwa:
        hamiltonian = hamiltonian + g0 * (b1d @ b2d + b1 @ b2)
    if frame is Frame.LAB:
        hamiltonian = hamiltonian + splittings[0] / 2 * sz1 + splittings[1] / 2 * sz2
    return sp.csr_matrix(hamiltonian)


def mode_frame(ops: OperatorSet, omega: float) -> np.ndarray:
    """Diagonal of the free-mode generator ω Σᵢ bᵢ†bᵢ, usable as a rotating frame."""
    return omega * np.real(sum(n.diagonal() for n in ops.number))


def thermal_tail(n_th: float, n_fock: int) -> float:
    """Weight of the untruncated thermal distribution lying at or above the cutoff."""
    require(n_th >= 0, f"n_th must not be negative, got {n_th}")
    if n_th == 0:
        return 0.0
    return (n_th / (n_th + 1)) ** n_fock


def thermal_state(n_th: float, n_fock: int) -> np.ndarray:
    tail = thermal_tail(n_th, n_fock)
    if tail > TAIL_WARNING:
        logger.warning(f"Fock cutoff {n_fock} discards a thermal tail of {tail:.2e} at n_th={n_th}")
    if n_th == 0:
        weights = np.zeros(n_fock)
        weights[0] = 1.0
    else:
        weights = (n_th / (n_th + 1)) ** np.arange(n_fock)
    return np.diag(weights / weights.sum()).astype(complex)


def check_cutoff(n_th: float, n_fock: int):
    tail = thermal_tail(n_th, n_fock)
    if tail > TAIL_LIMIT:
        raise CutoffError(f"Fock cutoff {n_fock} discards a thermal tail of {tail:.2e} at n_th={n_th}")


def default_n_fock(n_th: float, displacement: float = 0.0) -> int:
    """
    Starting cutoff for a mode at thermal occupancy `n_th` that is pushed by up to |α| = `displacement` during the
    gate. The thermal part keeps the discarded tail below TAIL_LIMIT; the displacement adds its mean excitation
    number plus two standard deviations of the displaced thermal distribution.
    """
    require(displacement >= 0, f"displacement must not be negative, got {displacement}")
    if n_th <= 0.1:
        thermal = 8
    elif n_th <= 1:
        thermal = 14
    else:
        ratio = n_th / (n_th + 1)
        thermal = math.ceil(math.log(TAIL_LIMIT) / math.log(ratio))
    return thermal + math.ceil(displacement**2 + 2 * displacement * math.sqrt(2 * n_th + 1))


def export_operator(matrix, path: str):
    """Write a dense complex matrix, one row per line, entries as "re,im" separated by spaces."""
    dense = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix)
    with open(path, "w", newline="\n") as fd:
        for row in dense:
            fd.write(" ".join(f"{value.real:.17g},{value.imag:.17g}" for value in row) + "\n")
