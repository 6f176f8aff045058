import hashlib
import json
import logging
import math
import os
from importlib import resources
from typing import Annotated, Any, Literal

from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveFloat, PositiveInt, model_validator

from torsiongate.dynamics.operators import CUTOFF_CONVERGENCE, default_n_fock
from torsiongate.models.utils.dicts import conform_keys
from torsiongate.models.utils.io import parse_config, parse_config_file
from torsiongate.physics.ellipsoid_optics import ParticleGeometry
from torsiongate.physics.gate_design import GateDesign, PhaseCalibration, design_gate
from torsiongate.physics.trap_coupling import TrapConfig, bose_occupancy, coupling_g0, quality_to_kappa, torsional_mode

logger = logging.getLogger(__name__)

PRESETS_PACKAGE = "torsiongate.presets"
PRESET_ALIASES = {"paper_defaults": "reference"}

DEFAULT_QUALITY = 1e6
DEFAULT_N_TH = 0.01


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GeometryConfig(Section):
    a_m: PositiveFloat
    """Long semiaxis a of the ellipsoid in meters."""

    b_m: PositiveFloat
    """Short semiaxis b of the ellipsoid in meters."""

    rho_kg_m3: PositiveFloat = 3500.0
    """Mass density of the particle in kg/m³."""

    eps_r: Annotated[float, Field(gt=1)] = 5.7
    """Relative permittivity of the particle."""

    @model_validator(mode="after")
    def check_elongation(self):
        if self.a_m < self.b_m:
            raise ValueError(f"`a_m` ({self.a_m}) must not be shorter than `b_m` ({self.b_m})")
        return self

    def particle(self) -> ParticleGeometry:
        return ParticleGeometry(a=self.a_m, b=self.b_m, rho=self.rho_kg_m3, eps_r=self.eps_r)


class TrapSettings(Section):
    power_w: PositiveFloat
    """Trapping laser power per tweezer in watts."""

    waist_m: PositiveFloat = 500e-9
    """Beam waist radius in meters."""

    wavelength_m: PositiveFloat = 1064e-9
    """Trapping laser wavelength in meters."""

    spacing_m: PositiveFloat = 1.06e-6
    """Center-to-center distance between the two particles in meters."""

    def trap(self) -> TrapConfig:
        return TrapConfig(power=self.power_w, waist=self.waist_m, wavelength=self.wavelength_m, spacing=self.spacing_m)


class GateConfig(Section):
    m: PositiveInt = 4
    """Number of mode periods per echo half; the gate lasts 4πm/ω₀."""

    g1_rad_s: PositiveFloat | None = None
    """Spin-torsion coupling of the first qubit in rad/s."""

    g2_rad_s: PositiveFloat | None = None
    """Spin-torsion coupling of the second qubit in rad/s."""

    derive_couplings: bool | None = None
    """
    Derive equal couplings g₁ = g₂ from the CZ condition of the calibration. Defaults to true when neither coupling
    is given and to false otherwise.
    """

    calibration: PhaseCalibration = PhaseCalibration.NORMAL_MODE
    """Phase algebra used to derive couplings and the final Z correction, `stated` or `normal_mode`."""

    close_loops: bool = True
    """Snap g₀ to the nearest value for which both normal modes close their phase-space loops at t_m."""

    omega0_rad_s: PositiveFloat | None = None
    """Torsional frequency ω₀ in rad/s. Computed from the geometry and trap when omitted."""

    g0_rad_s: PositiveFloat | None = None
    """Mode-mode coupling g₀ in rad/s. Computed from the geometry and trap when omitted."""

    t2_s: PositiveFloat = 1e-3
    """Spin coherence time bounding the gate time at T₂/5 when listing feasible m."""

    g_cap_rad_s: PositiveFloat = 2 * math.pi * 500e3
    """Largest spin-torsion coupling considered reachable, in rad/s."""

    @model_validator(mode="after")
    def check_couplings(self):
        given = [key for key in ("g1_rad_s", "g2_rad_s") if getattr(self, key) is not None]
        if self.derive_couplings is True and given:
            keys = ", ".join(f"`{key}`" for key in given)
            raise ValueError(f"{keys} cannot be given when `derive_couplings` is true")
        if self.derive_couplings is False or given:
            missing = [key for key in ("g1_rad_s", "g2_rad_s") if getattr(self, key) is None]
            if missing:
                keys = ", ".join(f"`{key}`" for key in missing)
                raise ValueError(f"{keys} required when couplings are not derived")
        return self

    @property
    def derives_couplings(self) -> bool:
        return self.derive_couplings if self.derive_couplings is not None else self.g1_rad_s is None


class NoiseConfig(Section):
    q: PositiveFloat | None = None
    """Mechanical quality factor Q = ω/κ. Exclusive with `kappa_rad_s`; defaults to 1e6."""

    kappa_rad_s: NonNegativeFloat | None = None
    """Torsional energy decay rate in rad/s."""

    n_th: NonNegativeFloat | None = None
    """Mean thermal occupancy of the bath. Exclusive with `temperature_k`; defaults to 0.01."""

    temperature_k: NonNegativeFloat | None = None
    """Bath temperature in kelvin, converted with the Bose-Einstein occupancy at ω₀."""

    gamma_hz: NonNegativeFloat | None = None
    """Spin dephasing rate read as Γ/2π in Hz. Exclusive with `gamma_rad_s`; defaults to 0."""

    gamma_rad_s: NonNegativeFloat | None = None
    """Spin dephasing rate Γ in rad/s."""

    @model_validator(mode="after")
    def check_exclusive(self):
        for first, second in (("q", "kappa_rad_s"), ("n_th", "temperature_k"), ("gamma_hz", "gamma_rad_s")):
            if getattr(self, first) is not None and getattr(self, second) is not None:
                raise ValueError(f"`{first}` and `{second}` are mutually exclusive")
        return self

    def kappa(self, omega: float) -> float:
        if self.kappa_rad_s is not None:
            return self.kappa_rad_s
        return quality_to_kappa(omega, self.q if self.q is not None else DEFAULT_QUALITY)

    def occupancy(self, omega: float) -> float:
        if self.temperature_k is not None:
            return bose_occupancy(omega, self.temperature_k)
        return self.n_th if self.n_th is not None else DEFAULT_N_TH

    def gamma(self) -> float:
        if self.gamma_rad_s is not None:
            return self.gamma_rad_s
        return 2 * math.pi * (self.gamma_hz or 0.0)


class NumericsConfig(Section):
    n_fock: Annotated[int, Field(ge=2)] = 8
    """Smallest Fock cutoff per mode; raised automatically for hot baths."""

    tolerance: PositiveFloat = 1e-10
    """Relative and absolute tolerance of the adaptive integrator."""

    samples: Annotated[int, Field(ge=2)] = 101
    """Uniform trajectory samples over the gate."""

    method: Literal["adaptive", "fixed"] = "adaptive"

    workers: PositiveInt = 1
    """Processes used to evaluate independent sweep points."""

    fig3_points: Annotated[int, Field(ge=2)] = 25
    """Dephasing grid size of the infidelity-versus-Γ figure."""

    kappa_points: PositiveInt = 7
    """Decay-rate grid size of the infidelity-versus-κ figure."""

    check_positivity: bool = False
    """Check the smallest eigenvalue of every sampled state."""

    cutoff_convergence: PositiveFloat | None = CUTOFF_CONVERGENCE
    """Largest change of ξ accepted when the cutoff grows by two levels; null trusts the first cutoff."""

    def cutoff_for(self, n_th: float, displacement: float = 0.0) -> int:
        return max(self.n_fock, default_n_fock(n_th, displacement))


class ExperimentConfig(Section):
    """
    Everything needed to go from particle geometry to gate infidelity. All physical values are SI and carry their
    unit in the key name. Keys are matched case-insensitively and dashes may be used in place of underscores.
    """

    geometry: GeometryConfig

    trap: TrapSettings

    gate: GateConfig = GateConfig()

    noise: NoiseConfig = NoiseConfig()

    numerics: NumericsConfig = NumericsConfig()

    rwa: bool = True
    """Drop the counter-rotating mode-mode terms b₁†b₂† + b₁b₂."""

    @model_validator(mode="before")
    @classmethod
    def conform(cls, data: Any) -> Any:
        return conform_keys(data)

    @classmethod
    def from_text(cls, content: str) -> "ExperimentConfig":
        return cls(**parse_config(content))

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        logger.info(f"Loading configuration at: {path}")
        return cls(**parse_config_file(path))

    def omega0(self) -> float:
        if self.gate.omega0_rad_s is not None:
            return self.gate.omega0_rad_s
        return torsional_mode(self.geometry.particle(), self.trap.trap()).omega

    def g0(self) -> float:
        if self.gate.g0_rad_s is not None:
            return self.gate.g0_rad_s
        return coupling_g0(self.geometry.particle(), self.trap.trap()).g0

    def kappa(self) -> float:
        return self.noise.kappa(self.omega0())

    def n_th(self) -> float:
        return self.noise.occupancy(self.omega0())

    def gamma(self) -> float:
        return self.noise.gamma()

    def design(self) -> GateDesign:
        gate = self.gate
        couplings = (None, None) if gate.derives_couplings else (gate.g1_rad_s, gate.g2_rad_s)
        return design_gate(
            self.omega0(),
            self.g0(),
            gate.m,
            *couplings,
            calibration=gate.calibration,
            close_loops=gate.close_loops,
        )

    def config_hash(self) -> str:
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]

    def echo(self) -> dict[str, str]:
        """Flattened `section.key: value` pairs of every field, for provenance headers and console output."""
        flat = {}
        for section, values in self.model_dump(mode="json").items():
            if isinstance(values, dict):
                flat.update({f"{section}.{key}": str(value) for key, value in values.items()})
            else:
                flat[section] = str(values)
        return flat


def preset_names() -> list[str]:
    return sorted(
        entry.name.removesuffix(".json")
        for entry in resources.files(PRESETS_PACKAGE).iterdir()
        if entry.name.endswith(".json")
    )


def load_config(path: str) -> ExperimentConfig:
    """
    Load a configuration file. A name that is not an existing file but matches a bundled preset, or one of its
    aliases, loads the preset. A file is read as is; keys it leaves out take the model defaults, not the preset's.
    """
    name = PRESET_ALIASES.get(path, path)
    if not os.path.exists(path) and name in preset_names():
        logger.info(f"Loading bundled preset: {name}")
        return ExperimentConfig.from_text(resources.files(PRESETS_PACKAGE).joinpath(f"{name}.json").read_text())
    return ExperimentConfig.from_file(path)
