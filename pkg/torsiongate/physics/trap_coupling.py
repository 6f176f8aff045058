"""
Optical-trap field quantities and the torsional physics of a pair of trapped ellipsoids: the zz component of the
dyadic Green's function, torsional stiffness and frequency, and the quantized mode-mode coupling g₀.
"""

import cmath
import logging
import math
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from torsiongate.constants import EPSILON_0, HBAR, K_B, SPEED_OF_LIGHT
from torsiongate.physics import DegenerateGeometryError, require
from torsiongate.physics.ellipsoid_optics import ParticleGeometry, moment_of_inertia, multipole_factor, polarizability

logger = logging.getLogger(__name__)


class TrapConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    power: float
    """Trapping laser power P₀ per tweezer in watts."""

    waist: float
    """Beam waist radius w₀ in meters."""

    wavelength: float
    """Trapping laser wavelength λ in meters."""

    spacing: float
    """Center-to-center distance R between the two particles in meters."""

    @model_validator(mode="after")
    def check_positive(self):
        for name in ("power", "waist", "wavelength", "spacing"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        return self

    @property
    def wavenumber(self) -> float:
        return 2 * math.pi / self.wavelength


class TorsionalMode(BaseModel):
    model_config = ConfigDict(frozen=True)

    omega: float
    """Angular frequency in rad/s."""

    stiffness: float
    """Torsional spring constant in N·m/rad."""

    inertia: float
    """Moment of inertia in kg·m²."""


class PairCoupling(BaseModel):
    model_config = ConfigDict(frozen=True)

    g0: float
    """Mode-mode coupling in rad/s."""

    green_zz_re: float
    green_zz_im: float
    corrected: bool
    """Whether the multipole factor was applied."""

    multipole_factor: float = 1.0
    inertia: tuple[float, float] = (0.0, 0.0)


def wavenumber(trap: TrapConfig) -> float:
    return trap.wavenumber


def field_amplitude(trap: TrapConfig) -> tuple[float, float]:
    """
    Peak field amplitude E₀ (V/m) and peak intensity I₀ (W/m²) at the focus of a Gaussian beam.
    """
    area = math.pi * trap.waist**2
    e0 = math.sqrt(4 * trap.power / (area * EPSILON_0 * SPEED_OF_LIGHT))
    i0 = 2 * trap.power / area
    return e0, i0


def green_zz(wavelength: float, spacing: float) -> complex:
    require(wavelength > 0, f"wavelength must be positive, got {wavelength}")
    require(spacing > 0, f"spacing must be positive, got {spacing}")
    k = 2 * math.pi / wavelength
    kr = k * spacing
    return cmath.exp(1j * kr) * (kr**2 + 1j * kr - 1) / (4 * math.pi * EPSILON_0 * spacing**3)


def torsional_mode(geom: ParticleGeometry, trap: TrapConfig) -> TorsionalMode:
    delta_alpha = polarizability(geom).delta_alpha
    if geom.is_sphere or delta_alpha <= 0:
        raise DegenerateGeometryError(f"no torsional confinement for a={geom.a}, b={geom.b}: zero anisotropy")
    _, i0 = field_amplitude(trap)
    stiffness = delta_alpha * i0 / (EPSILON_0 * SPEED_OF_LIGHT)
    inertia = moment_of_inertia(geom)
    return TorsionalMode(omega=math.sqrt(stiffness / inertia), stiffness=stiffness, inertia=inertia)


def coupling_g0(geom: ParticleGeometry, trap: TrapConfig, use_multipole: bool = False) -> PairCoupling:
    """
    Coupling between the torsional modes of two identical particles. A sphere has no anisotropy and
    therefore no coupling, which is returned as g₀ = 0 rather than raised.
    """
    green = green_zz(trap.wavelength, trap.spacing)
    factor = multipole_factor(geom, trap.wavelength, trap.spacing) if use_multipole else 1.0
    delta_alpha = polarizability(geom).delta_alpha
    if geom.is_sphere or delta_alpha == 0:
        return PairCoupling(
            g0=0.0, green_zz_re=green.real, green_zz_im=green.imag, corrected=use_multipole, multipole_factor=factor
        )

    mode = torsional_mode(geom, trap)
    e0, _ = field_amplitude(trap)
    inertia = (mode.inertia, mode.inertia)
    omegas = (mode.omega, mode.omega)
    g0 = green.real * delta_alpha**2 * e0**2 / (2 * math.sqrt(inertia[0] * inertia[1] * omegas[0] * omegas[1]))
    return PairCoupling(
        g0=g0 * factor,
        green_zz_re=green.real,
        green_zz_im=green.imag,
        corrected=use_multipole,
        multipole_factor=factor,
        inertia=inertia,
    )


def bose_occupancy(omega: float, temperature: float) -> float:
    require(omega > 0, f"mode frequency must be positive, got {omega}")
    require(temperature >= 0, f"temperature must not be negative, got {temperature}")
    if temperature == 0:
        return 0.0
    return 1 / math.expm1(HBAR * omega / (K_B * temperature))


def quality_to_kappa(omega: float, quality: float) -> float:
    require(quality > 0, f"quality factor must be positive, got {quality}")
    return omega / quality


class AspectRatioOptimum(BaseModel):
    model_config = ConfigDict(frozen=True)

    ratio: float
    """Aspect ratio of the largest multipole-corrected coupling on the grid."""

    interior: bool
    """Whether that maximum lies strictly inside the grid."""

    delta_alpha_knee: float
    """Aspect ratio past which the anisotropy growth saturates."""

    sensitivity: float
    """Relative change of g₀ between a/b = 1.6 and a/b = 1.7."""


def _knee(x: np.ndarray, y: np.ndarray) -> float:
    # largest distance below the chord joining the end points of the normalized curve
    xs = (x - x[0]) / (x[-1] - x[0])
    ys = (y - y[0]) / (y[-1] - y[0])
    return float(x[int(np.argmax(ys - xs))])


def aspect_ratio_optimum(
    ratios: Sequence[float], delta_alpha: Sequence[float], g0_multipole: Sequence[float]
) -> AspectRatioOptimum:
    """
    Location of the largest multipole-corrected coupling on the grid. A maximum on the grid edge means the curve
    has no interior optimum over the scanned range, which is reported through `interior` and logged.
    """
    x = np.asarray(ratios, dtype=float)
    g = np.asarray(g0_multipole, dtype=float)
    require(x.size >= 3, "at least three grid points are needed to locate an optimum")
    best = int(np.argmax(g))
    interior = 0 < best < x.size - 1
    if not interior:
        logger.warning(
            f"No interior maximum of the coupling on a/b in [{x[0]:.3f}, {x[-1]:.3f}]; "
            f"the largest value sits on the grid edge at a/b = {x[best]:.3f}"
        )
    sensitivity = abs(np.interp(1.7, x, g) - np.interp(1.6, x, g)) / np.interp(1.6, x, g)
    return AspectRatioOptimum(
        ratio=float(x[best]),
        interior=interior,
        delta_alpha_knee=_knee(x, np.asarray(delta_alpha, dtype=float)),
        sensitivity=float(sensitivity),
    )
