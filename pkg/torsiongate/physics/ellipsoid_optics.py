"""
Electrostatics of a single prolate ellipsoidal particle: eccentricity, depolarization factors,
polarizability, moment of inertia and the first multipole corrections to the pair coupling.
"""

import math

from pydantic import BaseModel, ConfigDict, model_validator

from torsiongate.constants import EPSILON_0
from torsiongate.physics import require

SERIES_ECCENTRICITY = 0.5
"""Below this eccentricity L_par is summed as a power series; the closed form cancels badly near e = 0."""

REFERENCE_C1 = 0.0252
"""First multipole coefficient quoted for a = 300 nm, b = 180 nm, ε_r = 5.7 at R = λ."""


class ParticleGeometry(BaseModel):
    """
    A prolate ellipsoid with long semiaxis `a` along the trap polarization and two equal short semiaxes `b`.
    """

    model_config = ConfigDict(frozen=True)

    a: float
    """Long semiaxis in meters."""

    b: float
    """Short semiaxis in meters."""

    rho: float
    """Mass density in kg/m³."""

    eps_r: float
    """Relative permittivity (dimensionless, static)."""

    @model_validator(mode="after")
    def check_axes(self):
        if not self.b > 0:
            raise ValueError(f"short semiaxis b must be positive, got {self.b}")
        if self.a < self.b:
            raise ValueError(f"long semiaxis a ({self.a}) must not be shorter than b ({self.b})")
        if not self.rho > 0:
            raise ValueError(f"density rho must be positive, got {self.rho}")
        if not self.eps_r > 1:
            raise ValueError(f"relative permittivity eps_r must exceed 1, got {self.eps_r}")
        return self

    @property
    def volume(self) -> float:
        return 4 * math.pi * self.a * self.b**2 / 3

    @property
    def aspect_ratio(self) -> float:
        return self.a / self.b

    @property
    def is_sphere(self) -> bool:
        return self.a == self.b


class Polarizability(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha_par: float
    """Component along the long axis in F·m²."""

    alpha_perp: float
    """Component along a short axis in F·m²."""

    @property
    def delta_alpha(self) -> float:
        return self.alpha_par - self.alpha_perp


class MultipoleCoefficients(BaseModel):
    model_config = ConfigDict(frozen=True)

    c1: float
    c2: float


def fixed_volume_geometry(ratio: float, radius: float, rho: float, eps_r: float) -> ParticleGeometry:
    """
    Stretch a sphere of the given radius into a prolate ellipsoid of aspect ratio `ratio` without changing
    its volume.
    """
    require(ratio >= 1, f"aspect ratio must be at least 1, got {ratio}")
    require(radius > 0, f"reference radius must be positive, got {radius}")
    b = radius * ratio ** (-1 / 3)
    return ParticleGeometry(a=ratio * b, b=b, rho=rho, eps_r=eps_r)


def sphere_reference(radius: float, rho: float, eps_r: float) -> ParticleGeometry:
    return ParticleGeometry(a=radius, b=radius, rho=rho, eps_r=eps_r)


def eccentricity(geom: ParticleGeometry) -> float:
    if geom.is_sphere:
        return 0.0
    return math.sqrt(1 - (geom.b / geom.a) ** 2)


def _atanh_remainder_series(e: float) -> float:
    # (atanh(e) - e) / e³ = Σ_{k≥0} e^{2k} / (2k + 3)
    e2 = e * e
    total, power, k = 0.0, 1.0, 0
    while (term := power / (2 * k + 3)) > 1e-17 * total or k == 0:
        total += term
        power *= e2
        k += 1
    return total


def depolarization_factors(geom: ParticleGeometry) -> tuple[float, float]:
    """
    Depolarization factors (L_par, L_perp) of a prolate spheroid, with L_par + 2·L_perp = 1.
    """
    if geom.is_sphere:
        return 1 / 3, 1 / 3

    e = eccentricity(geom)
    if e < SERIES_ECCENTRICITY:
        l_par = (1 - e**2) * _atanh_remainder_series(e)
    else:
        l_par = (1 - e**2) / e**3 * (math.atanh(e) - e)
    return l_par, (1 - l_par) / 2


def polarizability(geom: ParticleGeometry) -> Polarizability:
    l_par, l_perp = depolarization_factors(geom)
    susceptibility = geom.eps_r - 1
    scale = EPSILON_0 * susceptibility * geom.volume
    return Polarizability(
        alpha_par=scale / (1 + l_par * susceptibility),
        alpha_perp=scale / (1 + l_perp * susceptibility),
    )


def moment_of_inertia(geom: ParticleGeometry) -> float:
    """Moment of inertia about a short axis, in kg·m²."""
    return 4 * math.pi * geom.rho * geom.a * geom.b**2 * (geom.a**2 + geom.b**2) / 15


def multipole_coefficients(geom: ParticleGeometry, spacing: float) -> MultipoleCoefficients:
    require(spacing > 0, f"spacing must be positive, got {spacing}")
    l_par, _ = depolarization_factors(geom)
    susceptibility = geom.eps_r - 1
    x = susceptibility * (geom.a**2 - geom.b**2) / ((1 + l_par * susceptibility) ** 2 * spacing**2)
    c1 = 3 * x / 5
    return MultipoleCoefficients(c1=c1, c2=c1 * c1)


def multipole_factor(geom: ParticleGeometry, wavelength: float, spacing: float) -> float:
    require(wavelength > 0, f"wavelength must be positive, got {wavelength}")
    coefficients = multipole_coefficients(geom, spacing)
    size = geom.a / wavelength
    return 1 + coefficients.c1 * size + coefficients.c2 * size**2
