import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from torsiongate.constants import EPSILON_0
from torsiongate.physics import DomainError
from torsiongate.physics.ellipsoid_optics import (
    REFERENCE_C1,
    SERIES_ECCENTRICITY,
    ParticleGeometry,
    depolarization_factors,
    eccentricity,
    fixed_volume_geometry,
    moment_of_inertia,
    multipole_coefficients,
    multipole_factor,
    polarizability,
    sphere_reference,
)

RHO = 3500.0
EPS_R = 5.7

aspect_ratios = st.floats(min_value=1.0, max_value=50.0, allow_nan=False)


def geometry(ratio: float, b: float = 100e-9) -> ParticleGeometry:
    return ParticleGeometry(a=ratio * b, b=b, rho=RHO, eps_r=EPS_R)


@given(aspect_ratios)
def test_depolarization_factors_sum_to_one(ratio):
    l_par, l_perp = depolarization_factors(geometry(ratio))
    assert l_par + 2 * l_perp == pytest.approx(1.0, abs=1e-12)
    assert 0 < l_par <= 1 / 3 <= l_perp < 0.5


def test_depolarization_factors_known_value():
    # 2:1 prolate spheroid
    l_par, l_perp = depolarization_factors(geometry(2.0))
    assert eccentricity(geometry(2.0)) == pytest.approx(math.sqrt(0.75))
    assert l_par == pytest.approx(0.17356, abs=1e-5)
    assert l_perp == pytest.approx((1 - l_par) / 2)


def with_eccentricity(e: float) -> ParticleGeometry:
    return ParticleGeometry(a=1e-7, b=1e-7 * math.sqrt(1 - e * e), rho=RHO, eps_r=EPS_R)


@pytest.mark.parametrize(
    "e, expected",
    [(1e-4, 0.333333332), (0.3, 0.3208459194), (0.8, 0.2099617655)],
    ids=["near_sphere", "series", "closed_form"],
)
def test_depolarization_factor_values(e, expected):
    l_par, _ = depolarization_factors(with_eccentricity(e))
    assert l_par == pytest.approx(expected, rel=1e-9)


def test_depolarization_factor_is_strictly_decreasing_near_the_sphere():
    values = [depolarization_factors(with_eccentricity(e))[0] for e in np.linspace(1e-4, 1.2e-4, 2001)]
    assert all(np.diff(values) < 0)


@given(st.floats(min_value=1e-4, max_value=0.99), st.floats(min_value=1.001, max_value=1.01))
def test_depolarization_factor_decreases_with_eccentricity(e, stretch):
    rounder = depolarization_factors(with_eccentricity(e))[0]
    longer = depolarization_factors(with_eccentricity(min(e * stretch, 0.995)))[0]
    assert longer < rounder


def test_depolarization_factor_is_continuous_where_the_series_hands_over():
    below = depolarization_factors(with_eccentricity(SERIES_ECCENTRICITY - 1e-12))[0]
    above = depolarization_factors(with_eccentricity(SERIES_ECCENTRICITY + 1e-12))[0]
    assert above < below
    assert below - above < 2e-12


def test_sphere_limits():
    sphere = sphere_reference(250e-9, RHO, EPS_R)
    assert sphere.is_sphere
    assert eccentricity(sphere) == 0.0
    assert depolarization_factors(sphere) == (1 / 3, 1 / 3)

    alpha = polarizability(sphere)
    clausius_mossotti = 4 * math.pi * EPSILON_0 * (250e-9) ** 3 * (EPS_R - 1) / (EPS_R + 2)
    assert alpha.alpha_par == pytest.approx(clausius_mossotti, rel=1e-12)
    assert alpha.delta_alpha == 0.0


@pytest.mark.parametrize("stretch", [1e-12, 1e-9, 1e-6], ids=["1e-12", "1e-9", "1e-6"])
def test_near_sphere_is_continuous(stretch):
    l_par, _ = depolarization_factors(geometry(1 + stretch))
    assert l_par == pytest.approx(1 / 3, abs=1e-6)
    assert l_par <= 1 / 3


@given(aspect_ratios)
def test_prolate_polarizability_is_larger_along_the_long_axis(ratio):
    alpha = polarizability(geometry(ratio))
    assert alpha.delta_alpha >= 0
    assert alpha.alpha_perp > 0


@given(st.floats(min_value=1.0, max_value=3.0))
def test_fixed_volume_geometry_keeps_the_volume(ratio):
    geom = fixed_volume_geometry(ratio, 250e-9, RHO, EPS_R)
    assert geom.aspect_ratio == pytest.approx(ratio)
    assert geom.volume == pytest.approx(sphere_reference(250e-9, RHO, EPS_R).volume, rel=1e-12)


@pytest.mark.parametrize(
    "ratio, radius",
    [(0.5, 250e-9), (2.0, 0.0), (2.0, -1e-9)],
    ids=["oblate", "zero_radius", "negative_radius"],
)
def test_fixed_volume_geometry_rejects_invalid_input(ratio, radius):
    with pytest.raises(DomainError):
        fixed_volume_geometry(ratio, radius, RHO, EPS_R)


@pytest.mark.parametrize(
    "fields, error",
    [
        ({"a": 1e-7, "b": 2e-7}, "must not be shorter than b"),
        ({"a": 1e-7, "b": 0.0}, "b must be positive"),
        ({"a": 2e-7, "b": 1e-7, "rho": -1.0}, "rho must be positive"),
        ({"a": 2e-7, "b": 1e-7, "eps_r": 1.0}, "eps_r must exceed 1"),
    ],
    ids=["oblate", "zero_axis", "negative_density", "vacuum_permittivity"],
)
def test_particle_geometry_validation(fields, error):
    values = {"rho": RHO, "eps_r": EPS_R} | fields
    with pytest.raises(ValidationError, match=error):
        ParticleGeometry(**values)


def test_sphere_moment_of_inertia():
    sphere = sphere_reference(250e-9, RHO, EPS_R)
    mass = RHO * sphere.volume
    assert moment_of_inertia(sphere) == pytest.approx(2 / 5 * mass * (250e-9) ** 2, rel=1e-12)


@given(aspect_ratios, st.floats(min_value=0.5e-6, max_value=5e-6))
def test_second_multipole_coefficient_is_square_of_the_first(ratio, spacing):
    coefficients = multipole_coefficients(geometry(ratio), spacing)
    assert coefficients.c1 >= 0
    assert coefficients.c2 == pytest.approx(coefficients.c1**2, rel=1e-12)


def test_first_multipole_coefficient_at_the_reference_geometry():
    geom = ParticleGeometry(a=300e-9, b=180e-9, rho=RHO, eps_r=EPS_R)
    c1 = multipole_coefficients(geom, 1.064e-6).c1
    assert c1 == pytest.approx(0.036347, rel=1e-4)
    assert c1 / REFERENCE_C1 == pytest.approx(1.44, abs=0.01)


def test_sphere_has_no_multipole_correction():
    sphere = sphere_reference(250e-9, RHO, EPS_R)
    assert multipole_coefficients(sphere, 1e-6).c1 == 0.0
    assert multipole_factor(sphere, 1.064e-6, 1e-6) == 1.0


def test_multipole_factor_grows_with_elongation():
    factors = [multipole_factor(fixed_volume_geometry(r, 250e-9, RHO, EPS_R), 1.064e-6, 1.06e-6) for r in (1.5, 2, 3)]
    assert 1 < factors[0] < factors[1] < factors[2]


@pytest.mark.parametrize("spacing, wavelength", [(0.0, 1e-6), (1e-6, 0.0)], ids=["spacing", "wavelength"])
def test_multipole_factor_rejects_non_positive_lengths(spacing, wavelength):
    with pytest.raises(DomainError):
        multipole_factor(geometry(2.0), wavelength, spacing)
