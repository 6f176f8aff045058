"""
Physical constants (CODATA 2018) and NV-centre parameters. All frequencies are angular (rad/s).
"""

import math

EPSILON_0 = 8.8541878128e-12
"""Vacuum permittivity in F/m."""

SPEED_OF_LIGHT = 299792458.0
"""Speed of light in vacuum in m/s."""

HBAR = 1.054571817e-34
"""Reduced Planck constant in J·s."""

K_B = 1.380649e-23
"""Boltzmann constant in J/K."""

NV_ZERO_FIELD_SPLITTING = 2 * math.pi * 2.87e9
"""Ground-state zero-field splitting D of the NV centre in rad/s."""

NV_GYROMAGNETIC_RATIO = 2 * math.pi * 28.024e9
"""Electron gyromagnetic ratio γ in rad/s/T."""

TWO_PI = 2 * math.pi
