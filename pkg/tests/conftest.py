import logging
import os
import sys
from textwrap import dedent

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))


@pytest.fixture
def caplog(caplog):
    # Default log level capture to INFO
    caplog.set_level(logging.INFO)
    return caplog


def config_file(config_yaml: str, tmpdir, name: str = "config.yml"):
    path = os.path.join(tmpdir, name)
    with open(path, "w") as fd:
        fd.write(config_yaml)
    return path


@pytest.fixture
def config_simple():
    return dedent(
        """
        geometry:
          a_m: 3.0e-7
          b_m: 1.8e-7
        trap:
          power_W: 1.0
        """
    )


@pytest.fixture
def config_simple_path(config_simple, tmpdir):
    return config_file(config_simple, tmpdir)


@pytest.fixture
def config_gate():
    """Reference operating point: ω₀ = 2π×1 MHz, g₀ = 2π×100 kHz, vacuum modes and no dephasing."""
    return dedent(
        """
        geometry:
          a_m: 3.0e-7
          b_m: 1.8e-7
        trap:
          power_w: 1.0
        gate:
          m: 4
          omega0_rad_s: 6283185.307179586
          g0_rad_s: 628318.5307179586
          close_loops: true
        noise:
          kappa_rad_s: 0.0
          n_th: 0.0
        numerics:
          n_fock: 8
          samples: 21
          tolerance: 1.0e-9
        """
    )


@pytest.fixture
def config_gate_path(config_gate, tmpdir):
    return config_file(config_gate, tmpdir)
