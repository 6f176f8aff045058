import logging
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict

from torsiongate.experiments import IncompleteExperiment, SweepInterrupted, evaluate, provenance
from torsiongate.experiments.figures import gate_point, simulate_point
from torsiongate.models.config import ExperimentConfig
from torsiongate.models.results import Column, ResultTable
from torsiongate.models.utils.dicts import conform_key, set_path
from torsiongate.physics.gate_design import gate_schedule
from torsiongate.physics.trap_coupling import coupling_g0, torsional_mode

logger = logging.getLogger(__name__)

Observable = Literal["g0", "omega", "xi", "phi", "t_gate"]

OBSERVABLE_UNITS = {"g0": "rad/s", "omega": "rad/s", "xi": "1", "phi": "rad", "t_gate": "s"}

UNIT_SUFFIXES = (
    ("_kg_m3", "kg/m3"),
    ("_rad_s", "rad/s"),
    ("_hz", "Hz"),
    ("_w", "W"),
    ("_m", "m"),
    ("_s", "s"),
    ("_k", "K"),
)


def unit_of(param_path: str) -> str:
    key = conform_key(param_path.rsplit(".", 1)[-1])
    return next((unit for suffix, unit in UNIT_SUFFIXES if key.endswith(suffix)), "1")


class SweepPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    config: ExperimentConfig
    observable: str

    def __str__(self) -> str:
        return f"{self.observable} at config {self.config.config_hash()}"


def observe(point: SweepPoint) -> float:
    """
    The coupling and frequency observables follow the geometry and trap through the physics chain; the gate
    observables use the configured ω₀ and g₀ when they are set.
    """
    config = point.config
    match point.observable:
        case "g0":
            return coupling_g0(config.geometry.particle(), config.trap.trap()).g0
        case "omega":
            return torsional_mode(config.geometry.particle(), config.trap.trap()).omega
        case "t_gate":
            return gate_schedule(config.omega0(), config.g0(), config.gate.m, 0.0).t_gate
        case "phi":
            return config.design().phi
        case "xi":
            point = gate_point(config, config.gate.m, config.kappa(), config.n_th(), config.rwa)
            return simulate_point(point).infidelity
        case _:
            raise ValueError(f"unknown observable `{point.observable}`")


def sweep(
    config: ExperimentConfig,
    param_path: str,
    lo: float,
    hi: float,
    n: int,
    observable: Observable,
    seed: int | None = None,
) -> ResultTable:
    """
    Evaluate `observable` on an n-point uniform grid of the numeric configuration key `param_path` (dotted, e.g.
    `trap.power_W`). Integer keys are snapped to the nearest integer.
    """
    if observable not in OBSERVABLE_UNITS:
        raise ValueError(f"unknown observable `{observable}`, expected one of {', '.join(OBSERVABLE_UNITS)}")
    if n < 1:
        raise ValueError(f"the grid needs at least one point, got n={n}")
    baseline = config.model_dump()
    current = baseline
    for segment in param_path.split("."):
        if not isinstance(current, dict) or conform_key(segment) not in current:
            raise KeyError(f"`{param_path}` does not name a configuration key")
        current = current[conform_key(segment)]
    if isinstance(current, bool) or not (current is None or isinstance(current, (int, float))):
        raise ValueError(f"`{param_path}` is not a numeric configuration key")

    grid = np.linspace(lo, hi, n) if n > 1 else np.array([lo])
    values = [int(round(v)) for v in grid] if isinstance(current, int) else [float(v) for v in grid]
    points = [
        SweepPoint(config=ExperimentConfig(**set_path(baseline, param_path, value)), observable=observable)
        for value in values
    ]
    logger.info(f"Sweeping {param_path} over [{lo}, {hi}] in {n} points for {observable}")

    name = conform_key(param_path).replace(".", "_")
    table = ResultTable(
        name=f"sweep_{name}_{observable}",
        columns=[
            Column(name=conform_key(param_path), unit=unit_of(param_path)),
            Column(name=observable, unit=OBSERVABLE_UNITS[observable]),
        ],
        provenance=provenance(config, seed, param_path=param_path, observable=observable),
    )
    workers = config.numerics.workers if observable == "xi" else 1
    try:
        results = evaluate(observe, points, workers, labels=[f"{param_path}={value}" for value in values])
    except SweepInterrupted as e:
        for value, result in zip(values, e.completed):
            table.add_row([value, result])
        raise IncompleteExperiment(table, e) from e
    for value, result in zip(values, results):
        table.add_row([value, result])
    return table
