import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence, TypeVar

from torsiongate.dynamics import NumericalFailure
from torsiongate.logging import LogContext, log_context
from torsiongate.models.config import ExperimentConfig
from torsiongate.models.results import ResultTable

logger = logging.getLogger(__name__)

P = TypeVar("P")
R = TypeVar("R")


class SweepInterrupted(NumericalFailure):
    """A grid point failed; `completed` holds the results of every point before it, in grid order."""

    def __init__(self, completed: list, cause: NumericalFailure):
        super().__init__(f"sweep stopped after {len(completed)} points: {cause}", cause.last_time)
        self.completed = completed


class IncompleteExperiment(NumericalFailure):
    """An experiment stopped early; `table` holds the rows that were completed."""

    def __init__(self, table: ResultTable, cause: NumericalFailure):
        super().__init__(f"{table.name} stopped after {len(table.rows)} rows", cause.last_time)
        self.table = table


def evaluate(
    func: Callable[[P], R],
    points: Sequence[P],
    workers: int = 1,
    labels: Sequence[str] | None = None,
) -> list[R]:
    """
    Evaluate `func` on each point, in a process pool when `workers` > 1. Results are returned in point order
    regardless of completion order.
    """
    results: list[R] = []
    labels = labels or [str(point) for point in points]
    try:
        if workers <= 1 or len(points) <= 1:
            for index, (point, label) in enumerate(zip(points, labels)):
                with log_context(LogContext.POINT, f"Point {index + 1}/{len(points)}: {label}"):
                    results.append(func(point))
        else:
            logger.info(f"Evaluating {len(points)} points on {workers} workers")
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for index, result in enumerate(pool.map(func, points)):
                    logger.info(f"Point {index + 1}/{len(points)} done: {labels[index]}")
                    results.append(result)
    except NumericalFailure as e:
        raise SweepInterrupted(results, e) from e
    return results


def provenance(config: ExperimentConfig, seed: int | None = None, **extra: str) -> dict[str, str]:
    header = {"config_hash": config.config_hash(), "seed": str(seed)}
    header.update(extra)
    header.update(config.echo())
    return header
