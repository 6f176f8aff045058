import io
import logging
import os

from pydantic import BaseModel, model_validator

from torsiongate import __version__

logger = logging.getLogger(__name__)


class Column(BaseModel):
    name: str
    unit: str = "1"
    """Unit of the column values; "1" for dimensionless quantities."""

    @property
    def label(self) -> str:
        return f"{self.name} ({self.unit})"


class ResultTable(BaseModel):
    """
    A rectangular table of numbers produced by an experiment, in the order the experiment's grid was defined.
    Written as CSV with the provenance lines first, each prefixed with `#`, then one row of column labels.
    """

    name: str
    """Used as the CSV file name."""

    columns: list[Column]

    rows: list[list[float]] = []

    provenance: dict[str, str] = {}
    """Configuration hash, seed and parameter echo recorded above the column labels."""

    notes: list[str] = []
    """Free-form findings of the experiment, e.g. the location of an optimum."""

    @model_validator(mode="after")
    def check_rectangular(self):
        width = len(self.columns)
        for index, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"row {index} has {len(row)} values, expected {width}")
        return self

    def add_row(self, values) -> None:
        values = [float(value) for value in values]
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values, expected {len(self.columns)}")
        self.rows.append(values)

    def column(self, name: str) -> list[float]:
        index = [column.name for column in self.columns].index(name)
        return [row[index] for row in self.rows]

    def to_csv(self) -> str:
        buffer = io.StringIO(newline="")
        buffer.write(f"# table: {self.name}\n")
        buffer.write(f"# torsiongate_version: {__version__}\n")
        for key, value in self.provenance.items():
            buffer.write(f"# {key}: {value}\n")
        for note in self.notes:
            buffer.write(f"# note: {note}\n")
        buffer.write(",".join(column.label for column in self.columns) + "\n")
        for row in self.rows:
            buffer.write(",".join(f"{value:.8e}" for value in row) + "\n")
        return buffer.getvalue()

    def write(self, directory: str) -> str:
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, f"{self.name}.csv")
        with open(path, "w", newline="\n") as fd:
            fd.write(self.to_csv())
        logger.info(f"Wrote {len(self.rows)} rows to {path}")
        return path
