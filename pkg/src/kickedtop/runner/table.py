"""Delimited result tables with a ``#`` metadata header."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DimensionError

DELIMITER = "\t"
DIGITS = 12


def _format(x) -> str:
    return f"{x:.{DIGITS}g}"


@dataclass
class ResultTable:
    """Named, unit-tagged columns of reals plus free-form metadata.

    The written file starts with ``# key: value`` lines, followed by one
    header row of ``name [unit]`` cells and the data rows, tab separated.
    """

    columns: list
    units: list
    rows: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        if self.rows.size == 0:
            self.rows = self.rows.reshape(0, len(self.columns))
        if len(self.columns) != len(self.units) or self.rows.shape[1] != len(self.columns):
            raise DimensionError("columns, units and row width disagree")

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]

    def to_text(self) -> str:
        lines = []
        for key, value in self.metadata.items():
            text = str(value).replace("\n", " ")
            lines.append(f"# {key}: {text}")
        lines.append(DELIMITER.join(f"{c} [{u}]" for c, u in zip(self.columns, self.units)))
        for row in self.rows:
            lines.append(DELIMITER.join(_format(x) for x in row))
        return "\n".join(lines) + "\n"

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_text(), encoding="utf-8")
        return path

    @classmethod
    def read(cls, path) -> "ResultTable":
        metadata, header, data = {}, None, []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(":")
                metadata[key.strip()] = value.strip()
            elif header is None:
                header = line.split(DELIMITER)
            elif line.strip():
                data.append([float(x) for x in line.split(DELIMITER)])
        if header is None:
            raise DimensionError(f"{path}: no header row")
        columns, units = [], []
        for cell in header:
            name, _, unit = cell.partition(" [")
            columns.append(name)
            units.append(unit.rstrip("]"))
        rows = np.array(data, dtype=float).reshape(len(data), len(columns))
        return cls(columns=columns, units=units, rows=rows, metadata=metadata)
