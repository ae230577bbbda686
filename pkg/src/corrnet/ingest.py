"""Channel x time CSV ingestion (e.g. EEG exports), producing the same
``(N, L)`` float64 matrices the simulator emits."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CorrnetError


class IngestError(CorrnetError, ValueError):
    pass


@dataclass(frozen=True)
class ExternalMatrix:
    values: np.ndarray = field(repr=False)
    provenance: str = ""

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


def _split(line: str, comma: bool) -> list[str]:
    if comma:
        return [c.strip() for c in line.split(",")]
    return line.split()


def load_csv_matrix(path: str | Path, provenance: str | None = None) -> ExternalMatrix:
    """Parse one row per channel; ``#`` lines are comments.

    The delimiter (comma or whitespace) is chosen from the first data line
    and must then be used throughout the file.
    """
    path = Path(path)
    lines = [(no, ln.strip()) for no, ln in enumerate(path.read_text().splitlines(), 1)]
    data = [(no, ln) for no, ln in lines if ln and not ln.startswith("#")]
    if not data:
        raise IngestError(f"empty file: {path} has no data rows")
    comma = "," in data[0][1]
    rows: list[list[float]] = []
    for r, (lineno, ln) in enumerate(data, 1):
        # a lone value carries no delimiter and fits either convention
        if ("," not in ln and len(ln.split()) > 1) if comma else ("," in ln):
            raise IngestError(f"mixed delimiters at row {r} (line {lineno})")
        cells = _split(ln, comma)
        vals = []
        for c, cell in enumerate(cells, 1):
            try:
                vals.append(float(cell))
            except ValueError:
                raise IngestError(f"non-numeric cell {cell!r} at row {r}, column {c}") from None
        if rows and len(vals) != len(rows[0]):
            raise IngestError(f"ragged row {r}: {len(vals)} values, row 1 has {len(rows[0])}")
        rows.append(vals)
    values = np.array(rows, dtype=np.float64)
    bad = np.argwhere(~np.isfinite(values))
    if bad.size:
        r, c = bad[0] + 1
        raise IngestError(f"non-finite value at row {r}, column {c}")
    return ExternalMatrix(values, provenance if provenance is not None else str(path))


def write_csv_matrix(matrix, path: str | Path) -> None:
    """17 significant digits, enough to round-trip any float64."""
    values = matrix.values if isinstance(matrix, ExternalMatrix) else np.asarray(matrix)
    np.savetxt(path, values, delimiter=",", fmt="%.17g")
