"""CSV/JSON table output with full-precision floats and a re-read check."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distributions import ArrivalDistribution, FluxSeries
from .errors import DomainError

FORMATS = ("csv", "json")

# natural units: T time, L length, derived from hbar and m
UNITS = {"t": "T", "x": "L", "y": "L", "z": "L", "y1": "L", "y2": "L", "p": "hbar/L"}


@dataclass(frozen=True)
class Table:
    columns: dict[str, np.ndarray]
    units: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        lens = {len(np.asarray(v)) for v in self.columns.values()}
        if len(lens) > 1:
            raise DomainError(f"table columns have different lengths {sorted(lens)}")

    @property
    def header(self) -> list[str]:
        return [f"{k} [{self.units[k]}]" if self.units.get(k) else k for k in self.columns]

    @property
    def rows(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0


def _density_unit(axes: tuple[str, ...]) -> str:
    parts = [UNITS.get(a, "1") for a in axes]
    return "1/(" + "*".join(parts) + ")" if len(parts) > 1 else f"1/{parts[0]}"


def as_table(obj) -> Table:
    """Flatten a distribution, flux series or table into long-form columns."""
    if isinstance(obj, Table):
        return obj
    if isinstance(obj, ArrivalDistribution):
        mesh = np.meshgrid(*obj.coords, indexing="ij")
        cols = {a: m.ravel() for a, m in zip(obj.axes, mesh)}
        cols["density"] = obj.density.ravel()
        units = {a: UNITS.get(a, "") for a in obj.axes}
        units["density"] = _density_unit(obj.axes)
        return Table(cols, units)
    if isinstance(obj, FluxSeries):
        return Table({"t": obj.t, "J": obj.current}, {"t": "T", "J": "1/T"})
    raise DomainError(f"cannot tabulate {type(obj).__name__}")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def emit_table(obj, path, fmt: str = "csv") -> Path:
    """Write ``obj`` to ``path``; floats keep 17 significant digits."""
    if fmt not in FORMATS:
        raise DomainError(f"format must be one of {FORMATS}, got {fmt!r}")
    table = as_table(obj)
    path = Path(path)
    cols = [np.asarray(v) for v in table.columns.values()]
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(table.header)
            for i in range(table.rows):
                w.writerow([_fmt(c[i]) for c in cols])
    else:
        doc = {"header": table.header,
               "columns": {k: [_fmt(x) for x in np.asarray(v)] for k, v in table.columns.items()}}
        path.write_text(json.dumps(doc, indent=1) + "\n")
    return path


def read_table(path) -> dict[str, np.ndarray]:
    """Inverse of :func:`emit_table`, keyed by bare column name."""
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        return {k: np.array([float(x) for x in v]) for k, v in doc["columns"].items()}
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    names = [h.split(" [")[0] for h in rows[0]]
    data = np.array([[float(x) for x in r] for r in rows[1:]]) if len(rows) > 1 else np.zeros((0, len(names)))
    return {n: data[:, i] for i, n in enumerate(names)}


def reread_mass(path, axes: tuple[str, ...], cell: tuple[float, ...]) -> float:
    """Re-parse a density file and integrate it."""
    cols = read_table(path)
    if "density" not in cols or any(a not in cols for a in axes):
        raise DomainError(f"{path} lacks density or axis columns")
    return float(np.sum(cols["density"]) * np.prod(cell))


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
