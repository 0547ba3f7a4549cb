"""Experiment reports: measured tables, slope fits and explicit gates."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateFitError

__all__ = ["ExperimentReport", "Gate", "SlopeFit", "fit_slope"]


def _clean(v):
    """JSON-friendly copy with numpy scalars and arrays turned into Python values."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if np.isfinite(v) else repr(v)
    return v


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares line ``y = slope * x + intercept`` with RMS residual."""

    slope: float
    intercept: float
    residual: float
    n_points: int
    loglog: bool

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "n_points": self.n_points,
            "loglog": self.loglog,
        }


def fit_slope(x, y, loglog: bool = True) -> SlopeFit:
    """Fit a line to ``(log x, log y)`` (or raw ``(x, y)`` if ``loglog`` is false).

    Raises
    ------
    DegenerateFitError
        With fewer than two points, or nonpositive data on a log scale.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or x.size != y.size:
        raise DegenerateFitError("need at least two matching points for a slope fit")
    if loglog:
        if np.any(x <= 0) or np.any(y <= 0):
            raise DegenerateFitError("log-log fit of nonpositive data")
        x, y = np.log(x), np.log(y)
    slope, intercept = np.polyfit(x, y, 1)
    res = y - (slope * x + intercept)
    return SlopeFit(float(slope), float(intercept), float(np.sqrt(np.mean(res**2))), int(x.size), loglog)


@dataclass(frozen=True)
class Gate:
    """A pass/fail threshold with the value it was checked against."""

    name: str
    value: float
    lower: float | None = None
    upper: float | None = None

    @property
    def passed(self) -> bool:
        v = self.value
        if not np.isfinite(v):
            return False
        if self.lower is not None and v < self.lower:
            return False
        if self.upper is not None and v > self.upper:
            return False
        return True

    def describe(self) -> str:
        lo = "-inf" if self.lower is None else f"{self.lower:.6g}"
        hi = "inf" if self.upper is None else f"{self.upper:.6g}"
        return f"{self.name} = {self.value:.6g} in [{lo}, {hi}]: {'pass' if self.passed else 'FAIL'}"

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "lower": self.lower,
            "upper": self.upper,
            "passed": self.passed,
        }


@dataclass
class ExperimentReport:
    """Outcome of one experiment.

    ``tables`` maps a table name to equal-length columns; ``curves`` lists
    ``(name, x column, y column)`` triples that are worth plotting.
    ``runtime`` is kept out of :meth:`to_dict` unless asked for, so that
    serialized reports are reproducible byte for byte.
    """

    name: str
    params: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)
    gates: list = field(default_factory=list)
    curves: list = field(default_factory=list)
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return all(g.passed for g in self.gates)

    def add_table(self, name: str, **columns) -> None:
        lengths = {len(np.atleast_1d(c)) for c in columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"table {name!r} has columns of unequal length")
        self.tables[name] = {k: np.atleast_1d(np.asarray(v)).tolist() for k, v in columns.items()}

    def add_fit(self, name: str, fit: SlopeFit) -> SlopeFit:
        self.fits[name] = fit
        return fit

    def gate(self, name: str, value: float, lower: float | None = None, upper: float | None = None) -> Gate:
        g = Gate(name, float(value), lower, upper)
        self.gates.append(g)
        return g

    def add_curve(self, name: str, table: str, x: str, y: str) -> None:
        self.curves.append((name, table, x, y))

    def merge(self, other: "ExperimentReport", prefix: str) -> None:
        """Fold a sub-report in, prefixing its names."""
        for k, v in other.tables.items():
            self.tables[f"{prefix}{k}"] = v
        for k, v in other.fits.items():
            self.fits[f"{prefix}{k}"] = v
        self.gates.extend(Gate(f"{prefix}{g.name}", g.value, g.lower, g.upper) for g in other.gates)
        self.curves.extend((f"{prefix}{n}", f"{prefix}{t}", x, y) for n, t, x, y in other.curves)
        self.runtime += other.runtime

    def to_dict(self, include_runtime: bool = False) -> dict:
        d = {
            "experiment": self.name,
            "passed": self.passed,
            "params": self.params,
            "gates": [g.as_dict() for g in self.gates],
            "fits": {k: f.as_dict() for k, f in self.fits.items()},
            "tables": self.tables,
        }
        if include_runtime:
            d["runtime"] = self.runtime
        return _clean(d)

    def to_json(self, include_runtime: bool = False) -> str:
        return json.dumps(self.to_dict(include_runtime), indent=2, sort_keys=True) + "\n"

    def table_csv(self, name: str) -> str:
        cols = self.tables[name]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        keys = list(cols)
        w.writerow(keys)
        for row in zip(*(cols[k] for k in keys)):
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"{self.name}: {'PASS' if self.passed else 'FAIL'}"]
        lines += [f"  {g.describe()}" for g in self.gates]
        return "\n".join(lines)
