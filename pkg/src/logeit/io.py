"""Plain-text serialization of operators, reports and plot data."""

from __future__ import annotations

import csv
import hashlib
import os
import re
from pathlib import Path

import numpy as np

__all__ = ["emit_plotdata", "read_operator_csv", "sha256_file", "write_operator_csv"]


def write_operator_csv(op, path: str | os.PathLike, **meta) -> Path:
    """Write a matrix (or anything with ``.matrix``) as CSV behind ``# key=value`` lines.

    A :class:`~logeit.calculus.SobolevOperator` contributes its signature and
    basis order to the header automatically.
    """
    M = np.asarray(getattr(op, "matrix", op), dtype=float)
    header = {}
    if hasattr(op, "r_in"):
        header["signature"] = f"{op.r_in:g},{op.r_out:g}"
    basis = getattr(op, "basis", None)
    if basis is not None:
        header["N"] = basis.max_frequency
    header.update(meta)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        for k in sorted(header):
            fh.write(f"# {k}={header[k]}\n")
        np.savetxt(fh, M, fmt="%.17g", delimiter=",")
    return path


_META = re.compile(r"#\s*([^=]+)=(.*)")


def read_operator_csv(path: str | os.PathLike) -> tuple[np.ndarray, dict]:
    meta = {}
    with Path(path).open() as fh:
        for line in fh:
            m = _META.match(line)
            if not m:
                break
            meta[m.group(1).strip()] = m.group(2).strip()
    M = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    return M, meta


def emit_plotdata(report, out_dir: str | os.PathLike) -> list[Path]:
    """One two-column CSV per curve of ``report``, values written raw (no log transform)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, table, x, y in report.curves:
        cols = report.tables[table]
        path = out_dir / (re.sub(r"[^A-Za-z0-9_.=-]+", "_", f"{report.name}__{name}") + ".csv")
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([x, y])
            for a, b in zip(cols[x], cols[y]):
                w.writerow([repr(float(a)), repr(float(b))])
        paths.append(path)
    return paths


def sha256_file(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
