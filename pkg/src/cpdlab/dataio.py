"""CSV dataset files and JSON reports.

Dataset CSV schema: header ``label,tau,x1,...,xn``; one example per
row, ``tau`` left empty for no-change rows.  Floats are written with
shortest round-trip decimals (at most 17 significant digits), so
``load_dataset(save_dataset(d))`` reproduces the array bit-exactly and
identical inputs produce byte-identical files.  All output uses '.' as
the decimal separator and newline-terminated rows regardless of locale.

JSON reports carry a ``schema_version`` field and are written with
sorted keys, so equal report dictionaries serialise to equal bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .simulate import LabeledDataset

__all__ = [
    "save_dataset",
    "load_dataset",
    "save_values",
    "load_values",
    "jsonable",
    "write_report",
    "read_report",
]

REPORT_SCHEMA_VERSION = 1


def _fmt(value: float) -> str:
    return repr(float(value))


def save_dataset(dataset: LabeledDataset, path) -> None:
    """Write a labelled dataset as ``label,tau,x1..xn`` CSV."""
    n = dataset.n
    header = "label,tau," + ",".join(f"x{j}" for j in range(1, n + 1))
    lines = [header]
    for row, label, meta in zip(dataset.values, dataset.labels, dataset.metadata):
        tau = meta.get("tau")
        tau_text = "" if tau is None else str(int(tau))
        lines.append(f"{int(label)},{tau_text}," + ",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def load_dataset(path) -> LabeledDataset:
    """Read a dataset written by :func:`save_dataset`.

    Raises ``ValueError`` naming the offending column or line on any
    schema mismatch.
    """
    text = Path(path).read_text(encoding="ascii")
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ValueError(f"{path}: empty dataset file")
    header = lines[0].split(",")
    if len(header) < 3 or header[0] != "label" or header[1] != "tau":
        raise ValueError(f"{path}: header must start with 'label,tau', got {lines[0]!r}")
    n = len(header) - 2
    for j, name in enumerate(header[2:], start=1):
        if name != f"x{j}":
            raise ValueError(f"{path}: expected column 'x{j}', found {name!r}")
    values, labels, metas = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != n + 2:
            raise ValueError(
                f"{path}:{lineno}: expected {n + 2} fields, found {len(fields)}"
            )
        try:
            label = int(fields[0])
            tau = None if fields[1] == "" else int(fields[1])
            row = [float(v) for v in fields[2:]]
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: malformed row ({exc})") from None
        values.append(row)
        labels.append(label)
        metas.append({"tau": tau, "label": label})
    if not values:
        raise ValueError(f"{path}: no data rows")
    return LabeledDataset(np.asarray(values), np.asarray(labels), metas)


def save_values(rows: np.ndarray, path) -> None:
    """Write plain series rows (no labels) as CSV, one series per line."""
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    lines = [",".join(_fmt(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def load_values(path) -> np.ndarray:
    """Read plain series rows written by :func:`save_values`."""
    lines = [ln for ln in Path(path).read_text(encoding="ascii").splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty values file")
    rows = []
    width = None
    for lineno, line in enumerate(lines, start=1):
        try:
            row = [float(v) for v in line.split(",")]
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: malformed row ({exc})") from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ValueError(f"{path}:{lineno}: expected {width} fields, found {len(row)}")
        rows.append(row)
    return np.asarray(rows)


def jsonable(obj):
    """Recursively convert numpy scalars and arrays to plain Python values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def write_report(report: dict, path) -> None:
    """Write a JSON report with a schema version and deterministic bytes."""
    payload = {"schema_version": REPORT_SCHEMA_VERSION, **jsonable(report)}
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="ascii"
    )


def read_report(path) -> dict:
    payload = json.loads(Path(path).read_text(encoding="ascii"))
    if payload.get("schema_version") != REPORT_SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported report schema version")
    return payload
