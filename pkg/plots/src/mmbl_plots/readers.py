"""Readers for the solver's versioned plain-text outputs.

This package touches the solver only through its published file formats:
snapshot tables, order tables, and certificates.  Unknown version headers
fail loudly.
"""

from __future__ import annotations

import numpy as np

__all__ = ["SchemaError", "read_snapshot", "read_order_table",
           "read_certificate"]

_SNAPSHOT_VERSIONS = {
    "# mmbl-snapshot v1 physical": "physical",
    "# mmbl-snapshot v1 transformed": "transformed",
}
_ORDERS_VERSION = "# mmbl-orders v1"
_CERT_VERSION = "mmbl-certificate v1"


class SchemaError(Exception):
    """Version or structure mismatch in an input file."""


def read_snapshot(path: str):
    """Snapshot table -> (kind, {column: (nx, ny) array}).

    The tensor-grid shape is recovered from the repeated x values (rows are
    x-outer row-major).
    """
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        kind = _SNAPSHOT_VERSIONS.get(header)
        if kind is None:
            raise SchemaError(f"{path}: unknown snapshot version '{header}'")
        cols = fh.readline().split()
        data = np.loadtxt(fh)
    if data.ndim == 1:
        data = data[None, :]
    if data.shape[1] != len(cols):
        raise SchemaError(f"{path}: row width {data.shape[1]} != {len(cols)}")
    x = data[:, 1]
    ny = int(np.argmax(x != x[0])) or data.shape[0]
    if data.shape[0] % ny != 0:
        raise SchemaError(f"{path}: rows do not factor into a tensor grid")
    nx = data.shape[0] // ny
    fields = {name: data[:, i].reshape(nx, ny) for i, name in enumerate(cols)}
    return kind, fields


def read_order_table(path: str):
    """Order table -> {study: (h array, error array)} in file order."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != _ORDERS_VERSION:
            raise SchemaError(f"{path}: unknown order-table version '{header}'")
        cols = fh.readline().split()
        if cols != ["study", "h", "error"]:
            raise SchemaError(f"{path}: unexpected columns {cols}")
        out = {}
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            study, h, err = parts[0], float(parts[1]), float(parts[2])
            out.setdefault(study, ([], []))
            out[study][0].append(h)
            out[study][1].append(err)
    return {k: (np.asarray(h), np.asarray(e)) for k, (h, e) in out.items()}


def _parse_value(token: str):
    token = token.strip()
    if token.startswith("[") and token.endswith("]"):
        inner = token[1:-1].strip()
        return [float(t) for t in inner.split(",")] if inner else []
    for conv in (int, float):
        try:
            return conv(token)
        except ValueError:
            continue
    return token


def read_certificate(path: str) -> dict:
    """Certificate -> {section: {key: value}}."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != _CERT_VERSION:
        raise SchemaError(f"{path}: unknown certificate version")
    sections: dict = {}
    current = None
    for line in lines[1:]:
        line = line.strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            sections.setdefault(current, {})
            continue
        key, _, token = line.partition("=")
        if current is None or not _:
            raise SchemaError(f"{path}: malformed line '{line}'")
        sections[current][key.strip()] = _parse_value(token)
    return sections


def fit_slope(hs, errors) -> float:
    """Least-squares slope of log(error) vs log(h)."""
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    A = np.vstack([np.log(hs), np.ones_like(hs)]).T
    slope, _ = np.linalg.lstsq(A, np.log(errors), rcond=None)[0]
    return float(slope)
