"""Snapshot and series persistence: versioned plain-text tables.

Physical snapshots carry the header

    t x y u1 u2 w1 h1 h2 q psi rho p

and transformed snapshots

    t x ybar u w q

preceded by a version line.  Rows are x-outer row-major at full double
precision (17 significant digits), LF line endings.  Readers reject
unknown version headers loudly.
"""

from __future__ import annotations

import os

import numpy as np

from .core import Field, Grid, PhysicalState, TransformedState
from .exceptions import SchemaError

__all__ = [
    "write_transformed_snapshot",
    "write_physical_snapshot",
    "read_snapshot",
    "write_trace_series",
]

_PHYS_VERSION = "mmbl-snapshot v1 physical"
_TRANS_VERSION = "mmbl-snapshot v1 transformed"
_PHYS_COLS = "t x y u1 u2 w1 h1 h2 q psi rho p"
_TRANS_COLS = "t x ybar u w q"


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _write_rows(fh, t, grid, columns):
    x = grid.x_nodes
    y = grid.y_nodes
    for i in range(grid.nx):
        for j in range(grid.ny):
            vals = [t, x[i], y[j]] + [c[i, j] for c in columns]
            fh.write(" ".join(_fmt(v) for v in vals) + "\n")


def write_transformed_snapshot(state: TransformedState, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# {_TRANS_VERSION}\n")
        fh.write(_TRANS_COLS + "\n")
        _write_rows(fh, state.time, state.grid,
                    [state.u.values, state.w.values, state.q.values])


def write_physical_snapshot(state: PhysicalState, path: str) -> None:
    q = 0.5 * state.h1.values**2
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# {_PHYS_VERSION}\n")
        fh.write(_PHYS_COLS + "\n")
        _write_rows(fh, state.time, state.grid,
                    [state.u1.values, state.u2.values, state.w1.values,
                     state.h1.values, state.h2.values, q, state.psi.values,
                     state.rho.values, state.p.values])


def read_snapshot(path: str):
    """Read a snapshot back: (kind, column names, data array (rows, cols))."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header == f"# {_PHYS_VERSION}":
            kind = "physical"
        elif header == f"# {_TRANS_VERSION}":
            kind = "transformed"
        else:
            raise SchemaError(f"{path}: unknown snapshot version '{header}'")
        cols = fh.readline().split()
        expected = (_PHYS_COLS if kind == "physical" else _TRANS_COLS).split()
        if cols != expected:
            raise SchemaError(f"{path}: unexpected column header {cols}")
        data = np.loadtxt(fh)
    if data.ndim == 1:
        data = data[None, :]
    if data.shape[1] != len(cols):
        raise SchemaError(f"{path}: row width {data.shape[1]} != {len(cols)}")
    return kind, cols, data


def snapshot_to_state(path: str, grid: Grid) -> TransformedState:
    """Rebuild a TransformedState from a transformed snapshot on its grid."""
    kind, cols, data = read_snapshot(path)
    if kind != "transformed":
        raise SchemaError(f"{path}: expected a transformed snapshot")
    n = grid.nx * grid.ny
    if data.shape[0] != n:
        raise SchemaError(f"{path}: {data.shape[0]} rows, grid wants {n}")
    arrs = [data[:, 3 + c].reshape(grid.nx, grid.ny) for c in range(3)]
    return TransformedState(Field(grid, arrs[0]), Field(grid, arrs[1]),
                            Field(grid, arrs[2]), float(data[0, 0]))


def write_trace_series(series, path: str, append: bool = False) -> None:
    """Outflow series rows: t x U I H P, appended level blocks."""
    mode = "a" if append and os.path.exists(path) else "w"
    with open(path, mode, encoding="utf-8", newline="\n") as fh:
        if mode == "w":
            fh.write("# mmbl-trace v1\n")
            fh.write("t x U I H P\n")
        for m in range(series.nt):
            t = series.times[m]
            for i, xv in enumerate(series.x_nodes):
                fh.write(" ".join(_fmt(v) for v in
                                  (t, xv, series.U[m, i], series.I[m, i],
                                   series.H[m, i], series.P[m, i])) + "\n")
