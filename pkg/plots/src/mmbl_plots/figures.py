"""Figure builders for solver outputs.

Batch rendering only: the Agg backend is forced, no timestamps or other
run-dependent metadata are embedded, so identical inputs regenerate
bit-identical image files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .readers import SchemaError, fit_slope, read_certificate, \
    read_order_table, read_snapshot

__all__ = ["plot_profiles", "plot_convergence", "plot_contraction",
           "plot_margins"]

_SAVE_KW = {"dpi": 110, "metadata": {"Software": "mmbl-plots"}}


def _nearest_station_index(x_nodes: np.ndarray, station: float) -> int:
    return int(np.argmin(np.abs(np.mod(x_nodes - station, 2 * np.pi))))


def plot_profiles(snapshot_path: str, out_path: str, stations=(0.0,),
                  delta: float | None = None,
                  certificate_path: str | None = None) -> str:
    """Wall-normal profiles of (u1, w1, h1) at chosen x stations.

    Far-field asymptotes are drawn from the top rows of the snapshot; the
    admissibility floor of h1 comes from ``delta`` or from the certificate's
    config echo when given.
    """
    kind, fields = read_snapshot(snapshot_path)
    if kind != "physical":
        raise SchemaError(f"{snapshot_path}: profiles need a physical snapshot")
    if delta is None and certificate_path is not None:
        cert = read_certificate(certificate_path)
        delta = float(cert.get("config", {}).get("physics.delta", "nan"))
    x_nodes = fields["x"][:, 0]
    y = fields["y"][0]
    names = ("u1", "w1", "h1")
    fig, axes = plt.subplots(1, 3, figsize=(10.5, 4.0), sharey=True)
    for ax, name in zip(axes, names):
        for st in stations:
            i = _nearest_station_index(x_nodes, st)
            ax.plot(fields[name][i], y, label=f"x = {x_nodes[i]:.2f}")
            ax.axvline(fields[name][i, -1], color="gray", lw=0.8, ls="--")
        if name == "h1" and delta is not None and np.isfinite(delta):
            ax.axvline(delta, color="crimson", lw=1.0, ls=":",
                       label=f"delta = {delta:g}")
        ax.set_xlabel(name)
        ax.grid(alpha=0.3)
    axes[0].set_ylabel("y")
    axes[0].legend(loc="upper right", fontsize=8)
    fig.suptitle(f"boundary-layer profiles at t = {fields['t'][0, 0]:g}")
    fig.tight_layout()
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)
    return out_path


def plot_convergence(table_path: str, out_path: str) -> dict:
    """Log-log error-vs-h curves with fitted slope annotations.

    Returns {study: slope} as annotated.  Refuses tables with fewer than
    two levels per study.
    """
    table = read_order_table(table_path)
    slopes = {}
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for study, (hs, errs) in table.items():
        if len(hs) < 2:
            raise SchemaError(f"{table_path}: study '{study}' has fewer than "
                              "two levels")
        slope = fit_slope(hs, errs)
        slopes[study] = slope
        ax.loglog(hs, errs, "o-", label=f"{study}: slope {slope:.2f}")
    ax.set_xlabel("h")
    ax.set_ylabel("error")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)
    return slopes


def plot_contraction(certificate_path: str, out_path: str) -> str:
    """Per-iteration difference norms and contraction ratios of a run."""
    cert = read_certificate(certificate_path)
    con = cert.get("contraction")
    if con is None or "diff_norms" not in con:
        raise SchemaError(f"{certificate_path}: no contraction section")
    diffs = np.asarray(con["diff_norms"], dtype=float)
    ratios = np.asarray(con.get("ratios", []), dtype=float)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 4.0))
    ax1.semilogy(np.arange(1, len(diffs) + 1), diffs, "o-")
    ax1.set_xlabel("iteration n")
    ax1.set_ylabel("sup-t L2 difference")
    ax1.grid(alpha=0.3)
    if len(ratios):
        ax2.plot(np.arange(2, len(ratios) + 2), ratios, "s-")
        ax2.axhline(0.5, color="crimson", ls=":", lw=1.0, label="0.5")
        ax2.axhline(1.0, color="gray", ls="--", lw=0.8, label="1.0")
        ax2.legend(fontsize=8)
    ax2.set_xlabel("iteration n")
    ax2.set_ylabel("ratio")
    ax2.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)
    return out_path


def plot_margins(certificate_path: str, out_path: str) -> str:
    """Admissibility margins per Picard iteration."""
    cert = read_certificate(certificate_path)
    con = cert.get("contraction", {})
    lo = np.asarray(con.get("margins_low_per_iteration", []), dtype=float)
    hi = np.asarray(con.get("margins_high_per_iteration", []), dtype=float)
    if lo.size == 0:
        raise SchemaError(f"{certificate_path}: no margin series")
    n = np.arange(1, len(lo) + 1)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(n, lo, "o-", label="min(q1 - delta)")
    ax.plot(n, hi, "s-", label="min(P - delta - q1)")
    ax.axhline(0.0, color="crimson", ls=":", lw=1.0)
    ax.set_xlabel("iteration n")
    ax.set_ylabel("margin")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)
    return out_path
