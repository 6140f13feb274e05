"""Optional figures written next to the CSV outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def plot_series(series, path) -> None:
    """Running total phase, dynamical phase and one-form integral."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(series.t, series.phi_running, label="total phase")
    ax.plot(series.t, series.phi_dyn_running, label="dynamical phase")
    ax.plot(series.t, series.beta_cumulative, "--", label="one-form integral")
    ax.set_xlabel("t")
    ax.set_ylabel("phase (rad)")
    ax.axhline(0.0, color="0.8", lw=0.8, zorder=0)
    ax.legend(frameon=False)
    _save(fig, path)


def plot_sweep(parameter: str, rows, path) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    x = [r[1] for r in rows]
    for col, label in ((4, "geometric"), (3, "dynamical"), (2, "total")):
        ax.plot(x, [r[col] for r in rows], "o-", ms=3, label=label)
    bad = [r[1] for r in rows if r[7]]
    for v in bad:
        ax.axvline(v, color="r", alpha=0.3, lw=4)
    ax.set_xlabel(parameter)
    ax.set_ylabel("phase (rad)")
    ax.set_title(f"{len(rows)} points, {len(bad)} failed" if bad else f"{len(rows)} points")
    ax.legend(frameon=False)
    _save(fig, path)
