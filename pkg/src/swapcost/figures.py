"""Matplotlib renderings of report and sweep outputs.

Every function takes already-computed results plus an output path,
writes one PNG, and returns the path. Rendering is headless and
deterministic for fixed inputs.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.dates as mdates
import matplotlib.pyplot as plt
import numpy as np

from .backtest import BacktestReport, SweepGrid
from .errors import EmptyReport

__all__ = [
    "timeseries_figure",
    "breakdown_figure",
    "sweep_heatmap",
]

_DPI = 120

_COMPONENT_COLORS = {
    "gas": "#8c7aa9",
    "lp fee": "#5b9bd5",
    "price impact": "#ed7d31",
}


def _volumes(report: BacktestReport) -> list[float]:
    return sorted({r.volume_eur for r in report.rows})


def timeseries_figure(report: BacktestReport, path: str | Path) -> Path:
    """Daily total cost per scenario, one panel per trade volume."""
    if not report.rows:
        raise EmptyReport("nothing to plot")
    volumes = _volumes(report)
    scenarios = sorted({r.scenario for r in report.rows})
    fig, axes = plt.subplots(
        len(volumes), 1, figsize=(9, 2.6 * len(volumes)), sharex=True, squeeze=False
    )
    for ax, volume in zip(axes[:, 0], volumes):
        for scenario in scenarios:
            series = [(r.date, r.total_eur) for r in report.rows
                      if r.volume_eur == volume and r.scenario == scenario]
            if not series:
                continue
            dates, totals = zip(*series)
            ax.plot(dates, totals, label=scenario, linewidth=1.0)
        ax.set_ylabel("total cost (EUR)")
        ax.set_title(f"trade volume {volume:,.0f} EUR", fontsize=10)
        ax.grid(True, alpha=0.3)
    axes[0, 0].legend(loc="upper left", fontsize=9)
    axes[-1, 0].xaxis.set_major_formatter(mdates.DateFormatter("%Y-%m"))
    fig.autofmt_xdate()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def breakdown_figure(report: BacktestReport, path: str | Path) -> Path:
    """Stacked mean cost components per scenario, one panel per volume."""
    if not report.aggregates:
        raise EmptyReport("nothing to plot")
    volumes = sorted({a.volume_eur for a in report.aggregates})
    fig, axes = plt.subplots(
        1, len(volumes), figsize=(3.2 * len(volumes), 4.2), squeeze=False
    )
    for ax, volume in zip(axes[0], volumes):
        aggs = [a for a in report.aggregates if a.volume_eur == volume]
        labels = [a.scenario for a in aggs]
        parts = {
            "gas": [a.gas_eur for a in aggs],
            "lp fee": [a.lp_fee_eur for a in aggs],
            "price impact": [a.impact_eur for a in aggs],
        }
        bottom = np.zeros(len(aggs))
        for name, values in parts.items():
            ax.bar(labels, values, bottom=bottom, label=name,
                   color=_COMPONENT_COLORS[name], width=0.6)
            bottom += np.asarray(values)
        ax.set_title(f"{volume:,.0f} EUR", fontsize=10)
        ax.set_ylabel("mean cost (EUR)")
        ax.tick_params(axis="x", rotation=20)
        ax.grid(True, axis="y", alpha=0.3)
    axes[0][-1].legend(fontsize=9)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def sweep_heatmap(grid: SweepGrid, path: str | Path) -> Path:
    """Cost-difference surface over the gas-by-volume grid.

    Diverging colors centered at zero: positive cells (the routed
    scenario is cheaper) in blue, negative in red.
    """
    diff = np.asarray(grid.diff_eur)
    volumes = np.asarray(grid.volumes_eur)
    gas = np.asarray(grid.gas_levels_eur)
    span = max(abs(float(diff.min())), abs(float(diff.max())), 1e-12)
    fig, ax = plt.subplots(figsize=(8, 5))
    mesh = ax.pcolormesh(
        volumes, gas, diff, cmap="RdBu", vmin=-span, vmax=span, shading="auto"
    )
    if len(volumes) > 1:
        ax.set_xscale("log")
    if len(gas) > 1:
        ax.set_yscale("log")
    ax.set_xlabel("trade volume (EUR)")
    ax.set_ylabel("base-layer gas (EUR)")
    ax.set_title(
        f"mean total cost: {grid.base_scenario} minus {grid.routed_scenario}\n"
        f"liquidity {grid.tvl_chf:,.0f} CHF; positive = {grid.routed_scenario} cheaper",
        fontsize=10,
    )
    fig.colorbar(mesh, ax=ax, label="cost difference (EUR)")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path
