"""Plots for sweep results."""

from __future__ import annotations

import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import pandas as pd  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

MODE_STYLES = {
    "dort": {"marker": "o", "linestyle": "-"},
    "oracle": {"marker": "s", "linestyle": "--"},
    "fixed": {"marker": "^", "linestyle": "-."},
    "fixed-crop": {"marker": "v", "linestyle": ":"},
}


def plot_pareto(
    table: pd.DataFrame,
    path: str | Path,
    metric: str = "tracklet_map",
    title: str = "Speed / accuracy trade-off",
    figsize: tuple[float, float] = (7.0, 5.0),
) -> Path | None:
    """Write an SVG with fps on x and ``metric`` on y, one polyline per mode.

    Points of a mode are joined in sigma order and annotated with sigma.
    Returns None (with a warning) when ``table`` is empty.
    """
    path = Path(path)
    if table.empty:
        warnings.warn("Empty sweep table. Cannot plot.", RuntimeWarning)
        return None

    fig = Figure(figsize=figsize)
    ax = fig.add_subplot(1, 1, 1)
    for mode, rows in table.groupby("mode", sort=True):
        rows = rows.sort_values("sigma")
        style = MODE_STYLES.get(str(mode), {"marker": ".", "linestyle": "-"})
        ax.plot(rows["fps"], rows[metric], label=str(mode), **style)
        points = zip(rows["fps"], rows[metric], rows["sigma"], strict=True)
        for fps, value, sigma in points:
            ax.annotate(
                f"σ={sigma}",
                (fps, value),
                textcoords="offset points",
                xytext=(4, 4),
                fontsize=7,
            )
    ax.set_xlabel("Effective fps (cost model)")
    ax.set_ylabel(metric.replace("_", " "))
    ax.set_title(title)
    ax.grid(True, linestyle=":", alpha=0.6)
    ax.legend(loc="lower left")
    fig.tight_layout()

    path.parent.mkdir(parents=True, exist_ok=True)
    # fixed salt and no date keep the SVG byte-identical across runs
    with matplotlib.rc_context({"svg.hashsalt": "dort"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path


__all__ = ["plot_pareto"]
