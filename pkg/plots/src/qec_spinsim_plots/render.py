"""Publication-style rendering of sweep CSVs: bound pairs, baselines, marker."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .figspec import FigureSpec, SpecError, load_series_csv

# one styling table; echoes the reference figures' visual language
STYLE = {
    "colors": ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"),
    "lower_ls": "-",
    "upper_ls": "--",
    "baseline_ls": "-.",
    "baseline_color": "#2ca02c",
    "marker_ls": ":",
    "marker_color": "0.3",
    "figsize": (5.2, 3.9),
}


def render(spec: FigureSpec, out_dir: str | Path = ".") -> Path:
    """Render one figure; returns the written image path."""
    fig = build_figure(spec)
    out_path = Path(out_dir) / spec.out
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=200, bbox_inches="tight")
    plt.close(fig)
    return out_path


def build_figure(spec: FigureSpec):
    """The figure object; split out so tests can inspect plotted arrays."""
    data = [load_series_csv(series.csv) for series in spec.series]
    fig, ax = plt.subplots(figsize=STYLE["figsize"])
    for i, (series, table) in enumerate(zip(spec.series, data)):
        color = STYLE["colors"][i % len(STYLE["colors"])]
        x = table["sweep_value"]
        ax.plot(x, table["p_l_lower"], STYLE["lower_ls"], color=color,
                label=f"{series.label} (lower)")
        ax.plot(x, table["p_l_upper"], STYLE["upper_ls"], color=color,
                label=f"{series.label} (upper)")
    base = data[spec.baselines_from - 1]
    x = base["sweep_value"]
    ax.plot(x, base["baseline_bare"], STYLE["baseline_ls"],
            color=STYLE["baseline_color"], label="physical (bare)")
    ax.plot(x, base["baseline_echo"], STYLE["baseline_ls"],
            color=STYLE["baseline_color"], alpha=0.55, label="physical (echo)")
    if spec.marker is not None:
        lo = min(min(t["sweep_value"]) for t in data)
        hi = max(max(t["sweep_value"]) for t in data)
        if not lo <= spec.marker <= hi:
            raise SpecError(f"marker {spec.marker} outside the data range "
                            f"[{lo}, {hi}]")
        ax.axvline(spec.marker, linestyle=STYLE["marker_ls"],
                   color=STYLE["marker_color"], linewidth=1.0)
    ax.set_xscale(spec.xscale)
    ax.set_yscale(spec.yscale)
    ax.set_xlabel(spec.xlabel)
    ax.set_ylabel(spec.ylabel)
    if spec.title:
        ax.set_title(spec.title)
    ax.margins(0.05)
    ax.legend(fontsize=7, frameon=False)
    fig.tight_layout()
    return fig


def plotted_arrays(fig):
    """Line data in draw order, for golden-file comparisons."""
    ax = fig.axes[0]
    return [line.get_xydata().copy() for line in ax.get_lines()]
