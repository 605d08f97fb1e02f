"""Matplotlib renderings of sweep results, written next to the CSV."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .results import SweepResult  # noqa: E402
from .svg import PlotError, _series  # noqa: E402

LABELS = {
    "mse": "MSE",
    "psnr_db": "PSNR (dB)",
    "sinr_db": "SINR (dB)",
    "outage_prob": "Outage probability",
    "capacity_bpcu": "Capacity (bits/channel use)",
    "diversity_order": "Diversity order",
}
LOG_Y = {"mse", "outage_prob"}

plt.rcParams.update({
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.5,
    "lines.markersize": 5,
})


def render_metric(result: SweepResult, metric: str, path, title: str | None = None) -> Path:
    if metric not in result.metrics():
        raise PlotError(f"metric {metric!r} not in result; available: {', '.join(result.metrics())}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    for label, data in _series(result, metric).items():
        xs, ys = zip(*data)
        ax.plot(xs, ys, marker="o", label=label)
    if metric in LOG_Y and all(r.value > 0 for r in result.select(metric)):
        ax.set_yscale("log")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel(LABELS.get(metric, metric))
    if title:
        ax.set_title(title)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def render_figures(result: SweepResult, out_dir, fmt: str = "png") -> list:
    """One figure per metric present in ``result``; returns the written paths."""
    out_dir = Path(out_dir)
    return [render_metric(result, m, out_dir / f"{m}.{fmt}") for m in result.metrics()]
