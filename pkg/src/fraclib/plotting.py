"""Headless figure rendering for sampled graphs, point clouds and histograms.

Figures are written straight to files (SVG or PNG) with a fixed hash salt
and no embedded timestamps, so identical inputs produce identical bytes.
Sample rows arrive ordered with jump duplicates adjacent (left value first),
which makes a plain polyline draw the vertical segment at each jump.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .evaluate import SampleSet
from .histopolation import Histogram

plt.rcParams["svg.hashsalt"] = "fraclib"

_FIGSIZE = (8.0, 4.5)
_DPI = 150


def _save(fig, path: str) -> str:
    if path.endswith(".svg"):
        fig.savefig(path, metadata={"Date": None})
    else:
        fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def plot_samples(samples: SampleSet, path: str, title: str | None = None) -> str:
    """Polyline through the sample rows; duplicates render jumps vertically."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(samples.xs, samples.values, linewidth=0.7, color="tab:blue")
    ax.set_xlabel("x")
    ax.set_ylabel("value")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def plot_points(samples: SampleSet, path: str, title: str | None = None) -> str:
    """Scatter of a point cloud, e.g. a chaos-game orbit."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(samples.xs, samples.values, ".", markersize=1.0, color="tab:blue")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def plot_histopolation(hist: Histogram, samples: SampleSet | None, path: str,
                       title: str | None = None) -> str:
    """Histogram outline with the (optional) matching density graph on top."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.stairs(hist.frequencies, hist.partition.knots, color="tab:gray",
              linewidth=1.2, label="histogram")
    if samples is not None:
        ax.plot(samples.xs, samples.values, linewidth=0.7, color="tab:blue",
                label="histopolant")
    ax.set_xlabel("x")
    ax.set_ylabel("value")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    return _save(fig, path)
