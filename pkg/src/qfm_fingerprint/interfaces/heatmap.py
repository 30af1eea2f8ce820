#!/usr/bin/env python3

import io
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from ..errors import DimensionMismatchError

matplotlib.rcParams["svg.hashsalt"] = "qfm-fingerprint"


def lower_triangle(matrix: np.ndarray) -> np.ma.MaskedArray:
    """Rows 1..F-1 against columns 0..F-2 with everything above the diagonal masked"""
    sub = np.clip(np.asarray(matrix, dtype=np.float64)[1:, :-1], 0.0, 1.0)
    rows, cols = np.indices(sub.shape)
    return np.ma.masked_where(cols > rows, sub)


def render_heatmap(
    matrix: np.ndarray,
    labels: Sequence[str],
    title: Optional[str] = None,
    cmap: str = "viridis",
) -> str:
    """Standalone SVG of the strict lower triangle of a correlation matrix"""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatchError(f"Heatmap needs a square matrix, got {matrix.shape}")
    size = matrix.shape[0]
    if size < 2:
        raise ValueError("A heatmap needs at least two frequencies")
    if len(labels) != size:
        raise DimensionMismatchError(f"{len(labels)} labels for a {size}x{size} matrix")

    side = min(12.0, 2.0 + 0.35 * size)
    fig = Figure(figsize=(side + 1.2, side))
    FigureCanvasSVG(fig)
    ax = fig.add_subplot(111)
    image = ax.imshow(
        lower_triangle(matrix), cmap=cmap, vmin=0.0, vmax=1.0, interpolation="nearest"
    )
    ax.set_xticks(range(size - 1))
    ax.set_xticklabels(labels[:-1], rotation=90)
    ax.set_yticks(range(size - 1))
    ax.set_yticklabels(labels[1:])
    ax.set_xlabel("ω")
    ax.set_ylabel("ω′")
    if title:
        ax.set_title(title)
    fig.colorbar(image, ax=ax, label="|r|")
    fig.tight_layout()

    buffer = io.StringIO()
    fig.savefig(buffer, format="svg", metadata={"Date": None})
    return buffer.getvalue()
