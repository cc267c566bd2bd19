"""Log-log figures of bound curves, written as SVG with searchable text."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["plot_upper", "plot_lower", "STYLE"]

STYLE = {
    "svg.fonttype": "none",
    "svg.hashsalt": "clickbound",
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "lines.linewidth": 1.5,
}

_STYLES = {1.0: "-", 2.0: "--"}


def _label(curve) -> str:
    p = curve.params
    return f"α = {p.alpha:g}, R_det/R_coh = {p.r_ratio:g}"


def _panel(curves, values, ylabel, title, path, reference=None):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6.0, 4.2))
        colours = {}
        for c in curves:
            y = values(c)
            if y is None:
                continue
            colour = colours.setdefault(c.params.alpha, f"C{len(colours)}")
            ax.loglog(c.p_dark, y, _STYLES.get(c.params.r_ratio, ":"), color=colour,
                      label=_label(c))
        if reference is not None:
            x = [min(c.p_dark.min() for c in curves), max(c.p_dark.max() for c in curves)]
            ax.loglog(x, x, color="0.5", lw=0.8, ls=":", label=reference)
        ax.set_xlabel("P_dark")
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.legend(loc="best")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return Path(path)


def plot_upper(curves: Sequence, path) -> Path:
    """Clamped bound P_click^max against P_dark for every curve."""
    return _panel(curves, lambda c: c.p_max, "P_click^max", "Upper bound on the click probability",
                  path, reference="P_click = P_dark")


def plot_lower(curves: Sequence, path) -> Path:
    """P_click^max / P_ideal against P_dark; curves with P_ideal = 0 are skipped."""
    return _panel(curves, lambda c: c.ratio, "P_click^max / P_ideal",
                  "Ratio to the ideal detector", path)
