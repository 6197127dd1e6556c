"""Static figures for sweep results, written next to the CSV."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .experiments import EXPERIMENTS, SweepResult, fmt  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.4),
    "figure.dpi": 120,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "svg.hashsalt": "kerrcat",
}


def plot_result(result: SweepResult, path: str | Path) -> Path:
    """One line per group value (e.g. per eta); y columns share the axis."""
    x_col, y_cols, group = EXPERIMENTS[result.experiment].plot
    path = Path(path)
    x = result.column(x_col)
    groups = result.column(group) if group else np.zeros_like(x)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for gv in dict.fromkeys(groups.tolist()):
            sel = groups == gv
            order = np.argsort(x[sel], kind="stable")
            for y_col in y_cols:
                label = y_col if not group else f"{group}={fmt(gv)}"
                if group and len(y_cols) > 1:
                    label = f"{y_col}, {label}"
                ax.plot(x[sel][order], result.column(y_col)[sel][order], label=label,
                        marker="o" if sel.sum() < 20 else None, ms=3)
        if result.experiment in ("s-sweep", "s-loss-sweep"):
            ax.axhline(2.0, color="0.5", ls="--", lw=0.8)
        ax.set_xlabel(x_col)
        ax.set_ylabel(y_cols[0] if len(y_cols) == 1 else "value")
        ax.set_title(result.experiment, fontsize=10)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path
