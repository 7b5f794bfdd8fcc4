"""Optional PNG rendering of experiment tables (``geodissip run --plot``)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiments import Table  # noqa: E402

# experiment -> (x column, y columns, group column)
LAYOUT = {
    "fig2": ("n", ["delta_w_d", "delta_w_c"], "m"),
    "fig3b": ("m", ["w_c_bar", "w_d_bar", "w_gb_bar", "w_tb_bar"], "tau2"),
    "fig3c": ("m", ["w_d_bar", "w_gb_bar", "w_tb_bar", "w_tb_bar_variable"], "tau2"),
    "fig3def": ("phi", ["w_d_bar", "w_gb_bar", "w_tb_bar", "w_fb_bar", "g12_avg"], None),
    "chern": ("m", ["chern"], None),
    "steady-state": ("x", ["max_abs_diff"], None),
}


def _ok_rows(table: Table):
    return [r for r in table.rows if r.get("status", "ok") == "ok"]


def plot_table(experiment: str, table: Table, csv_path: Path) -> list[Path]:
    """Write one PNG per y column next to ``csv_path``; returns the paths written."""
    if experiment not in LAYOUT:
        return []
    xcol, ycols, group = LAYOUT[experiment]
    rows = [r for r in _ok_rows(table) if isinstance(r.get(xcol), (int, float))]
    groups = sorted({r[group] for r in rows}) if group else [None]
    written = []
    for y in ycols:
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for g in groups:
            sel = [r for r in rows if group is None or r[group] == g]
            xs = [r[xcol] for r in sel]
            ys = [r[y] for r in sel]
            ax.plot(xs, ys, "o-" if len(xs) < 40 else "-", ms=3, label=None if g is None else f"{group}={g:g}")
        ax.set_xlabel(xcol)
        ax.set_ylabel(y)
        if group:
            ax.legend(fontsize=8)
        if experiment == "fig2":
            ax.set_yscale("symlog", linthresh=1e-4)
        fig.tight_layout()
        out = csv_path.with_name(f"{csv_path.stem}_{y}.png")
        fig.savefig(out, dpi=120)
        plt.close(fig)
        written.append(out)
    return written
