"""Golden figure data for the k = 3 coarse-grained rate, as CSV plus rendered PNG.

Panel assignments are versioned constants: contour grids pair one fixed
delay with a (tau_a, tau_b) sweep, line cuts fix the far-plateau delay at
15 and sweep tau3 for a few assigned values of the remaining delay.  Every
value is the coarse rate rescaled by the large-delay plateau 1/2.  Ranges
default to |tau| <= 25; the assigned per-panel values are choices documented
here, not claims about any particular published rendering.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .emit import write_csv
from .rates import rbar_batch

PLATEAU = 0.5

TAU_RANGE = 25.0
CONTOUR_STEP = 0.25
CUT_STEP = 0.05

#: fig2: contours over (tau1, tau3) at assigned tau2
FIG2_TAU2 = (0.0, 5.0, 10.0, 15.0)
#: fig3: cuts over tau3 at tau2 = 15 for assigned tau1
FIG3_TAU2 = 15.0
FIG3_TAU1 = (0.0, 5.0, 10.0, 15.0)
#: fig4: contours over (tau2, tau3) at assigned tau1
FIG4_TAU1 = (0.0, 5.0, 10.0, 15.0)
#: fig5: cuts over tau3 at tau1 = 15 for assigned tau2 (tau2 = 15 would collide
#: with the tau1 dip pair at tau3 = +-15 and is deliberately not included)
FIG5_TAU1 = 15.0
FIG5_TAU2 = (0.0, 5.0, 10.0)

FIGURE_IDS = ("fig2", "fig3", "fig4", "fig5")

CONTOUR_HEADER = ("tau1", "tau2", "tau3", "rbar", "rbar_rescaled")
CUT_HEADER = ("cut_label", "tau3", "rbar_rescaled")


@dataclass(frozen=True)
class FigureData:
    figure_id: str
    header: tuple[str, ...]
    rows: list[tuple]


def _axis(limit: float, step: float) -> np.ndarray:
    n = int(round(limit / step))
    return step * np.arange(-n, n + 1)


def _contour_rows(fixed_name: str, fixed_values: tuple[float, ...]) -> list[tuple]:
    ax = _axis(TAU_RANGE, CONTOUR_STEP)
    rows = []
    for fixed in fixed_values:
        aa, bb = np.meshgrid(ax, ax, indexing="ij")
        if fixed_name == "tau2":
            pts = np.stack([aa.ravel(), np.full(aa.size, fixed), bb.ravel()], axis=1)
        else:
            pts = np.stack([np.full(aa.size, fixed), aa.ravel(), bb.ravel()], axis=1)
        rbar = rbar_batch(pts, 3)
        for (t1, t2, t3), rb in zip(pts, rbar):
            rows.append((float(t1), float(t2), float(t3), float(rb), float(rb / PLATEAU)))
    return rows


def _cut_rows(
    fixed_name: str, fixed_value: float, cut_name: str, cut_values: tuple[float, ...]
) -> list[tuple]:
    ax = _axis(TAU_RANGE, CUT_STEP)
    rows = []
    for cut in cut_values:
        if fixed_name == "tau2":
            pts = np.stack(
                [np.full(ax.size, cut), np.full(ax.size, fixed_value), ax], axis=1
            )
        else:
            pts = np.stack(
                [np.full(ax.size, fixed_value), np.full(ax.size, cut), ax], axis=1
            )
        rbar = rbar_batch(pts, 3)
        label = f"{cut_name}={cut:g}"
        for t3, rb in zip(ax, rbar):
            rows.append((label, float(t3), float(rb / PLATEAU)))
    return rows


def figure_data(figure_id: str) -> FigureData:
    if figure_id == "fig2":
        return FigureData("fig2", CONTOUR_HEADER, _contour_rows("tau2", FIG2_TAU2))
    if figure_id == "fig3":
        return FigureData(
            "fig3", CUT_HEADER, _cut_rows("tau2", FIG3_TAU2, "tau1", FIG3_TAU1)
        )
    if figure_id == "fig4":
        return FigureData("fig4", CONTOUR_HEADER, _contour_rows("tau1", FIG4_TAU1))
    if figure_id == "fig5":
        return FigureData(
            "fig5", CUT_HEADER, _cut_rows("tau1", FIG5_TAU1, "tau2", FIG5_TAU2)
        )
    raise ValueError(f"unknown figure id {figure_id!r}; expected one of {FIGURE_IDS}")


def _render_contour(data: FigureData, png_path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = np.array([r[:5] for r in data.rows], dtype=float)
    fixed_col = 1 if data.figure_id == "fig2" else 0
    sweep_cols = (0, 2) if data.figure_id == "fig2" else (1, 2)
    fixed_vals = sorted(set(rows[:, fixed_col]))
    fig, axes = plt.subplots(2, 2, figsize=(10, 8), constrained_layout=True)
    for ax, fixed in zip(axes.ravel(), fixed_vals):
        sel = rows[rows[:, fixed_col] == fixed]
        xs = np.unique(sel[:, sweep_cols[0]])
        ys = np.unique(sel[:, sweep_cols[1]])
        z = sel[:, 4].reshape(len(xs), len(ys))
        im = ax.contourf(xs, ys, z.T, levels=21, cmap="viridis")
        fig.colorbar(im, ax=ax, shrink=0.85)
        names = ("tau1", "tau3") if data.figure_id == "fig2" else ("tau2", "tau3")
        ax.set_xlabel(names[0])
        ax.set_ylabel(names[1])
        fixed_name = "tau2" if data.figure_id == "fig2" else "tau1"
        ax.set_title(f"{fixed_name} = {fixed:g}")
    fig.suptitle(f"{data.figure_id}: coarse rate / plateau")
    fig.savefig(png_path, dpi=120)
    plt.close(fig)


def _render_cut(data: FigureData, png_path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 5), constrained_layout=True)
    labels = []
    for label, _, _ in data.rows:
        if label not in labels:
            labels.append(label)
    for label in labels:
        xs = [r[1] for r in data.rows if r[0] == label]
        ys = [r[2] for r in data.rows if r[0] == label]
        ax.plot(xs, ys, label=label)
    ax.axhline(1.0, color="gray", lw=0.8, ls="--")
    ax.set_xlabel("tau3")
    ax.set_ylabel("coarse rate / plateau")
    ax.set_title(data.figure_id)
    ax.legend()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)


def emit_figure_data(figure_id: str, out_dir: Path | str, render: bool = True) -> list[Path]:
    """Write <figure_id>.csv (and .png unless render is off); returns written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data = figure_data(figure_id)
    written = [write_csv(out_dir / f"{figure_id}.csv", data.header, data.rows)]
    if render:
        png = out_dir / f"{figure_id}.png"
        if data.header == CONTOUR_HEADER:
            _render_contour(data, png)
        else:
            _render_cut(data, png)
        written.append(png)
    return written
