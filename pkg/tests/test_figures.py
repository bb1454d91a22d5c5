import numpy as np
import pytest

from homcascade.figures import (
    CONTOUR_HEADER,
    CUT_HEADER,
    FIG3_TAU1,
    FIG5_TAU2,
    emit_figure_data,
    figure_data,
)


def cut_series(data, label):
    xs = np.array([r[1] for r in data.rows if r[0] == label])
    ys = np.array([r[2] for r in data.rows if r[0] == label])
    return xs, ys


def test_unknown_figure_id():
    with pytest.raises(ValueError):
        figure_data("fig9")


def test_fig3_center_cut_single_deep_dip():
    data = figure_data("fig3")
    xs, ys = cut_series(data, "tau1=0")
    i = int(np.argmin(ys))
    assert xs[i] == pytest.approx(0.0)
    assert ys[i] == pytest.approx(0.5, abs=1e-9)  # rescaled floor 1/4 / (1/2)
    assert (1.0 - ys.min()) >= 0.25


def test_fig3_side_cuts_dip_pair_quarter_visibility():
    data = figure_data("fig3")
    for t1 in (5.0, 10.0):
        xs, ys = cut_series(data, f"tau1={t1:g}")
        left = ys[xs < 0]
        right = ys[xs > 0]
        assert left.min() == pytest.approx(0.75, abs=1e-6)
        assert right.min() == pytest.approx(0.75, abs=1e-6)
        assert xs[np.argmin(np.where(xs > 0, ys, np.inf))] == pytest.approx(t1, abs=0.05)


def test_fig3_collision_cut_half_visibility():
    # tau1 = 15 collides with the fixed tau2 = 15 bump pair: 12.5%, not 25%
    data = figure_data("fig3")
    xs, ys = cut_series(data, "tau1=15")
    assert ys.min() == pytest.approx(0.875, abs=1e-6)


def test_fig5_cuts_peak_pair():
    data = figure_data("fig5")
    for t2 in (5.0, 10.0):
        xs, ys = cut_series(data, f"tau2={t2:g}")
        right = np.where(xs > 0, ys, -np.inf)
        i = int(np.argmax(right))
        assert xs[i] == pytest.approx(t2, abs=0.05)
        vis = ys.max() - 1.0
        assert 0.08 <= vis <= 0.13


def test_plateau_rows_normalized():
    # tau1 = 10 is excluded: its tau1 + tau2 = 25 structure lands exactly on
    # the default range endpoint (a real -1/32 feature, value 15/16 rescaled)
    data = figure_data("fig3")
    for t1 in (0.0, 5.0, 15.0):
        xs, ys = cut_series(data, f"tau1={t1:g}")
        assert ys[0] == pytest.approx(1.0, abs=1e-6)
        assert ys[-1] == pytest.approx(1.0, abs=1e-6)
    xs, ys = cut_series(data, "tau1=10")
    assert ys[0] == pytest.approx(0.9375, abs=1e-6)


def test_rescaled_values_inside_global_bounds():
    # the coarse form tops out at 1.25x the plateau (both bump pairs stacked
    # at tau2 = tau3 = 0), so 1.25 is the true ceiling
    for fid in ("fig2", "fig4"):
        data = figure_data(fid)
        vals = np.array([r[4] for r in data.rows])
        assert vals.min() >= 0.0
        assert vals.max() <= 1.25 + 1e-9
    data = figure_data("fig4")
    vals = np.array([r[4] for r in data.rows])
    assert vals.max() > 1.2  # the stacked ridge is real


def test_contour_schema_and_assignments():
    data = figure_data("fig2")
    assert data.header == CONTOUR_HEADER
    tau2_vals = sorted(set(r[1] for r in data.rows))
    assert tau2_vals == [0.0, 5.0, 10.0, 15.0]


def test_cut_schema():
    data = figure_data("fig5")
    assert data.header == CUT_HEADER
    labels = sorted(set(r[0] for r in data.rows))
    assert labels == sorted(f"tau2={v:g}" for v in FIG5_TAU2)


def test_emit_writes_deterministic_csv(tmp_path):
    first = emit_figure_data("fig3", tmp_path / "a", render=False)
    second = emit_figure_data("fig3", tmp_path / "b", render=False)
    assert [p.name for p in first] == ["fig3.csv"]
    assert first[0].read_bytes() == second[0].read_bytes()
    header = first[0].read_text().splitlines()[0]
    assert header == "cut_label,tau3,rbar_rescaled"


def test_emit_renders_png(tmp_path):
    paths = emit_figure_data("fig5", tmp_path, render=True)
    names = sorted(p.name for p in paths)
    assert names == ["fig5.csv", "fig5.png"]
    assert (tmp_path / "fig5.png").stat().st_size > 1000
    paths = emit_figure_data("fig2", tmp_path, render=True)
    assert (tmp_path / "fig2.png").stat().st_size > 1000
