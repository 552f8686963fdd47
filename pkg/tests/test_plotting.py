import csv

import pytest

from crossblock.plotting import METRICS, PlotError, PlotSpec, emit_heatmap
from crossblock.sweep import RESULTS_COLUMNS


def write_results(path, cells):
    """cells: {(lam, mu): (omega_cross, omega_p1, omega_p2)} one sample each."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULTS_COLUMNS)
        for (lam, mu), (oc, o1, o2) in sorted(cells.items()):
            writer.writerow([lam, mu, 10.0, "canonical", "ndc", 0, 0, oc, o1, o2, 9000.0, 4])


FOUR_CELLS = {
    (0.1, 0.1): (0.9, 0.9, 0.1),  # only bi-community found: alpha 1
    (0.2, 0.1): (0.9, 0.1, 0.9),  # only CP found: alpha 0
    (0.1, 0.2): (0.5, 0.1, 0.1),  # neither: alpha undefined
    (0.2, 0.2): (0.9, 0.9, 0.9),  # both: alpha 0.5
}


def test_plot_spec_validation():
    with pytest.raises(PlotError):
        PlotSpec(metric="bogus")
    with pytest.raises(PlotError):
        PlotSpec(metric="alpha", omega_t=0.0)
    assert PlotSpec(metric="alpha").diverging
    assert not PlotSpec(metric="omega_cross").diverging


def test_alpha_map_colors_and_grey_cell(tmp_path):
    path = tmp_path / "results.csv"
    write_results(path, FOUR_CELLS)
    out = tmp_path / "alpha.svg"
    emit_heatmap(str(path), PlotSpec(metric="alpha", omega_t=0.75), str(out))
    svg = out.read_text()
    assert svg.count('fill="#808080"') == 1  # exactly one undefined cell
    assert 'fill="#313695"' in svg  # alpha 1: blue end
    assert 'fill="#a50026"' in svg  # alpha 0: red end
    assert svg.startswith("<svg ")
    assert svg.rstrip().endswith("</svg>")


def test_constant_metric_single_color_with_full_bar(tmp_path):
    path = tmp_path / "results.csv"
    write_results(
        path,
        {(l, m): (0.6, 0.3, 0.3) for l in (0.1, 0.2) for m in (0.1, 0.2)},
    )
    out = tmp_path / "oc.svg"
    emit_heatmap(str(path), PlotSpec(metric="omega_cross"), str(out))
    svg = out.read_text()
    # the omega scale is fixed to [0,1]: bar endpoints label 1 and 0
    assert ">1<" in svg and ">0<" in svg
    # all four grid cells share the color of omega=0.6 on the fixed scale
    cell_rects = [line for line in svg.splitlines() if 'width="24" height="24"' in line]
    fills = {line.split('fill="')[1].split('"')[0] for line in cell_rects}
    assert len(cell_rects) == 4
    assert len(fills) == 1


def test_byte_stable_output(tmp_path):
    path = tmp_path / "results.csv"
    write_results(path, FOUR_CELLS)
    a = tmp_path / "a.svg"
    b = tmp_path / "b.svg"
    emit_heatmap(str(path), PlotSpec(metric="omega_p1"), str(a))
    emit_heatmap(str(path), PlotSpec(metric="omega_p1"), str(b))
    assert a.read_bytes() == b.read_bytes()


def test_non_rectangular_grid_rejected(tmp_path):
    path = tmp_path / "results.csv"
    cells = dict(FOUR_CELLS)
    del cells[(0.2, 0.2)]
    write_results(path, cells)
    with pytest.raises(PlotError, match="non-rectangular"):
        emit_heatmap(str(path), PlotSpec(metric="omega_cross"), str(tmp_path / "x.svg"))


def test_log_evidence_diff_needs_summary(tmp_path):
    path = tmp_path / "results.csv"
    write_results(path, FOUR_CELLS)
    with pytest.raises(PlotError, match="summary.csv"):
        emit_heatmap(str(path), PlotSpec(metric="log_evidence_diff"), str(tmp_path / "x.svg"))


def test_log_evidence_diff_from_summary(tmp_path):
    path = tmp_path / "results.csv"
    write_results(path, FOUR_CELLS)
    with open(tmp_path / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["lambda", "mu", "c", "generator", "log_evidence_ndc", "log_evidence_dc"]
        )
        for (lam, mu) in FOUR_CELLS:
            writer.writerow([lam, mu, 10.0, "canonical", -9000.0, -9100.0])
    out = tmp_path / "lev.svg"
    emit_heatmap(str(path), PlotSpec(metric="log_evidence_diff"), str(out))
    svg = out.read_text()
    # dc - ndc = -100 everywhere: every cell sits at the red end
    cell_rects = [line for line in svg.splitlines() if 'width="24" height="24"' in line]
    assert all('fill="#a50026"' in line for line in cell_rects)


def test_all_metrics_enumerated():
    assert set(METRICS) == {
        "omega_cross",
        "omega_p1",
        "omega_p2",
        "alpha",
        "log_evidence_diff",
        "degree_variance",
        "js_distance",
    }
