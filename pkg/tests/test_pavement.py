import json
import math

import numpy as np
import pytest

from sustkit.pavement import (
    BASELINE_LABEL,
    DESIGN_VARIABLES,
    MixDesign,
    MixTableError,
    figure_scenarios,
    find_mix,
    load_mix_table,
    reduction_table,
    run_demo_figures,
    thickness_reduction,
)

# Reductions recomputed by hand from the embedded totals against the 555 mm
# baseline: 100 * (555 - total) / 555.
EXPECTED_REDUCTIONS = {
    "50R:50V+20F": 18.0,
    "60R:40V+20F": 16.2,
    "80R:20V+20F": 14.4,
    "100R:0VA+20F": 8.1,
    "50R:50V+30F": 16.2,
    "60R:40V+30F": 14.4,
    "80R:20V+30F": 12.6,
}


# -- table -----------------------------------------------------------------------


def test_embedded_table_has_eight_valid_rows():
    designs = load_mix_table()
    assert len(designs) == 8
    for d in designs:
        layers = d.present_layers()
        assert math.fsum(layers.values()) == d.total_mm
        assert d.base_mr_mpa > 0


def test_baseline_row_values():
    base = find_mix(load_mix_table(), BASELINE_LABEL)
    assert base.ac_mm == 80.0
    assert base.drainage_mm is None  # no drainage layer, not zero thickness
    assert base.subbase_mm == 200.0
    assert base.base_mm == 275.0
    assert base.total_mm == 555.0
    assert base.base_mr_mpa == 350.0


def test_full_replacement_row_values():
    mix = find_mix(load_mix_table(), "100R:0VA+20F")
    assert (mix.ac_mm, mix.drainage_mm, mix.subbase_mm, mix.base_mm) == (
        70.0,
        100.0,
        100.0,
        240.0,
    )
    assert mix.total_mm == 510.0
    assert mix.base_mr_mpa == 565.0


def test_find_mix_unknown_label():
    with pytest.raises(KeyError):
        find_mix(load_mix_table(), "25R:75V")


def test_layer_sum_mismatch_rejected():
    with pytest.raises(MixTableError, match="sum to 555"):
        MixDesign(
            label="bad",
            ac_mm=80.0,
            drainage_mm=None,
            subbase_mm=200.0,
            base_mm=275.0,
            total_mm=560.0,
            base_mr_mpa=350.0,
        )


def test_negative_thickness_rejected():
    with pytest.raises(MixTableError):
        MixDesign(
            label="bad",
            ac_mm=-1.0,
            drainage_mm=None,
            subbase_mm=200.0,
            base_mm=275.0,
            total_mm=474.0,
            base_mr_mpa=350.0,
        )


def test_csv_round_trip(tmp_path):
    designs = load_mix_table()
    path = tmp_path / "mixes.csv"
    lines = ["label,ac_mm,drainage_mm,subbase_mm,base_mm,total_mm,base_mr_mpa,reference"]
    for d in designs:
        drainage = "" if d.drainage_mm is None else f"{d.drainage_mm:g}"
        lines.append(
            f"{d.label},{d.ac_mm:g},{drainage},{d.subbase_mm:g},{d.base_mm:g},"
            f"{d.total_mm:g},{d.base_mr_mpa:g},{d.reference}"
        )
    path.write_text("\n".join(lines) + "\n")
    assert load_mix_table(path) == designs


def test_csv_bad_row_reported_with_line(tmp_path):
    path = tmp_path / "mixes.csv"
    path.write_text(
        "label,ac_mm,drainage_mm,subbase_mm,base_mm,total_mm,base_mr_mpa,reference\n"
        "okrow,80,,200,275,555,350,x\n"
        "badrow,80,,200,275,560,350,x\n"
    )
    with pytest.raises(MixTableError, match="line 3"):
        load_mix_table(path)


def test_csv_missing_columns(tmp_path):
    path = tmp_path / "mixes.csv"
    path.write_text("label,total_mm\nx,555\n")
    with pytest.raises(MixTableError, match="missing columns"):
        load_mix_table(path)


def test_design_variable_ranges():
    by_name = {v.name: v for v in DESIGN_VARIABLES}
    assert by_name["RAP"].values == (50.0, 60.0, 80.0)
    assert by_name["VA"].values == (50.0, 40.0, 20.0)
    assert by_name["FA"].values == (20.0, 30.0)
    assert by_name["Mr"].values == (350.0, 1350.0)


# -- reductions -------------------------------------------------------------------


def test_reduction_values_match_hand_arithmetic():
    table = dict(reduction_table())
    assert table.keys() == EXPECTED_REDUCTIONS.keys()
    for label, expected in EXPECTED_REDUCTIONS.items():
        assert table[label] == pytest.approx(expected, abs=0.05)


def test_headline_reduction_figures():
    # The headline reductions for 50%, 60% and full replacement (18%,
    # ~14.5%, 8%) map to these three rows within 0.2 percentage points.
    from sustkit.pavement import HEADLINE_REDUCTION_ROWS

    table = dict(reduction_table())
    for replacement, expected in ((50, 18.0), (60, 14.5), (100, 8.0)):
        label = HEADLINE_REDUCTION_ROWS[replacement]
        assert table[label] == pytest.approx(expected, abs=0.2)
    # the other 60% candidate is still reported
    assert table["60R:40V+20F"] == pytest.approx(16.2, abs=0.05)


def test_reduction_of_baseline_against_itself_is_zero():
    base = find_mix(load_mix_table(), BASELINE_LABEL)
    assert thickness_reduction(base, base) == 0.0


def test_reduction_antimonotone_in_total_thickness():
    designs = sorted(load_mix_table(), key=lambda d: d.total_mm)
    base = find_mix(designs, BASELINE_LABEL)
    reductions = [thickness_reduction(d, base) for d in designs]
    assert all(a >= b for a, b in zip(reductions, reductions[1:]))


def test_reduction_rejects_zero_baseline():
    base = find_mix(load_mix_table(), BASELINE_LABEL)
    fake = MixDesign("z", 0.0, None, 0.0, 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        thickness_reduction(base, fake)


# -- figure scenarios ------------------------------------------------------------


def test_figure_scenarios_domains():
    fig4 = figure_scenarios("fig4", resolution=10)
    assert [s.domain for s in fig4] == [
        ((0.0, 1.0), (0.0, 1.0)),
        ((0.0, 3.0), (0.0, 3.0)),
        ((0.0, 6.0), (0.0, 6.0)),
        ((0.0, 9.0), (0.0, 9.0)),
    ]
    fig5 = figure_scenarios("fig5", resolution=10)
    assert [s.domain for s in fig5] == [
        ((0.0, 4.0), (0.0, 6.0)),
        ((0.0, 6.0), (0.0, 9.0)),
        ((0.0, 8.0), (0.0, 12.0)),
        ((0.0, 10.0), (0.0, 15.0)),
    ]
    with pytest.raises(ValueError):
        figure_scenarios("fig6")


def test_figure_resolution_equalises_spacing():
    fig5 = figure_scenarios("fig5", resolution=91)
    for spec in fig5:
        h = spec.spacings()
        assert h[0] == pytest.approx(h[1], rel=1e-12)
    assert fig5[-1].resolution == (61, 91)  # [0,10] x [0,15]: non-square


def test_run_demo_figures_fig4(tmp_path):
    manifest = run_demo_figures(
        "fig4", tmp_path, resolution=12, t_end=0.5, snapshot_times=[0.0, 0.5]
    )
    assert manifest["figure"] == "fig4"
    assert len(manifest["panels"]) == 4
    for panel in manifest["panels"]:
        for entry in panel["files"]:
            path = tmp_path / entry["file"]
            assert path.exists()
            rows = np.genfromtxt(path, delimiter=",", skip_header=1)
            s_t = 10.0 * entry["time_actual"]
            on_boundary = (
                np.isclose(rows[:, 0], panel["domain"][0][0])
                | np.isclose(rows[:, 0], panel["domain"][0][1])
                | np.isclose(rows[:, 1], panel["domain"][1][0])
                | np.isclose(rows[:, 1], panel["domain"][1][1])
            )
            assert np.all(rows[on_boundary, 2] == s_t)
            if entry["time_requested"] == 0.0:
                assert np.all(rows[:, 2] == 0.0)
    assert (tmp_path / "fig4_manifest.json").exists()


def test_run_demo_figures_fig5_grid_shapes(tmp_path):
    manifest = run_demo_figures(
        "fig5", tmp_path, resolution=10, t_end=0.2, snapshot_times=[0.2]
    )
    last = manifest["panels"][-1]
    assert last["resolution"][0] != last["resolution"][1]
    data = json.loads((tmp_path / "fig5_manifest.json").read_text())
    assert data["panels"][-1]["domain"] == [[0.0, 10.0], [0.0, 15.0]]


def test_run_demo_figures_normalized_export(tmp_path):
    run_demo_figures(
        "fig4",
        tmp_path,
        resolution=8,
        t_end=0.2,
        snapshot_times=[0.0, 0.2],
        normalized=True,
    )
    manifest = json.loads((tmp_path / "fig4_manifest.json").read_text())
    entries = manifest["panels"][0]["files"]
    assert "normalized_file" not in entries[0]  # t = 0 has no s*t scale
    norm_path = tmp_path / entries[1]["normalized_file"]
    rows = np.genfromtxt(norm_path, delimiter=",", skip_header=1)
    assert np.all(rows[:, 2] <= 1.0 + 1e-12)  # boundary exactly 1 after scaling
    assert np.any(np.isclose(rows[:, 2], 1.0))
