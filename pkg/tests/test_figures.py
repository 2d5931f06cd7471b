import json

import pytest

from cdtradeoff.errors import DomainError
from cdtradeoff.exports import parse_csv, render_rows
from cdtradeoff.figures import FIG2_COLUMNS, FIG4_COLUMNS, fig2_rows, fig4_grid, fig4_rows, unit_grid


REFERENCE_FIG4 = {
    0.15725: (1.11493262742641, None),
    0.16125: (1.35679912448532, 1.28823216598042),
    0.16625: (1.50871456997003, 1.49078609329337),
    0.17125: (1.5618506139973, 1.5616341519964),
}


def row_at(rows, distortion: float):
    matches = [row for row in rows if row[0] == pytest.approx(distortion, abs=1e-12)]
    assert len(matches) == 1, distortion
    return dict(zip(FIG4_COLUMNS, matches[0]))


def test_fig4_grid_spans_minimum_to_saturation() -> None:
    grid = fig4_grid(0.75)
    assert len(grid) == 18
    assert grid[0] == pytest.approx(5 / 32, abs=1e-15)
    assert grid[15] == pytest.approx(0.17125, abs=1e-12)
    assert grid[-2:] == pytest.approx([11 / 64, 0.181875], abs=1e-12)


@pytest.mark.parametrize("distortion", sorted(REFERENCE_FIG4))
def test_fig4_matches_reference_curves(distortion: float) -> None:
    row = row_at(fig4_rows(0.75), distortion)
    outer, inner = REFERENCE_FIG4[distortion]
    assert row["outer"] == pytest.approx(outer, abs=1e-6)
    if inner is not None:
        assert row["inner"] == pytest.approx(inner, abs=1e-6)
    assert row["inner"] <= row["outer"] + 1e-9


def test_fig4_starts_with_both_curves_at_one() -> None:
    row = row_at(fig4_rows(0.75), 5 / 32)
    assert row["outer"] == pytest.approx(1.0, abs=1e-12)
    assert row["inner"] == pytest.approx(1.0, abs=1e-12)
    assert row["resource_splitting"] == pytest.approx(0.0, abs=1e-12)
    assert row["time_sharing"] == pytest.approx(1.0, abs=1e-12)


def test_fig4_holds_last_sample_unless_exact() -> None:
    held = fig4_rows(0.75)
    for distortion in (11 / 64, 0.181875):
        row = row_at(held, distortion)
        assert row["outer"] == pytest.approx(1.5618506, abs=1e-6)
        assert row["inner"] == pytest.approx(1.5616341, abs=1e-6)

    exact = row_at(fig4_rows(0.75, exact=True), 11 / 64)
    assert exact["outer"] == pytest.approx(25 / 16, abs=1e-12)
    assert exact["inner"] == pytest.approx(25 / 16, abs=1e-9)


def test_fig4_baselines_are_straight_lines() -> None:
    rows = fig4_rows(0.75, grid=[0.15, 0.16125, 11 / 64, 0.2])
    below = dict(zip(FIG4_COLUMNS, rows[0]))
    assert below["outer"] is None
    assert below["inner"] is None
    assert below["resource_splitting"] is None

    middle = dict(zip(FIG4_COLUMNS, rows[1]))
    assert middle["resource_splitting"] == pytest.approx(0.005 / 0.09375, abs=1e-12)
    assert middle["time_sharing"] == pytest.approx(1.0 + 0.32 * 0.5625, abs=1e-12)

    past = dict(zip(FIG4_COLUMNS, rows[3]))
    assert past["time_sharing"] == pytest.approx(25 / 16, abs=1e-12)


def test_fig2_surface_and_baselines() -> None:
    rows = fig2_rows(grid_res=4)
    assert len(rows) == 3 * 25
    records = [dict(zip(FIG2_COLUMNS, row)) for row in rows]

    silent = [r for r in records if r["curve"] == "cd" and r["p"] == 1.0]
    assert len(silent) == 5
    assert all((r["R1"], r["R2"], r["D1"]) == pytest.approx((0.0, 0.0, 0.0), abs=1e-12) for r in silent)

    splitting = [r for r in records if r["curve"] == "resource_splitting" and r["share"] == 1.0 and r["r"] == 1.0]
    assert (splitting[0]["R1"], splitting[0]["D1"]) == pytest.approx((0.6, 0.4), abs=1e-12)

    sharing = [r for r in records if r["curve"] == "time_sharing" and r["share"] == 0.5 and r["r"] == 1.0]
    assert (sharing[0]["R1"], sharing[0]["D1"]) == pytest.approx((0.3, 0.1), abs=1e-12)


def test_unit_grid_needs_a_positive_resolution() -> None:
    assert unit_grid(2) == [0.0, 0.5, 1.0]
    with pytest.raises(DomainError):
        unit_grid(0)


def test_fig4_csv_leaves_undefined_cells_empty() -> None:
    rows = fig4_rows(0.75, grid=[0.15, 5 / 32])
    text = render_rows(FIG4_COLUMNS, rows, "csv")
    assert text.splitlines()[0] == "D,outer,inner,resource_splitting,time_sharing"
    assert text.splitlines()[1] == "0.15,,,,"
    records = parse_csv(text)
    assert records[0]["outer"] is None
    assert records[1]["outer"] == pytest.approx(1.0, abs=1e-9)


def test_json_export_keeps_columns_and_extra_fields() -> None:
    text = render_rows(FIG4_COLUMNS, fig4_rows(0.75, grid=[11 / 64], exact=True), "json", figure="fig4")
    payload = json.loads(text)
    assert payload["columns"] == list(FIG4_COLUMNS)
    assert payload["figure"] == "fig4"
    assert payload["rows"][0]["outer"] == pytest.approx(25 / 16)


def test_fig4_csv_matches_json_to_twelve_significant_digits() -> None:
    rows = fig4_rows(0.75)
    from_csv = parse_csv(render_rows(FIG4_COLUMNS, rows, "csv"))
    from_json = json.loads(render_rows(FIG4_COLUMNS, rows, "json"))["rows"]
    assert len(from_csv) == len(from_json)
    for csv_record, json_record in zip(from_csv, from_json):
        for column in FIG4_COLUMNS:
            if json_record[column] is None:
                assert csv_record[column] is None
            else:
                assert csv_record[column] == pytest.approx(json_record[column], rel=1e-11)
