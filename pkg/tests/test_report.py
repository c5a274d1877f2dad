from __future__ import annotations

import csv
import io

from toponav.metrics import OverallRow, SceneReport
from toponav.report import render_csv, render_text

REPORTS = [
    SceneReport(
        scene_id="sA", num_episodes=21, hypo_gen_accuracy_pct=66.7,
        ndtw_mean_pct=88.68, ndtw_std_pct=0.0,
        accuracy_mean_pct=57.1, accuracy_std_pct=0.0,
    ),
    SceneReport(
        scene_id="sB", num_episodes=21, hypo_gen_accuracy_pct=61.9,
        ndtw_mean_pct=87.51, ndtw_std_pct=0.13,
        accuracy_mean_pct=52.38, accuracy_std_pct=0.0,
    ),
]
OVERALL = OverallRow(
    num_episodes=42, hypo_gen_mean_pct=64.3, hypo_gen_std_pct=2.4,
    ndtw_mean_pct=88.104, ndtw_std_pct=0.586,
    accuracy_mean_pct=54.74, accuracy_std_pct=2.36,
)


class TestTextRenderer:
    def test_columns_and_average_row(self):
        text = render_text(REPORTS, OVERALL)
        lines = text.splitlines()
        assert lines[0].startswith("Scene")
        for column in ("Num Episodes", "Hypo Path Gen Accuracy (%)", "nDTW (%)",
                       "Accuracy (%)"):
            assert column in lines[0]
        assert lines[-1].startswith("Average")
        assert "42" in lines[-1]

    def test_two_decimal_fixed_point_and_pm_separator(self):
        text = render_text(REPORTS, OVERALL)
        assert "88.68±0.00" in text
        assert "87.51±0.13" in text
        assert "66.70" in text  # hypo gen column, scene rows have no ±
        assert "64.30±2.40" in text  # average row carries the spread
        assert "88.10±0.59" in text  # rounded to two decimals

    def test_scene_rows_in_order(self):
        lines = render_text(REPORTS, OVERALL).splitlines()
        scene_lines = [l for l in lines if l.startswith(("sA", "sB"))]
        assert [l.split()[0] for l in scene_lines] == ["sA", "sB"]


class TestCsvRenderer:
    def test_parses_back_with_same_cells(self):
        rows = list(csv.reader(io.StringIO(render_csv(REPORTS, OVERALL))))
        assert rows[0] == [
            "Scene", "Num Episodes", "Hypo Path Gen Accuracy (%)",
            "nDTW (%)", "Accuracy (%)",
        ]
        assert rows[1] == ["sA", "21", "66.70", "88.68±0.00", "57.10±0.00"]
        assert rows[-1][0] == "Average"
        assert rows[-1][1] == "42"
        assert rows[-1][2] == "64.30±2.40"
