"""Benchmark table rendering: aligned text and CSV, two-decimal fixed point."""

from __future__ import annotations

import csv
import io
from typing import Sequence

from .metrics import OverallRow, SceneReport

HEADERS = (
    "Scene",
    "Num Episodes",
    "Hypo Path Gen Accuracy (%)",
    "nDTW (%)",
    "Accuracy (%)",
)

AVERAGE_LABEL = "Average"


def _pm(mean: float, std: float) -> str:
    return f"{mean:.2f}±{std:.2f}"


def _rows(reports: Sequence[SceneReport], overall: OverallRow) -> list[tuple[str, ...]]:
    rows = [
        (
            r.scene_id,
            str(r.num_episodes),
            f"{r.hypo_gen_accuracy_pct:.2f}",
            _pm(r.ndtw_mean_pct, r.ndtw_std_pct),
            _pm(r.accuracy_mean_pct, r.accuracy_std_pct),
        )
        for r in reports
    ]
    rows.append(
        (
            AVERAGE_LABEL,
            str(overall.num_episodes),
            _pm(overall.hypo_gen_mean_pct, overall.hypo_gen_std_pct),
            _pm(overall.ndtw_mean_pct, overall.ndtw_std_pct),
            _pm(overall.accuracy_mean_pct, overall.accuracy_std_pct),
        )
    )
    return rows


def render_text(reports: Sequence[SceneReport], overall: OverallRow) -> str:
    """Monospace table with the Average row separated by a rule."""
    rows = _rows(reports, overall)
    widths = [
        max(len(HEADERS[col]), *(len(row[col]) for row in rows))
        for col in range(len(HEADERS))
    ]

    def line(cells: Sequence[str]) -> str:
        return "  ".join(cell.ljust(width) for cell, width in zip(cells, widths)).rstrip()

    rule = "-" * (sum(widths) + 2 * (len(widths) - 1))
    out = [line(HEADERS), rule]
    out.extend(line(row) for row in rows[:-1])
    out.append(rule)
    out.append(line(rows[-1]))
    return "\n".join(out) + "\n"


def render_csv(reports: Sequence[SceneReport], overall: OverallRow) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(HEADERS)
    writer.writerows(_rows(reports, overall))
    return buffer.getvalue()
