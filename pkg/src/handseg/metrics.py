"""One-to-one box matching and the DR/RA/FM/SM evaluation metrics.

A ground-truth box and a predicted box may match when their intersection
covers at least Ta of BOTH areas; the two-sided test keeps a huge box
from claiming a small one. Matching is greedy by descending intersection
area, each box used at most once. DR = o2o/N, RA = o2o/M, FM is their
harmonic mean, and SM averages the line and word FM.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .geometry import PixelRect, intersection_area

__all__ = [
    "EvalReport",
    "SummaryReport",
    "match_one_to_one",
    "compute_metrics",
    "summarize",
    "report_to_dict",
    "format_report_table",
    "report_json",
]


@dataclass(frozen=True)
class EvalReport:
    N: int
    M: int
    o2o: int
    DR: float
    RA: float
    FM: float
    Ta: float
    class_label: str


@dataclass(frozen=True)
class SummaryReport:
    line_report: EvalReport
    word_report: EvalReport
    SM: float


def match_one_to_one(
    gt: list[PixelRect], pred: list[PixelRect], Ta: float = 0.5
) -> list[tuple[int, int]]:
    """Greedy one-to-one matching of admissible (gt, pred) pairs.

    Admissible means intersection >= Ta * area on both sides. Pairs are
    taken in descending intersection order (ties by gt index, then pred
    index); used boxes drop out.
    """
    if not 0.0 < Ta <= 1.0:
        raise ValueError(f"Ta out of (0, 1]: {Ta!r}")
    pairs: list[tuple[int, int, int]] = []
    for gi, g in enumerate(gt):
        for pi, p in enumerate(pred):
            inter = intersection_area(g, p)
            if inter >= Ta * g.area and inter >= Ta * p.area:
                pairs.append((-inter, gi, pi))
    pairs.sort()
    gt_used = set()
    pred_used = set()
    matches: list[tuple[int, int]] = []
    for _, gi, pi in pairs:
        if gi in gt_used or pi in pred_used:
            continue
        gt_used.add(gi)
        pred_used.add(pi)
        matches.append((gi, pi))
    return matches


def compute_metrics(N: int, M: int, o2o: int, Ta: float = 0.5, class_label: str = "line") -> EvalReport:
    """Build an EvalReport from counts; zero denominators give zero rates."""
    if N < 0 or M < 0 or o2o < 0:
        raise ValueError("counts must be >= 0")
    if o2o > min(N, M):
        raise ValueError(f"o2o {o2o} exceeds min(N, M) = {min(N, M)}")
    if not 0.0 < Ta <= 1.0:
        raise ValueError(f"Ta out of (0, 1]: {Ta!r}")
    dr = o2o / N if N > 0 else 0.0
    ra = o2o / M if M > 0 else 0.0
    fm = 2.0 * dr * ra / (dr + ra) if dr + ra > 0 else 0.0
    return EvalReport(N, M, o2o, dr, ra, fm, Ta, class_label)


def summarize(line_report: EvalReport, word_report: EvalReport) -> SummaryReport:
    """Combine line and word reports; SM is the mean of their FM values."""
    if line_report.Ta != word_report.Ta:
        raise ValueError(
            f"reports use different Ta: {line_report.Ta!r} vs {word_report.Ta!r}"
        )
    sm = (line_report.FM + word_report.FM) / 2.0
    return SummaryReport(line_report, word_report, sm)


def report_to_dict(report: EvalReport) -> dict:
    return {
        "class": report.class_label,
        "N": report.N,
        "M": report.M,
        "o2o": report.o2o,
        "DR": round(report.DR * 100.0, 2),
        "RA": round(report.RA * 100.0, 2),
        "FM": round(report.FM * 100.0, 2),
        "Ta": report.Ta,
    }


def format_report_table(reports: list[EvalReport]) -> str:
    """Aligned text table with N, M, o2o, DR, RA, FM columns (percent)."""
    header = ("class", "N", "M", "o2o", "DR(%)", "RA(%)", "FM(%)")
    rows = [header]
    for r in reports:
        rows.append(
            (
                r.class_label,
                str(r.N),
                str(r.M),
                str(r.o2o),
                f"{r.DR * 100.0:.2f}",
                f"{r.RA * 100.0:.2f}",
                f"{r.FM * 100.0:.2f}",
            )
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = ["  ".join(cell.rjust(widths[i]) for i, cell in enumerate(row)) for row in rows]
    return "\n".join(lines)


def report_json(report: EvalReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, sort_keys=True)
