"""First-pass detection filtering and second-pass final-line selection.

The first pass prunes oversized low-confidence boxes that swallow real
lines; the second pass picks which pass-2 box (if any) to crop the
corrected line image to, following four count-based rules.
"""
from __future__ import annotations

import statistics
from dataclasses import dataclass

from .detect import DetectionSet, filter_by_confidence
from .geometry import Detection, PixelRect, norm_to_rect, overlaps

__all__ = ["LineCandidate", "FinalLineDecision", "filter_first_pass", "select_final_line"]


@dataclass(frozen=True)
class LineCandidate:
    """A surviving pass-1 detection with its rect on the detection frame."""

    detection: Detection
    rect: PixelRect


@dataclass(frozen=True)
class FinalLineDecision:
    """Crop target for a corrected line image; rect None means keep whole."""

    rect: PixelRect | None
    reason: str

    @property
    def keep_whole(self) -> bool:
        return self.rect is None


def filter_first_pass(
    dset: DetectionSet,
    conf_threshold: float = 0.3,
    height_factor: float = 1.7,
    overlap_frac: float = 0.5,
    high_conf: float = 0.5,
) -> list[LineCandidate]:
    """Confidence-filter, y-sort, and drop unusual-height overlap boxes.

    A survivor is removed only when all three hold: its height exceeds
    height_factor times the median survivor height, its confidence is
    below high_conf, and it overlaps some other survivor by at least
    overlap_frac of the smaller box. The set's single highest-confidence
    detection is always kept.
    """
    if height_factor <= 1.0:
        raise ValueError(f"height_factor must be > 1: {height_factor!r}")
    kept = filter_by_confidence(dset, conf_threshold)
    if not kept.detections:
        return []
    cands = [
        LineCandidate(d, norm_to_rect(d.box, dset.image_w, dset.image_h))
        for d in kept.detections
    ]
    cands.sort(key=lambda c: (c.rect.center_y, c.rect.x))
    median_h = statistics.median(c.rect.h for c in cands)
    max_conf = max(c.detection.confidence for c in cands)
    out = []
    for i, c in enumerate(cands):
        unusual = (
            c.rect.h > height_factor * median_h
            and c.detection.confidence < high_conf
            and c.detection.confidence < max_conf
            and any(
                overlaps(c.rect, o.rect, overlap_frac, of="smaller")
                for j, o in enumerate(cands)
                if j != i
            )
        )
        if not unusual:
            out.append(c)
    return out


def _rect_of(d: Detection, w: int, h: int) -> PixelRect:
    return norm_to_rect(d.box, w, h)


def select_final_line(dset: DetectionSet, line_img_w: int, line_img_h: int) -> FinalLineDecision:
    """Pick the crop decision from pass-2 detections, by detection count.

    0 boxes: keep whole. 1 box: crop unless narrower than 40% of the
    image. 2 boxes: the widest if it reaches half the image width, else
    the most confident. 3 boxes: the middle one by center-y. More: the
    widest. Ties fall back to confidence, then smaller center-y.
    """
    if line_img_w < 1 or line_img_h < 1:
        raise ValueError(f"line image dims must be >= 1: {line_img_w}x{line_img_h}")
    rects = [_rect_of(d, line_img_w, line_img_h) for d in dset.detections]
    n = len(rects)
    if n == 0:
        return FinalLineDecision(None, "rule0-empty")

    def widest_first(i: int):
        return (-rects[i].w, -dset.detections[i].confidence, rects[i].center_y, i)

    def confident_first(i: int):
        return (-dset.detections[i].confidence, rects[i].center_y, i)

    if n == 1:
        if rects[0].w < 0.4 * line_img_w:
            return FinalLineDecision(None, "rule1-narrow")
        return FinalLineDecision(rects[0], "rule1-crop")
    if n == 2:
        if max(r.w for r in rects) >= 0.5 * line_img_w:
            pick = min(range(2), key=widest_first)
            return FinalLineDecision(rects[pick], "rule2-widest")
        pick = min(range(2), key=confident_first)
        return FinalLineDecision(rects[pick], "rule2-confidence")
    if n == 3:
        order = sorted(range(3), key=lambda i: (rects[i].center_y, i))
        return FinalLineDecision(rects[order[1]], "rule3-middle")
    pick = min(range(n), key=widest_first)
    return FinalLineDecision(rects[pick], "rule4-widest")
