"""Word detection on final line images, left-to-right ordering, indexing."""
from __future__ import annotations

from dataclasses import dataclass

from .detect import Detector, DetectorRole, filter_by_confidence
from .geometry import PixelRect, norm_to_rect
from .raster import GrayImage

__all__ = ["WordRecord", "segment_words"]


@dataclass(frozen=True)
class WordRecord:
    """The i-th word of a line: 1-based index, rect, confidence."""

    index: int
    rect: PixelRect
    confidence: float


def segment_words(
    final_line: GrayImage,
    detector: Detector,
    conf_threshold: float = 0.4,
    line_id: str = "",
) -> list[WordRecord]:
    """Detect words on a final line and index them left to right.

    Sort key is ascending center-x; ties fall through center-y, x, y,
    width, height and descending confidence, so the output never depends
    on the detector's output order.
    """
    dset = detector.detect(DetectorRole.WORD, final_line, line_id)
    kept = filter_by_confidence(dset, conf_threshold)
    entries = [
        (norm_to_rect(d.box, final_line.width, final_line.height), d.confidence)
        for d in kept.detections
    ]
    entries.sort(
        key=lambda e: (e[0].center_x, e[0].center_y, e[0].x, e[0].y, e[0].w, e[0].h, -e[1])
    )
    return [WordRecord(i, rect, conf) for i, (rect, conf) in enumerate(entries, start=1)]
