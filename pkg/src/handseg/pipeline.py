"""Document-level orchestration.

One document flows through: first-pass line detection, candidate filtering,
per-line crop, skew correction, side trim (deskewed lines only), second-pass
detection inside the corrected crop, final-region selection, then word
detection and ordering. Everything downstream (exports, evaluation) consumes
the PageSegmentation produced here.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .config import PipelineConfig
from .detect import Detector, DetectorRole, filter_by_confidence
from .geometry import PixelRect
from .raster import GrayImage, crop, read_image, trim_sides
from .selection import FinalLineDecision, filter_first_pass, select_final_line
from .skew import SkewEstimate, SkewMethod, correct_skew
from .words import WordRecord, segment_words

__all__ = [
    "LineRecord",
    "PageSegmentation",
    "DocumentFailure",
    "BatchResult",
    "process_document",
    "process_batch",
]


@dataclass(frozen=True)
class LineRecord:
    """One segmented line with full provenance.

    page_rect is the first-pass crop in page coordinates. final_rect (when
    not None) is the selected region in the corrected, trimmed line frame;
    None means the whole frame was kept. final_w/final_h are the dimensions
    of the image the words were detected in, and trim_px the pixels removed
    from each side before second-pass detection.
    """

    index: int
    page_rect: PixelRect
    pass1_confidence: float
    skew: SkewEstimate
    trim_px: int
    decision: FinalLineDecision
    final_w: int
    final_h: int
    words: tuple[WordRecord, ...]

    @property
    def final_rect(self) -> PixelRect | None:
        return self.decision.rect

    @property
    def rotated(self) -> bool:
        return self.skew.applied


@dataclass(frozen=True)
class PageSegmentation:
    image_id: str
    image_w: int
    image_h: int
    lines: tuple[LineRecord, ...]
    config_fingerprint: str


def process_document(
    image: GrayImage,
    image_id: str,
    line_detector: Detector,
    word_detector: Detector,
    config: PipelineConfig | None = None,
) -> PageSegmentation:
    """Run the full pipeline on one page image.

    Derived image ids are deterministic: the second-pass crop of line i is
    detected under "{image_id}#line{i}#pass2" and its words under
    "{image_id}#line{i}#words", with i counting from 1 top to bottom.
    """
    cfg = config or PipelineConfig()
    cfg.validate()

    pass1 = line_detector.detect(DetectorRole.LINE, image, image_id)
    candidates = filter_first_pass(
        pass1,
        conf_threshold=cfg.conf_line_pass1,
        height_factor=cfg.height_factor,
        overlap_frac=cfg.overlap_frac,
        high_conf=cfg.high_conf,
    )

    records = []
    for i, cand in enumerate(candidates, start=1):
        line_img = crop(image, cand.rect)
        corrected, estimate = correct_skew(
            line_img,
            min_correction_deg=cfg.min_correction_deg,
            params=cfg.skew_params(),
        )

        trim_px = 0
        working = corrected
        if estimate.method is SkewMethod.DSKEW:
            trim_px = math.floor(cfg.trim_fraction * corrected.width)
            working = trim_sides(corrected, cfg.trim_fraction)

        pass2 = line_detector.detect(
            DetectorRole.LINE, working, f"{image_id}#line{i}#pass2"
        )
        pass2 = filter_by_confidence(pass2, cfg.conf_line_pass2)
        decision = select_final_line(pass2, working.width, working.height)
        final_img = working if decision.keep_whole else crop(working, decision.rect)

        words = segment_words(
            final_img,
            word_detector,
            conf_threshold=cfg.conf_word,
            line_id=f"{image_id}#line{i}#words",
        )

        records.append(
            LineRecord(
                index=i,
                page_rect=cand.rect,
                pass1_confidence=cand.detection.confidence,
                skew=estimate,
                trim_px=trim_px,
                decision=decision,
                final_w=final_img.width,
                final_h=final_img.height,
                words=tuple(words),
            )
        )

    return PageSegmentation(
        image_id=image_id,
        image_w=image.width,
        image_h=image.height,
        lines=tuple(records),
        config_fingerprint=cfg.fingerprint(),
    )


@dataclass(frozen=True)
class DocumentFailure:
    image_id: str
    message: str


@dataclass(frozen=True)
class BatchResult:
    pages: tuple[PageSegmentation, ...]
    failures: tuple[DocumentFailure, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def process_batch(
    tasks: Sequence[tuple[Path, str]] | Iterable[tuple[Path, str]],
    line_detector: Detector,
    word_detector: Detector,
    config: PipelineConfig | None = None,
    *,
    jobs: int | None = None,
    on_done: Callable[[str, bool], None] | None = None,
) -> BatchResult:
    """Segment many (image_path, image_id) tasks, a thread per document.

    One document failing never aborts the batch; the failure is recorded
    and the rest proceed. Resulting pages come back in task order.
    """
    tasks = list(tasks)
    cfg = config or PipelineConfig()
    cfg.validate()

    def run_one(task: tuple[Path, str]) -> PageSegmentation:
        path, image_id = task
        img = read_image(path)
        return process_document(img, image_id, line_detector, word_detector, cfg)

    pages: list[PageSegmentation] = []
    failures: list[DocumentFailure] = []
    workers = jobs if jobs and jobs > 0 else min(8, max(1, len(tasks)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [(image_id, pool.submit(run_one, (path, image_id))) for path, image_id in tasks]
        for image_id, fut in futures:
            try:
                pages.append(fut.result())
                if on_done:
                    on_done(image_id, True)
            except Exception as exc:
                failures.append(DocumentFailure(image_id, f"{type(exc).__name__}: {exc}"))
                if on_done:
                    on_done(image_id, False)
    return BatchResult(tuple(pages), tuple(failures))
