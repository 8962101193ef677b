"""Synthetic line/page generator with exact ground truth.

Generated "words" are abstract matra blobs: a 3 px horizontal headstroke
with a few short vertical descenders hanging off it. That is all the
structure the Hough estimators care about, and it keeps the truth exact:
every word is also rendered on its own isolated layer, so after any
rotation the axis-aligned ink hull of each word is known to the pixel.

Words are placed far enough apart that bilinear interpolation never
mixes ink from two words, which makes the composite image's ink exactly
the union of the layers' ink. All randomness comes from a generator
seeded by the spec, so identical specs give bit-identical outputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .detect import DetectionSet, Detector, DetectorRole, MissingPredictionError
from .geometry import Detection, NormBox, PixelRect, rect_to_norm
from .raster import GrayImage, RotationDirection, crop, rotate_about_center, trim_sides
from .skew import SkewEstimate, SkewMethod

__all__ = [
    "SynthLineSpec",
    "WordGeometry",
    "LineGeometry",
    "SynthTruth",
    "generate_line",
    "generate_page",
    "SyntheticDetector",
    "inject_detection",
    "spanning_detection",
    "ink_hull",
    "word_truth_in_final_frame",
]

MAX_PAGE_DIM = 8192


@dataclass(frozen=True)
class SynthLineSpec:
    """Recipe for one synthetic line; identical specs render identically."""

    skew_deg: float
    n_words: int
    word_len_range: tuple[int, int] = (40, 90)
    height: int = 64
    seed: int = 0

    def __post_init__(self) -> None:
        if not -40.0 <= self.skew_deg <= 40.0:
            raise ValueError(f"skew out of [-40, 40]: {self.skew_deg!r}")
        if self.n_words < 1:
            raise ValueError(f"n_words must be >= 1: {self.n_words}")
        lo, hi = self.word_len_range
        if lo > hi or lo < 1:
            raise ValueError(f"bad word_len_range: {self.word_len_range!r}")
        if self.height < 8:
            raise ValueError(f"height too small to fit strokes: {self.height}")


@dataclass(frozen=True)
class WordGeometry:
    """One word's strokes (unrotated frame) and ink hull (rotated frame)."""

    strokes: tuple[PixelRect, ...]
    hull: PixelRect


@dataclass(frozen=True)
class LineGeometry:
    """Provenance of one generated line, enough to replay its transforms."""

    skew_deg: float
    unrot_w: int
    unrot_h: int
    rot_w: int
    rot_h: int
    words: tuple[WordGeometry, ...]
    hull: PixelRect  # rotated-line frame
    offset: tuple[int, int]  # placement of the rotated canvas on the page


@dataclass
class SynthTruth:
    """Ground truth for a generated image plus recorded detector answers.

    detection_sets starts with the pass-1 answer and grows as the
    synthetic detector analyzes derived images (pass-2 crops, word
    queries); keys are derived image ids.
    """

    image_id: str
    image_w: int
    image_h: int
    skew_deg: float | None
    line_boxes: list[tuple[int, NormBox]] = field(default_factory=list)
    word_boxes: list[tuple[int, NormBox]] = field(default_factory=list)
    lines: list[LineGeometry] = field(default_factory=list)
    detection_sets: dict[str, DetectionSet] = field(default_factory=dict)


_MATRA_THICKNESS = 3


def _draw(px: np.ndarray, rect: PixelRect) -> None:
    px[rect.y : rect.y + rect.h, rect.x : rect.x + rect.w] = 0


def ink_hull(img: GrayImage) -> PixelRect | None:
    """Bounding box of all non-white pixels, or None for a blank image."""
    ys, xs = np.nonzero(img.px < 255)
    if xs.size == 0:
        return None
    x0, x1 = int(xs.min()), int(xs.max())
    y0, y1 = int(ys.min()), int(ys.max())
    return PixelRect(x0, y0, x1 - x0 + 1, y1 - y0 + 1)


def _plan_words(spec: SynthLineSpec, rng: np.random.Generator) -> tuple[int, list[list[PixelRect]]]:
    """Lay out stroke rects per word on the unrotated canvas; returns (width, words)."""
    h = spec.height
    margin = max(4, h // 8)
    matra_y = max(1, round(0.18 * h))
    desc_w = max(2, round(0.05 * h))
    desc_top = matra_y + _MATRA_THICKNESS
    desc_max = h - desc_top - max(1, h // 10)
    desc_min = max(2, desc_max // 2)
    if desc_max < 2 or matra_y + _MATRA_THICKNESS >= h:
        raise ValueError(f"height {h} cannot fit matra and descenders")
    lo, hi = spec.word_len_range
    if lo < desc_w + 5:
        raise ValueError(f"word_len_range lower bound {lo} too small for descenders")
    gap_lo = max(3, round(0.20 * h))
    gap_hi = max(gap_lo + 1, round(0.45 * h))
    x = margin
    words: list[list[PixelRect]] = []
    for i in range(spec.n_words):
        if i > 0:
            x += int(rng.integers(gap_lo, gap_hi + 1))
        length = int(rng.integers(lo, hi + 1))
        strokes = [PixelRect(x, matra_y, length, _MATRA_THICKNESS)]
        k = int(rng.integers(2, 6))
        offs = rng.choice(length - desc_w + 1, size=min(k, length - desc_w + 1), replace=False)
        for off in sorted(int(o) for o in offs):
            dlen = int(rng.integers(desc_min, desc_max + 1))
            strokes.append(PixelRect(x + off, desc_top, desc_w, dlen))
        words.append(strokes)
        x += length
    return x + margin, words


def _render_line(spec: SynthLineSpec, rng: np.random.Generator) -> tuple[GrayImage, LineGeometry]:
    width, stroke_sets = _plan_words(spec, rng)
    h = spec.height
    composite = np.full((h, width), 255, dtype=np.uint8)
    layers = []
    for strokes in stroke_sets:
        layer = np.full((h, width), 255, dtype=np.uint8)
        for r in strokes:
            _draw(layer, r)
            _draw(composite, r)
        layers.append(layer)

    if spec.skew_deg == 0.0:
        rot = GrayImage(composite)
        rot_layers = [GrayImage(l) for l in layers]
    else:
        direction = (
            RotationDirection.CLOCKWISE
            if spec.skew_deg > 0
            else RotationDirection.ANTICLOCKWISE
        )
        mag = abs(spec.skew_deg)
        rot = rotate_about_center(GrayImage(composite), mag, direction)
        rot_layers = [rotate_about_center(GrayImage(l), mag, direction) for l in layers]

    word_geoms = []
    for strokes, layer in zip(stroke_sets, rot_layers):
        hull = ink_hull(layer)
        if hull is None:
            raise ValueError("word rendered no ink")
        word_geoms.append(WordGeometry(tuple(strokes), hull))
    hx0 = min(g.hull.x for g in word_geoms)
    hy0 = min(g.hull.y for g in word_geoms)
    hx1 = max(g.hull.right for g in word_geoms)
    hy1 = max(g.hull.bottom for g in word_geoms)
    geom = LineGeometry(
        skew_deg=spec.skew_deg,
        unrot_w=width,
        unrot_h=h,
        rot_w=rot.width,
        rot_h=rot.height,
        words=tuple(word_geoms),
        hull=PixelRect(hx0, hy0, hx1 - hx0, hy1 - hy0),
        offset=(0, 0),
    )
    return rot, geom


def generate_line(spec: SynthLineSpec, image_id: str = "line") -> tuple[GrayImage, SynthTruth]:
    """Render one line image plus exact truth.

    The truth carries the line hull and per-word hulls (rotated frame,
    normalized) and detector answers for the line image itself and for
    `{image_id}#words`.
    """
    rng = np.random.default_rng(spec.seed)
    img, geom = _render_line(spec, rng)
    truth = SynthTruth(image_id, img.width, img.height, spec.skew_deg)
    truth.lines.append(geom)
    truth.line_boxes.append((0, rect_to_norm(geom.hull, img.width, img.height)))
    line_set = DetectionSet(
        image_id,
        img.width,
        img.height,
        (Detection(0, truth.line_boxes[0][1], 1.0),),
    )
    word_dets = []
    for g in geom.words:
        box = rect_to_norm(g.hull, img.width, img.height)
        truth.word_boxes.append((0, box))
        word_dets.append(Detection(0, box, 1.0))
    truth.detection_sets[image_id] = line_set
    truth.detection_sets[f"{image_id}#words"] = DetectionSet(
        f"{image_id}#words", img.width, img.height, tuple(word_dets)
    )
    return img, truth


def generate_page(
    n_lines: int,
    skews: list[float],
    seed: int,
    *,
    image_id: str = "page",
    height: int = 64,
    n_words_range: tuple[int, int] = (3, 7),
    word_len_range: tuple[int, int] = (40, 90),
) -> tuple[GrayImage, SynthTruth]:
    """Stack generated lines onto one page with wide vertical gaps.

    Gaps are at least half the line height so line hulls never interact.
    The truth records page-frame line and word boxes, per-line geometry,
    and the pass-1 detector answer under `image_id`.
    """
    if n_lines < 1:
        raise ValueError(f"n_lines must be >= 1: {n_lines}")
    if len(skews) != n_lines:
        raise ValueError(f"got {len(skews)} skews for {n_lines} lines")
    rng = np.random.default_rng(seed)
    line_seeds = [int(s) for s in rng.integers(0, 2**62, size=n_lines)]
    n_words = [int(n) for n in rng.integers(n_words_range[0], n_words_range[1] + 1, size=n_lines)]
    rendered = []
    for i in range(n_lines):
        spec = SynthLineSpec(
            skew_deg=skews[i],
            n_words=n_words[i],
            word_len_range=word_len_range,
            height=height,
            seed=line_seeds[i],
        )
        rendered.append(_render_line(spec, np.random.default_rng(spec.seed)))

    margin = 24
    gaps = [
        int(math.ceil(0.5 * height)) + int(rng.integers(0, round(0.35 * height) + 1))
        for _ in range(n_lines - 1)
    ]
    page_w = 2 * margin + max(img.width for img, _ in rendered)
    page_h = 2 * margin + sum(img.height for img, _ in rendered) + sum(gaps)
    if page_w > MAX_PAGE_DIM or page_h > MAX_PAGE_DIM:
        raise ValueError(f"page {page_w}x{page_h} overflows the canvas limit")
    page = np.full((page_h, page_w), 255, dtype=np.uint8)
    truth = SynthTruth(image_id, page_w, page_h, None)
    dets = []
    y = margin
    for i, (img, geom) in enumerate(rendered):
        slack = page_w - 2 * margin - img.width
        x = margin + (int(rng.integers(0, min(24, slack) + 1)) if slack > 0 else 0)
        region = page[y : y + img.height, x : x + img.width]
        np.minimum(region, img.px, out=region)
        placed = LineGeometry(
            skew_deg=geom.skew_deg,
            unrot_w=geom.unrot_w,
            unrot_h=geom.unrot_h,
            rot_w=geom.rot_w,
            rot_h=geom.rot_h,
            words=geom.words,
            hull=geom.hull,
            offset=(x, y),
        )
        truth.lines.append(placed)
        page_hull = PixelRect(x + geom.hull.x, y + geom.hull.y, geom.hull.w, geom.hull.h)
        box = rect_to_norm(page_hull, page_w, page_h)
        truth.line_boxes.append((0, box))
        dets.append(Detection(0, box, 1.0))
        for g in geom.words:
            wrect = PixelRect(x + g.hull.x, y + g.hull.y, g.hull.w, g.hull.h)
            truth.word_boxes.append((0, rect_to_norm(wrect, page_w, page_h)))
        y += img.height + (gaps[i] if i < n_lines - 1 else 0)
    truth.detection_sets[image_id] = DetectionSet(image_id, page_w, page_h, tuple(dets))
    return GrayImage(page), truth


def _column_clusters(img: GrayImage, gap_min: int) -> list[PixelRect]:
    """Ink hulls of column runs separated by at least gap_min blank columns."""
    mask = img.px < 255
    cols = mask.any(axis=0)
    clusters = []
    start = None
    blank = 0
    for cx in range(img.width + 1):
        inked = cols[cx] if cx < img.width else False
        if inked:
            if start is None:
                start = cx
            elif blank >= gap_min:
                clusters.append((start, prev_end))
                start = cx
            blank = 0
            prev_end = cx
        else:
            if start is not None:
                blank += 1
    if start is not None:
        clusters.append((start, prev_end))
    rects = []
    for c0, c1 in clusters:
        ys = np.nonzero(mask[:, c0 : c1 + 1].any(axis=1))[0]
        rects.append(PixelRect(c0, int(ys.min()), c1 - c0 + 1, int(ys.max()) - int(ys.min()) + 1))
    return rects


class SyntheticDetector(Detector):
    """Detector backed by synthetic truth.

    Pass-1 answers come from the truth recorded at generation time.
    Pass-2 and word answers are measured from the actual image handed in
    (ink hull, column clustering) and memoized into truth.detection_sets
    under the derived image id, so later file exports can reproduce the
    run exactly. Not safe for concurrent sharing; build one per document.
    """

    def __init__(self, role: DetectorRole, truth: SynthTruth):
        super().__init__(role)
        self.truth = truth

    def _detect(self, image: GrayImage, image_id: str) -> DetectionSet:
        stored = self.truth.detection_sets.get(image_id)
        if stored is not None and (stored.image_w, stored.image_h) == (image.width, image.height):
            return stored
        if self.role is DetectorRole.LINE and image_id.endswith("#pass2"):
            hull = ink_hull(image)
            dets = () if hull is None else (
                Detection(0, rect_to_norm(hull, image.width, image.height), 1.0),
            )
        elif self.role is DetectorRole.WORD and image_id.endswith("#words"):
            gap_min = max(3, round(0.1 * image.height))
            dets = tuple(
                Detection(0, rect_to_norm(r, image.width, image.height), 1.0)
                for r in _column_clusters(image, gap_min)
            )
        else:
            raise MissingPredictionError(f"no synthetic answer for image id {image_id!r}")
        result = DetectionSet(image_id, image.width, image.height, dets)
        self.truth.detection_sets[image_id] = result
        return result


def inject_detection(
    truth: SynthTruth, image_id: str, detection: Detection, index: int | None = None
) -> None:
    """Insert an extra detection into a recorded answer (test fixtures)."""
    ds = truth.detection_sets[image_id]
    dets = list(ds.detections)
    dets.insert(len(dets) if index is None else index, detection)
    truth.detection_sets[image_id] = DetectionSet(
        ds.image_id, ds.image_w, ds.image_h, tuple(dets)
    )


def spanning_detection(
    truth: SynthTruth, line_indices: list[int], confidence: float = 0.35
) -> Detection:
    """A box spanning several truth lines in the page frame (0-based indices)."""
    rects = []
    for i in line_indices:
        g = truth.lines[i]
        rects.append(PixelRect(g.offset[0] + g.hull.x, g.offset[1] + g.hull.y, g.hull.w, g.hull.h))
    x0 = min(r.x for r in rects)
    y0 = min(r.y for r in rects)
    x1 = max(r.right for r in rects)
    y1 = max(r.bottom for r in rects)
    box = rect_to_norm(PixelRect(x0, y0, x1 - x0, y1 - y0), truth.image_w, truth.image_h)
    return Detection(0, box, confidence)


def word_truth_in_final_frame(
    truth: SynthTruth,
    line_index: int,
    page_rect: PixelRect,
    estimate: SkewEstimate,
    trim_fraction: float,
    final_rect: PixelRect | None,
) -> list[PixelRect]:
    """Replay one line's pipeline transforms on each isolated word layer.

    Returns the exact ink hull of every word in the final-line frame
    (words whose ink was cropped away entirely are dropped). The caller
    supplies the transforms actually taken: the pass-1 crop rect, the
    skew estimate, the trim fraction, and the pass-2 crop.
    """
    g = truth.lines[line_index]
    ox, oy = g.offset
    hulls: list[PixelRect] = []
    for word in g.words:
        # rebuild this word's isolated layer restricted to the crop rect
        layer = np.full((page_rect.h, page_rect.w), 255, dtype=np.uint8)
        strokes_img = np.full((g.unrot_h, g.unrot_w), 255, dtype=np.uint8)
        for r in word.strokes:
            _draw(strokes_img, r)
        if g.skew_deg == 0.0:
            rot = GrayImage(strokes_img)
        else:
            direction = (
                RotationDirection.CLOCKWISE
                if g.skew_deg > 0
                else RotationDirection.ANTICLOCKWISE
            )
            rot = rotate_about_center(GrayImage(strokes_img), abs(g.skew_deg), direction)
        # paste at page offset, then take the page_rect window
        x0 = max(page_rect.x, ox)
        y0 = max(page_rect.y, oy)
        x1 = min(page_rect.x + page_rect.w, ox + rot.width)
        y1 = min(page_rect.y + page_rect.h, oy + rot.height)
        if x1 > x0 and y1 > y0:
            layer[y0 - page_rect.y : y1 - page_rect.y, x0 - page_rect.x : x1 - page_rect.x] = (
                rot.px[y0 - oy : y1 - oy, x0 - ox : x1 - ox]
            )
        img = GrayImage(layer)
        if estimate.applied:
            img = rotate_about_center(img, abs(estimate.theta_avg), estimate.direction)
        if estimate.method is SkewMethod.DSKEW:
            img = trim_sides(img, trim_fraction)
        if final_rect is not None:
            img = crop(img, final_rect)
        hull = ink_hull(img)
        if hull is not None:
            hulls.append(hull)
    return hulls
