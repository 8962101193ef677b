"""Skew estimation and correction for cropped text-line images.

Two estimators share one preprocessing chain (binarize, 3x3 dilation,
Canny). LSkew runs a standard rho-theta Hough accumulator restricted to
near-horizontal angles and averages the surviving cells. When that finds
nothing the line is usually tiny, so DSkew upscales it, extracts segments
with a progressive probabilistic Hough transform, and votes the segments
into six categories to pick the correction.

Angle conventions, with y growing downward: an SHT line at theta degrees
corresponds to signed skew s = theta - 90; positive s means the text
descends to the right and is corrected by an anticlockwise turn, negative
s by a clockwise turn. Segment degrees are atan2(dy, dx) of the
endpoints, in [-90, 90].
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .raster import (
    BinaryImage,
    GrayImage,
    RotationDirection,
    binarize,
    canny,
    dilate3x3,
    mask_to_gray,
    rotate_about_center,
    upscale_preserve_aspect,
)

__all__ = [
    "HoughLine",
    "HoughSegment",
    "SkewMethod",
    "SkewEstimate",
    "VoteCategory",
    "VoteOutcome",
    "SkewParams",
    "preprocess_for_hough",
    "sht_lines",
    "estimate_lskew",
    "pht_segments",
    "vote_dskew",
    "dskew_rotation",
    "correct_skew",
]


@dataclass(frozen=True)
class HoughLine:
    """A line in rho-theta form: rho = x*cos(theta) + y*sin(theta)."""

    rho: float
    theta: float  # degrees in [0, 180)


@dataclass(frozen=True)
class HoughSegment:
    """A detected segment with its inclination in degrees.

    Endpoints are ordered so x1 <= x2 (ties broken by y), which keeps
    degree in [-90, 90]: vertical segments carry +90, horizontal 0.
    """

    x1: float
    y1: float
    x2: float
    y2: float
    degree: float

    @classmethod
    def from_endpoints(cls, xa: float, ya: float, xb: float, yb: float) -> "HoughSegment":
        if (xb, yb) < (xa, ya):
            xa, ya, xb, yb = xb, yb, xa, ya
        dx = xb - xa
        dy = yb - ya
        if dx == 0 and dy == 0:
            raise ValueError("segment endpoints coincide")
        degree = 90.0 if dx == 0 else math.degrees(math.atan2(dy, dx))
        return cls(xa, ya, xb, yb, degree)


class SkewMethod(enum.Enum):
    LSKEW = "lskew"
    DSKEW = "dskew"
    NONE = "none"


@dataclass(frozen=True)
class SkewEstimate:
    method: SkewMethod
    theta_avg: float
    degree_avg: float | None
    direction: RotationDirection | None
    applied: bool


class VoteCategory(enum.Enum):
    VERTICAL = "vertical"
    STRAIGHT = "straight"
    POSITIVE_SKEW = "positive"
    NEGATIVE_SKEW = "negative"


@dataclass(frozen=True)
class VoteOutcome:
    category: VoteCategory
    degree_avg: float
    bucket_counts: tuple[int, int, int, int, int, int]


@dataclass(frozen=True)
class SkewParams:
    """Knobs shared by the two estimators; defaults match the pipeline."""

    theta_window_deg: float = 45.0
    lskew_threshold_frac: float = 0.25
    canny_low: float = 50.0
    canny_high: float = 150.0
    dskew_height: int = 128
    pht_min_len_frac: float = 0.15
    pht_max_gap: int = 10
    pht_vote_threshold: int = 30
    pht_seed: int = 0x5EED


def preprocess_for_hough(img: GrayImage, low: float = 50.0, high: float = 150.0) -> BinaryImage:
    """binarize -> dilate3x3 -> canny, the shared Hough input chain."""
    return canny(mask_to_gray(dilate3x3(binarize(img))), low, high)


def sht_lines(
    edges: BinaryImage,
    theta_window_deg: float = 45.0,
    accumulator_threshold_frac: float = 0.25,
) -> list[HoughLine]:
    """Standard Hough over near-horizontal angles.

    The accumulator spans theta in [90 - window, 90 + window] at 1 degree
    and rho at 1 px. Cells that are 3x3-neighborhood maxima with at least
    threshold_frac * image_width votes come back as lines; an empty edge
    image (or nothing above threshold) gives an empty list.
    """
    if not 0.0 < theta_window_deg <= 45.0:
        raise ValueError(f"theta window out of (0, 45]: {theta_window_deg!r}")
    if not 0.0 < accumulator_threshold_frac <= 1.0:
        raise ValueError(f"threshold frac out of (0, 1]: {accumulator_threshold_frac!r}")
    ys, xs = np.nonzero(edges.px)
    if xs.size == 0:
        return []
    h, w = edges.px.shape
    t_lo = int(math.ceil(90.0 - theta_window_deg))
    t_hi = int(math.floor(90.0 + theta_window_deg))
    thetas = np.arange(t_lo, t_hi + 1, dtype=np.float64)
    diag = int(math.ceil(math.hypot(w, h)))
    nbins = 2 * diag + 1
    acc = np.zeros((thetas.size, nbins), dtype=np.int64)
    rad = np.deg2rad(thetas)
    for i in range(thetas.size):
        rho = np.rint(xs * math.cos(rad[i]) + ys * math.sin(rad[i])).astype(np.int64)
        acc[i] = np.bincount(rho + diag, minlength=nbins)
    thr = accumulator_threshold_frac * w
    padded = np.pad(acc, 1, constant_values=-1)
    is_max = np.ones(acc.shape, dtype=bool)
    for dt in (-1, 0, 1):
        for dr in (-1, 0, 1):
            if dt == 0 and dr == 0:
                continue
            is_max &= acc >= padded[1 + dt : 1 + dt + acc.shape[0], 1 + dr : 1 + dr + acc.shape[1]]
    hits = np.argwhere(is_max & (acc >= thr))
    return [HoughLine(float(r - diag), float(thetas[t])) for t, r in hits]


def estimate_lskew(
    line_img: GrayImage,
    *,
    theta_window_deg: float = 45.0,
    threshold_frac: float = 0.25,
    canny_low: float = 50.0,
    canny_high: float = 150.0,
) -> SkewEstimate | None:
    """LSkew estimate, or None when SHT finds no lines.

    theta_avg is the mean detected theta minus 90, i.e. the signed skew.
    """
    edges = preprocess_for_hough(line_img, canny_low, canny_high)
    lines = sht_lines(edges, theta_window_deg, threshold_frac)
    if not lines:
        return None
    theta = sum(l.theta for l in lines) / len(lines) - 90.0
    return SkewEstimate(SkewMethod.LSKEW, theta, None, _direction_for(theta), False)


def _direction_for(theta: float) -> RotationDirection:
    # negative skew rotates clockwise, positive (and zero) anticlockwise
    return RotationDirection.CLOCKWISE if theta < 0 else RotationDirection.ANTICLOCKWISE


def pht_segments(
    edges: BinaryImage,
    min_len_frac: float = 0.15,
    max_gap: int = 10,
    *,
    vote_threshold: int = 30,
    seed: int = 0x5EED,
) -> list[HoughSegment]:
    """Progressive probabilistic Hough segment extraction.

    Edge pixels vote in random order (own generator, fixed seed, so runs
    are bit-identical). When a pixel pushes some theta past
    vote_threshold, the line through it is walked in both directions over
    the remaining edge pixels, bridging gaps up to max_gap. Walked pixels
    are consumed either way; segments at least min_len_frac * image_width
    long are returned.
    """
    if not 0.0 < min_len_frac <= 1.0:
        raise ValueError(f"min_len_frac out of (0, 1]: {min_len_frac!r}")
    if max_gap < 0:
        raise ValueError(f"max_gap must be >= 0: {max_gap}")
    if vote_threshold < 1:
        raise ValueError(f"vote_threshold must be >= 1: {vote_threshold}")
    h, w = edges.px.shape
    ys, xs = np.nonzero(edges.px)
    if xs.size == 0:
        return []
    min_len = min_len_frac * w
    rng = np.random.default_rng(seed)
    order = rng.permutation(xs.size)
    rad = np.deg2rad(np.arange(180, dtype=np.float64))
    cos_t = np.cos(rad)
    sin_t = np.sin(rad)
    tidx = np.arange(180)
    diag = int(math.ceil(math.hypot(w, h)))
    acc = np.zeros((180, 2 * diag + 1), dtype=np.int32)
    alive = edges.px.copy()
    voted = np.zeros_like(alive)
    segments: list[HoughSegment] = []

    def walk(x0: int, y0: int, sx: float, sy: float) -> tuple[int, int, list[tuple[int, int]]]:
        end = (x0, y0)
        hits: list[tuple[int, int]] = []
        gap = 0
        i = 1
        while True:
            ix = int(round(x0 + i * sx))
            iy = int(round(y0 + i * sy))
            if not (0 <= ix < w and 0 <= iy < h):
                break
            if alive[iy, ix]:
                gap = 0
                end = (ix, iy)
                hits.append((ix, iy))
            else:
                gap += 1
                if gap > max_gap:
                    break
            i += 1
        return end[0], end[1], hits

    for oi in order:
        x = int(xs[oi])
        y = int(ys[oi])
        if not alive[y, x]:
            continue
        rhos = np.rint(x * cos_t + y * sin_t).astype(np.int64) + diag
        acc[tidx, rhos] += 1
        voted[y, x] = True
        votes = acc[tidx, rhos]
        t_best = int(np.argmax(votes))  # first max: lowest theta wins ties
        if votes[t_best] < vote_threshold:
            continue
        # direction along the line whose normal is at t_best degrees
        dx = -sin_t[t_best]
        dy = cos_t[t_best]
        if abs(dx) >= abs(dy):
            sx, sy = math.copysign(1.0, dx), dy / abs(dx)
        else:
            sx, sy = dx / abs(dy), math.copysign(1.0, dy)
        ex1, ey1, hits_f = walk(x, y, sx, sy)
        ex0, ey0, hits_b = walk(x, y, -sx, -sy)
        consumed = hits_f + hits_b + [(x, y)]
        for cx, cy in consumed:
            if voted[cy, cx]:
                r = np.rint(cx * cos_t + cy * sin_t).astype(np.int64) + diag
                acc[tidx, r] -= 1
                voted[cy, cx] = False
            alive[cy, cx] = False
        if math.hypot(ex1 - ex0, ey1 - ey0) >= min_len:
            segments.append(HoughSegment.from_endpoints(ex0, ey0, ex1, ey1))
    return segments


# Voting buckets, tested in order: the two coordinate-equality rows first,
# then the degree ranges, which partition [-90, 90].
_BUCKET_CATEGORY = (
    VoteCategory.VERTICAL,
    VoteCategory.STRAIGHT,
    VoteCategory.POSITIVE_SKEW,  # -45 <= d <= 0
    VoteCategory.NEGATIVE_SKEW,  # -90 <= d < -45
    VoteCategory.NEGATIVE_SKEW,  # 0 < d <= 45
    VoteCategory.POSITIVE_SKEW,  # 45 < d <= 90
)


def _bucket_of(seg: HoughSegment) -> int:
    if seg.x1 == seg.x2:
        return 0
    if seg.y1 == seg.y2:
        return 1
    d = seg.degree
    if -45.0 <= d <= 0.0:
        return 2
    if -90.0 <= d < -45.0:
        return 3
    if 0.0 < d <= 45.0:
        return 4
    if 45.0 < d <= 90.0:
        return 5
    raise ValueError(f"segment degree out of [-90, 90]: {d!r}")


def vote_dskew(segments: list[HoughSegment]) -> VoteOutcome:
    """Six-case vote over segments; the fullest bucket decides.

    Ties prefer the bucket with the smaller mean |degree| (the safer,
    smaller correction); a remaining tie falls back to Straight.
    degree_avg is the mean degree of the winning bucket, with Vertical
    pinned to 90 and Straight to 0.
    """
    if not segments:
        raise ValueError("vote_dskew needs at least one segment")
    buckets: list[list[float]] = [[] for _ in range(6)]
    for seg in segments:
        buckets[_bucket_of(seg)].append(seg.degree)
    counts = tuple(len(b) for b in buckets)
    top = max(counts)
    tied = [i for i in range(6) if counts[i] == top]
    if len(tied) > 1:

        def mean_abs(i: int) -> float:
            if i == 0:
                return 90.0
            if i == 1:
                return 0.0
            return sum(abs(d) for d in buckets[i]) / counts[i]

        best = min(mean_abs(i) for i in tied)
        tied = [i for i in tied if mean_abs(i) == best]
    if len(tied) == 1:
        win = tied[0]
    else:
        return VoteOutcome(VoteCategory.STRAIGHT, 0.0, counts)
    if win == 0:
        return VoteOutcome(VoteCategory.VERTICAL, 90.0, counts)
    if win == 1:
        return VoteOutcome(VoteCategory.STRAIGHT, 0.0, counts)
    avg = sum(buckets[win]) / counts[win]
    return VoteOutcome(_BUCKET_CATEGORY[win], avg, counts)


def dskew_rotation(degree_avg: float) -> tuple[float, RotationDirection]:
    """Map a voted degree average to (signed theta, rotation direction).

    Four cases; the rotation magnitude used downstream is |theta|:
      -45 <= d <= 0  -> theta = d,      Clockwise
      -90 <= d < -45 -> theta = d + 90, Anticlockwise
        0 <  d <= 45 -> theta = d,      Anticlockwise
       45 <  d <= 90 -> theta = d - 90, Clockwise
    """
    if not -90.0 <= degree_avg <= 90.0:
        raise ValueError(f"degree_avg out of [-90, 90]: {degree_avg!r}")
    if -45.0 <= degree_avg <= 0.0:
        return degree_avg, RotationDirection.CLOCKWISE
    if degree_avg < -45.0:
        return degree_avg + 90.0, RotationDirection.ANTICLOCKWISE
    if degree_avg <= 45.0:
        return degree_avg, RotationDirection.ANTICLOCKWISE
    return degree_avg - 90.0, RotationDirection.CLOCKWISE


def _finish(
    img: GrayImage, est: SkewEstimate, min_correction_deg: float
) -> tuple[GrayImage, SkewEstimate]:
    if abs(est.theta_avg) >= min_correction_deg and est.theta_avg != 0.0:
        out = rotate_about_center(img, abs(est.theta_avg), est.direction)
        return out, replace(est, applied=True)
    return img, est


def correct_skew(
    line_img: GrayImage,
    min_correction_deg: float = 1.0,
    params: SkewParams | None = None,
) -> tuple[GrayImage, SkewEstimate]:
    """Estimate and undo the skew of a line image.

    LSkew first; if SHT fails, the DSkew fallback runs on a copy upscaled
    to the working height while any rotation is applied to the original.
    Rotations smaller than min_correction_deg are skipped (applied stays
    False). When even PHT finds nothing the image comes back unchanged
    with method None.
    """
    if min_correction_deg < 0:
        raise ValueError(f"min_correction_deg must be >= 0: {min_correction_deg!r}")
    p = params if params is not None else SkewParams()
    est = estimate_lskew(
        line_img,
        theta_window_deg=p.theta_window_deg,
        threshold_frac=p.lskew_threshold_frac,
        canny_low=p.canny_low,
        canny_high=p.canny_high,
    )
    if est is not None:
        return _finish(line_img, est, min_correction_deg)
    work = line_img
    if line_img.height < p.dskew_height:
        work = upscale_preserve_aspect(line_img, p.dskew_height)
    edges = preprocess_for_hough(work, p.canny_low, p.canny_high)
    segments = pht_segments(
        edges,
        p.pht_min_len_frac,
        p.pht_max_gap,
        vote_threshold=p.pht_vote_threshold,
        seed=p.pht_seed,
    )
    if not segments:
        return line_img, SkewEstimate(SkewMethod.NONE, 0.0, None, None, False)
    outcome = vote_dskew(segments)
    theta, direction = dskew_rotation(outcome.degree_avg)
    est = SkewEstimate(SkewMethod.DSKEW, theta, outcome.degree_avg, direction, False)
    return _finish(line_img, est, min_correction_deg)
