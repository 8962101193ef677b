"""Box geometry shared by detection, selection and evaluation code.

Two box representations are used throughout: normalized center-format
boxes (as found in YOLO label files) and integer pixel rectangles.
Conversions round half away from zero and clamp to the image so a
parsed detection always lands on at least one pixel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "NormBox",
    "PixelRect",
    "Detection",
    "round_half_away",
    "norm_to_rect",
    "rect_to_norm",
    "intersection_area",
    "overlaps",
]


def round_half_away(v: float) -> int:
    """Round to nearest integer, halves away from zero (2.5 -> 3, -2.5 -> -3)."""
    return int(math.floor(v + 0.5)) if v >= 0 else int(math.ceil(v - 0.5))


@dataclass(frozen=True)
class NormBox:
    """Center-format box with all fields normalized to [0, 1]."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self) -> None:
        for name in ("cx", "cy"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"NormBox.{name} out of [0, 1]: {v!r}")
        for name in ("w", "h"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"NormBox.{name} out of (0, 1]: {v!r}")


@dataclass(frozen=True)
class PixelRect:
    """Axis-aligned rectangle in pixel coordinates, top-left origin."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self) -> None:
        if self.x < 0 or self.y < 0:
            raise ValueError(f"PixelRect corner must be >= 0: ({self.x}, {self.y})")
        if self.w < 1 or self.h < 1:
            raise ValueError(f"PixelRect sides must be >= 1: ({self.w}, {self.h})")

    @property
    def right(self) -> int:
        """One past the last column covered."""
        return self.x + self.w

    @property
    def bottom(self) -> int:
        """One past the last row covered."""
        return self.y + self.h

    @property
    def area(self) -> int:
        return self.w * self.h

    @property
    def center_x(self) -> float:
        return self.x + self.w / 2.0

    @property
    def center_y(self) -> float:
        return self.y + self.h / 2.0


@dataclass(frozen=True)
class Detection:
    """One detector output: a class id, a normalized box and a confidence."""

    class_id: int
    box: NormBox
    confidence: float

    def __post_init__(self) -> None:
        if self.class_id < 0:
            raise ValueError(f"class_id must be >= 0: {self.class_id}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence out of [0, 1]: {self.confidence!r}")


def norm_to_rect(box: NormBox, img_w: int, img_h: int) -> PixelRect:
    """Convert a normalized box to a pixel rect clamped inside the image.

    Corners are computed at full float precision, rounded half away from
    zero, then clamped so the rect covers at least one pixel of the image
    even for boxes that poke past an edge.
    """
    if img_w < 1 or img_h < 1:
        raise ValueError(f"image dims must be >= 1: {img_w}x{img_h}")
    left = round_half_away((box.cx - box.w / 2.0) * img_w)
    top = round_half_away((box.cy - box.h / 2.0) * img_h)
    right = round_half_away((box.cx + box.w / 2.0) * img_w)
    bottom = round_half_away((box.cy + box.h / 2.0) * img_h)
    left = min(max(left, 0), img_w - 1)
    top = min(max(top, 0), img_h - 1)
    right = min(max(right, left + 1), img_w)
    bottom = min(max(bottom, top + 1), img_h)
    return PixelRect(left, top, right - left, bottom - top)


def rect_to_norm(rect: PixelRect, img_w: int, img_h: int) -> NormBox:
    """Convert a pixel rect back to a normalized center-format box."""
    if img_w < 1 or img_h < 1:
        raise ValueError(f"image dims must be >= 1: {img_w}x{img_h}")
    return NormBox(
        cx=(rect.x + rect.w / 2.0) / img_w,
        cy=(rect.y + rect.h / 2.0) / img_h,
        w=rect.w / img_w,
        h=rect.h / img_h,
    )


def intersection_area(a: PixelRect, b: PixelRect) -> int:
    """Area of the overlap between two rects, 0 when disjoint."""
    iw = min(a.right, b.right) - max(a.x, b.x)
    ih = min(a.bottom, b.bottom) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0
    return iw * ih


def overlaps(a: PixelRect, b: PixelRect, frac: float, of: str = "smaller") -> bool:
    """True when the intersection covers at least `frac` of a reference area.

    `of` selects the reference: "smaller", "larger", "first" or "second".
    Touching edges (zero-area intersection) never count as overlap.
    """
    if not 0.0 < frac <= 1.0:
        raise ValueError(f"frac out of (0, 1]: {frac!r}")
    inter = intersection_area(a, b)
    if inter == 0:
        return False
    if of == "smaller":
        ref = min(a.area, b.area)
    elif of == "larger":
        ref = max(a.area, b.area)
    elif of == "first":
        ref = a.area
    elif of == "second":
        ref = b.area
    else:
        raise ValueError(f"unknown reference {of!r}")
    return inter >= frac * ref
