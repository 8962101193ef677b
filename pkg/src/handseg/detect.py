"""Detection sources: YOLO label files and pluggable detector objects.

The pipeline never runs a neural network; detections come from label
files written by an external detector, from ground-truth annotations, or
from the synthetic generator. All three speak the same 5/6-field YOLO
text format: `class cx cy w h [confidence]`, coordinates normalized.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

from .geometry import Detection, NormBox
from .raster import GrayImage

__all__ = [
    "DetectorRole",
    "DetectionSet",
    "PredictionFormatError",
    "MissingPredictionError",
    "load_yolo_predictions",
    "Detector",
    "FileDetector",
    "OracleDetector",
    "filter_by_confidence",
]

# values this far outside [0, 1] are treated as rounding noise and clamped
_TOL = 0.01


class DetectorRole(enum.Enum):
    LINE = "line"
    WORD = "word"


class PredictionFormatError(ValueError):
    """A prediction file exists but a line in it cannot be parsed."""


class MissingPredictionError(FileNotFoundError):
    """A prediction file that should exist does not.

    Distinct from an existing-but-empty file, which is a valid empty
    detection set.
    """


@dataclass(frozen=True)
class DetectionSet:
    """All detections of one image, with the image frame they refer to."""

    image_id: str
    image_w: int
    image_h: int
    detections: tuple[Detection, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.image_w < 1 or self.image_h < 1:
            raise ValueError(f"image dims must be >= 1: {self.image_w}x{self.image_h}")

    def __len__(self) -> int:
        return len(self.detections)


def _clamp_unit(v: float, lo_open: bool) -> float:
    if v < -_TOL or v > 1.0 + _TOL:
        raise ValueError(f"value {v!r} outside [0, 1] beyond tolerance")
    if lo_open and v <= 0.0:
        raise ValueError(f"value {v!r} must be > 0")
    return min(max(v, 0.0), 1.0)


def load_yolo_predictions(path: str | Path, img_w: int, img_h: int) -> DetectionSet:
    """Parse a YOLO label file into a DetectionSet.

    Lines have 5 fields (ground truth, confidence taken as 1.0) or 6
    (predictions). Blank lines are skipped. Values up to 0.01 outside
    [0, 1] are clamped; anything worse, a bad field count, or a
    non-integer class id raises PredictionFormatError naming the file and
    line. A missing file raises MissingPredictionError.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingPredictionError(f"prediction file not found: {path}")
    dets: list[Detection] = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (5, 6):
            raise PredictionFormatError(
                f"{path}:{lineno}: expected 5 or 6 fields, got {len(parts)}"
            )
        try:
            class_id = int(parts[0])
            vals = [float(p) for p in parts[1:]]
            if any(v != v for v in vals):  # NaN
                raise ValueError("NaN field")
            cx = _clamp_unit(vals[0], lo_open=False)
            cy = _clamp_unit(vals[1], lo_open=False)
            w = _clamp_unit(vals[2], lo_open=True)
            h = _clamp_unit(vals[3], lo_open=True)
            conf = _clamp_unit(vals[4], lo_open=False) if len(vals) == 5 else 1.0
            if class_id < 0:
                raise ValueError(f"negative class id {class_id}")
            det = Detection(class_id, NormBox(cx, cy, w, h), conf)
        except ValueError as exc:
            raise PredictionFormatError(f"{path}:{lineno}: {exc}") from None
        dets.append(det)
    return DetectionSet(path.stem, img_w, img_h, tuple(dets))


class Detector:
    """Base detector: answers detection queries for a role it was built for."""

    def __init__(self, role: DetectorRole):
        self.role = role

    def detect(self, role: DetectorRole, image: GrayImage, image_id: str) -> DetectionSet:
        if role is not self.role:
            raise ValueError(f"detector serves {self.role.value!r}, asked for {role.value!r}")
        return self._detect(image, image_id)

    def _detect(self, image: GrayImage, image_id: str) -> DetectionSet:
        raise NotImplementedError


class FileDetector(Detector):
    """Serves predictions from `{pred_dir}/{image_id}.txt` files."""

    def __init__(self, role: DetectorRole, pred_dir: str | Path):
        super().__init__(role)
        self.pred_dir = Path(pred_dir)

    def _detect(self, image: GrayImage, image_id: str) -> DetectionSet:
        path = self.pred_dir / f"{image_id}.txt"
        ds = load_yolo_predictions(path, image.width, image.height)
        # file stem keeps any '#'-derived id intact, but be explicit
        return DetectionSet(image_id, ds.image_w, ds.image_h, ds.detections)


class OracleDetector(FileDetector):
    """FileDetector over ground-truth annotations (5-field, confidence 1.0)."""


def filter_by_confidence(dset: DetectionSet, threshold: float) -> DetectionSet:
    """Keep detections with confidence >= threshold, order preserved."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold out of [0, 1]: {threshold!r}")
    kept = tuple(d for d in dset.detections if d.confidence >= threshold)
    return DetectionSet(dset.image_id, dset.image_w, dset.image_h, kept)
