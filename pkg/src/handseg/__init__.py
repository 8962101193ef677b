"""Segmentation pipeline and evaluation toolkit for handwritten pages.

Detection-driven line and word segmentation with Hough-based skew
correction, annotation export in YOLO and VOC formats, one-to-one match
evaluation, and a synthetic fixture generator with exact ground truth.
"""

from .config import ConfigError, PipelineConfig
from .detect import (
    DetectionSet,
    Detector,
    DetectorRole,
    FileDetector,
    MissingPredictionError,
    OracleDetector,
    PredictionFormatError,
    filter_by_confidence,
    load_yolo_predictions,
)
from .geometry import (
    Detection,
    NormBox,
    PixelRect,
    intersection_area,
    norm_to_rect,
    overlaps,
    rect_to_norm,
)
from .metrics import (
    EvalReport,
    SummaryReport,
    compute_metrics,
    format_report_table,
    match_one_to_one,
    report_json,
    report_to_dict,
    summarize,
)
from .pipeline import (
    BatchResult,
    DocumentFailure,
    LineRecord,
    PageSegmentation,
    process_batch,
    process_document,
)
from .raster import (
    BinaryImage,
    GrayImage,
    RotationDirection,
    binarize,
    canny,
    crop,
    dilate3x3,
    read_image,
    rotate_about_center,
    trim_sides,
    upscale_preserve_aspect,
    write_image,
)
from .selection import FinalLineDecision, LineCandidate, filter_first_pass, select_final_line
from .skew import (
    HoughLine,
    HoughSegment,
    SkewEstimate,
    SkewMethod,
    SkewParams,
    VoteCategory,
    VoteOutcome,
    correct_skew,
    dskew_rotation,
    estimate_lskew,
    pht_segments,
    sht_lines,
    vote_dskew,
)
from .synth import (
    SynthLineSpec,
    SynthTruth,
    SyntheticDetector,
    generate_line,
    generate_page,
)
from .words import WordRecord, segment_words
from .annot import evaluate_run, export_manifest, export_voc, export_yolo

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BatchResult",
    "BinaryImage",
    "ConfigError",
    "Detection",
    "DetectionSet",
    "Detector",
    "DetectorRole",
    "DocumentFailure",
    "EvalReport",
    "FileDetector",
    "FinalLineDecision",
    "GrayImage",
    "HoughLine",
    "HoughSegment",
    "LineCandidate",
    "LineRecord",
    "MissingPredictionError",
    "NormBox",
    "OracleDetector",
    "PageSegmentation",
    "PipelineConfig",
    "PixelRect",
    "PredictionFormatError",
    "RotationDirection",
    "SkewEstimate",
    "SkewMethod",
    "SkewParams",
    "SummaryReport",
    "SynthLineSpec",
    "SynthTruth",
    "SyntheticDetector",
    "VoteCategory",
    "VoteOutcome",
    "WordRecord",
    "binarize",
    "canny",
    "compute_metrics",
    "correct_skew",
    "crop",
    "dilate3x3",
    "dskew_rotation",
    "estimate_lskew",
    "evaluate_run",
    "export_manifest",
    "export_voc",
    "export_yolo",
    "filter_by_confidence",
    "filter_first_pass",
    "format_report_table",
    "generate_line",
    "generate_page",
    "intersection_area",
    "load_yolo_predictions",
    "match_one_to_one",
    "norm_to_rect",
    "overlaps",
    "pht_segments",
    "process_batch",
    "process_document",
    "read_image",
    "rect_to_norm",
    "report_json",
    "report_to_dict",
    "rotate_about_center",
    "segment_words",
    "select_final_line",
    "sht_lines",
    "summarize",
    "trim_sides",
    "upscale_preserve_aspect",
    "vote_dskew",
    "write_image",
]
