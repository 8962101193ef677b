"""Annotation export (YOLO text, VOC XML, JSON manifest) and run evaluation.

Exports are pure functions of a PageSegmentation, so re-running the pipeline
with the same inputs and config reproduces every output file byte for byte.
Line boxes are written in the page frame. Word boxes live in the final line
frame; for lines that were never rotated they can also be mapped back to the
page frame (the VOC export does), but rotated-line word boxes only make
sense in their own frame and stay in per-line files.
"""
from __future__ import annotations

import json
import logging
import os
import tempfile
import xml.etree.ElementTree as ET
from pathlib import Path

from .config import PipelineConfig
from .detect import load_yolo_predictions
from .geometry import NormBox, PixelRect, rect_to_norm, norm_to_rect
from .metrics import EvalReport, compute_metrics, match_one_to_one
from .pipeline import LineRecord, PageSegmentation

__all__ = [
    "export_yolo",
    "export_voc",
    "export_manifest",
    "evaluate_run",
    "yolo_box_line",
]

log = logging.getLogger(__name__)

# Normalized coordinates carry no pixel frame, so directory-level evaluation
# rasterizes both sides into one large nominal frame before matching.
EVAL_FRAME = 10000


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def yolo_box_line(class_id: int, box: NormBox) -> str:
    return f"{class_id} {box.cx:.6f} {box.cy:.6f} {box.w:.6f} {box.h:.6f}"


def _word_page_rect(rec: LineRecord, word_rect: PixelRect) -> PixelRect:
    """Map a word rect from the final line frame back to the page frame.

    Valid only when the line was not rotated: the final frame is then an
    axis-aligned sub-window of the page.
    """
    dx = rec.page_rect.x + rec.trim_px
    dy = rec.page_rect.y
    if rec.final_rect is not None:
        dx += rec.final_rect.x
        dy += rec.final_rect.y
    return PixelRect(dx + word_rect.x, dy + word_rect.y, word_rect.w, word_rect.h)


def export_yolo(seg: PageSegmentation, out_dir: str | Path) -> list[Path]:
    """Write page-frame line boxes and per-line word boxes as YOLO text.

    {image_id}.txt holds one class-0 row per line. {image_id}#line{i}.txt
    holds class-0 word rows normalized by that line's final frame. Floats
    use six decimals. Returns the written paths.
    """
    out_dir = Path(out_dir)
    written = []

    rows = [
        yolo_box_line(0, rect_to_norm(rec.page_rect, seg.image_w, seg.image_h))
        for rec in seg.lines
    ]
    page_path = out_dir / f"{seg.image_id}.txt"
    _atomic_write(page_path, "".join(r + "\n" for r in rows))
    written.append(page_path)

    for rec in seg.lines:
        rows = [
            yolo_box_line(0, rect_to_norm(w.rect, rec.final_w, rec.final_h))
            for w in rec.words
        ]
        path = out_dir / f"{seg.image_id}#line{rec.index}.txt"
        _atomic_write(path, "".join(r + "\n" for r in rows))
        written.append(path)
    return written


def _voc_object(parent: ET.Element, name: str, rect: PixelRect) -> None:
    obj = ET.SubElement(parent, "object")
    ET.SubElement(obj, "name").text = name
    ET.SubElement(obj, "pose").text = "Unspecified"
    ET.SubElement(obj, "truncated").text = "0"
    ET.SubElement(obj, "difficult").text = "0"
    box = ET.SubElement(obj, "bndbox")
    ET.SubElement(box, "xmin").text = str(rect.x)
    ET.SubElement(box, "ymin").text = str(rect.y)
    ET.SubElement(box, "xmax").text = str(rect.right - 1)
    ET.SubElement(box, "ymax").text = str(rect.bottom - 1)


def _voc_doc(filename: str, width: int, height: int) -> ET.Element:
    root = ET.Element("annotation")
    ET.SubElement(root, "folder").text = "images"
    ET.SubElement(root, "filename").text = filename
    size = ET.SubElement(root, "size")
    ET.SubElement(size, "width").text = str(width)
    ET.SubElement(size, "height").text = str(height)
    ET.SubElement(size, "depth").text = "1"
    ET.SubElement(root, "segmented").text = "0"
    return root


def _voc_text(root: ET.Element) -> str:
    ET.indent(root)
    return ET.tostring(root, encoding="unicode") + "\n"


def export_voc(seg: PageSegmentation, out_dir: str | Path) -> list[Path]:
    """Write VOC XML. Corners are inclusive: xmax = x + w - 1.

    The page file carries every line box plus the words of unrotated lines
    mapped to page coordinates. Each rotated line gets its own
    {image_id}#line{i}.xml in the final line frame, since its word boxes
    exist only there.
    """
    out_dir = Path(out_dir)
    written = []

    root = _voc_doc(f"{seg.image_id}.png", seg.image_w, seg.image_h)
    for rec in seg.lines:
        _voc_object(root, "line", rec.page_rect)
        if not rec.rotated:
            for w in rec.words:
                _voc_object(root, "word", _word_page_rect(rec, w.rect))
    page_path = out_dir / f"{seg.image_id}.xml"
    _atomic_write(page_path, _voc_text(root))
    written.append(page_path)

    for rec in seg.lines:
        if not rec.rotated:
            continue
        line_root = _voc_doc(
            f"{seg.image_id}#line{rec.index}.png", rec.final_w, rec.final_h
        )
        for w in rec.words:
            _voc_object(line_root, "word", w.rect)
        path = out_dir / f"{seg.image_id}#line{rec.index}.xml"
        _atomic_write(path, _voc_text(line_root))
        written.append(path)
    return written


def _rect_list(rect: PixelRect | None) -> list[int] | None:
    if rect is None:
        return None
    return [rect.x, rect.y, rect.w, rect.h]


def export_manifest(
    seg: PageSegmentation, path: str | Path, config: PipelineConfig
) -> Path:
    """Write one JSON manifest with full provenance and the effective config.

    Key order and float formatting are fixed, so identical runs produce
    byte-identical files.
    """
    path = Path(path)
    doc = {
        "image_id": seg.image_id,
        "image_w": seg.image_w,
        "image_h": seg.image_h,
        "config_fingerprint": seg.config_fingerprint,
        "config": config.to_dict(),
        "lines": [
            {
                "index": rec.index,
                "page_rect": _rect_list(rec.page_rect),
                "pass1_confidence": rec.pass1_confidence,
                "skew": {
                    "method": rec.skew.method.value,
                    "theta_avg": rec.skew.theta_avg,
                    "degree_avg": rec.skew.degree_avg,
                    "direction": rec.skew.direction.value if rec.skew.direction else None,
                    "applied": rec.skew.applied,
                },
                "trim_px": rec.trim_px,
                "decision": {
                    "reason": rec.decision.reason,
                    "rect": _rect_list(rec.decision.rect),
                },
                "final_w": rec.final_w,
                "final_h": rec.final_h,
                "words": [
                    {
                        "index": w.index,
                        "rect": _rect_list(w.rect),
                        "confidence": w.confidence,
                    }
                    for w in rec.words
                ],
            }
            for rec in seg.lines
        ],
    }
    _atomic_write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def evaluate_run(
    gt_dir: str | Path,
    pred_dir: str | Path,
    *,
    class_label: str = "line",
    ta: float = 0.5,
) -> EvalReport:
    """Score a directory of YOLO predictions against ground-truth files.

    Files pair by name. A ground-truth file with no prediction counts its
    boxes as misses (they enter N unmatched); a prediction file with no
    ground truth cannot be scored and is skipped. Both cases are logged.
    Missing directories are errors.
    """
    gt_dir, pred_dir = Path(gt_dir), Path(pred_dir)
    if not gt_dir.is_dir():
        raise FileNotFoundError(f"ground-truth directory not found: {gt_dir}")
    if not pred_dir.is_dir():
        raise FileNotFoundError(f"prediction directory not found: {pred_dir}")

    gt_files = sorted(gt_dir.glob("*.txt"))
    if not gt_files:
        raise FileNotFoundError(f"no .txt ground-truth files in {gt_dir}")
    pred_names = {p.name for p in pred_dir.glob("*.txt")}

    n_total = m_total = o2o_total = 0
    for gt_path in gt_files:
        gt_set = load_yolo_predictions(gt_path, EVAL_FRAME, EVAL_FRAME)
        n_total += len(gt_set)
        pred_path = pred_dir / gt_path.name
        if gt_path.name not in pred_names:
            log.warning("no prediction file for %s; counting its boxes as misses", gt_path.name)
            continue
        pred_set = load_yolo_predictions(pred_path, EVAL_FRAME, EVAL_FRAME)
        m_total += len(pred_set)
        gt_rects = [norm_to_rect(d.box, EVAL_FRAME, EVAL_FRAME) for d in gt_set.detections]
        pred_rects = [norm_to_rect(d.box, EVAL_FRAME, EVAL_FRAME) for d in pred_set.detections]
        o2o_total += len(match_one_to_one(gt_rects, pred_rects, Ta=ta))

    for name in sorted(pred_names - {p.name for p in gt_files}):
        log.warning("prediction file %s has no ground truth; skipped", name)

    return compute_metrics(n_total, m_total, o2o_total, Ta=ta, class_label=class_label)
