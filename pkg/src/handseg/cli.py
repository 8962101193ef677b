"""Command-line interface.

Commands: segment (run the pipeline over a directory), annotate (segment
with every export format on), evaluate (score predictions against ground
truth), synth (build synthetic fixtures), skew-debug (inspect the skew
estimate for one line image). Exit codes: 0 success, 1 fatal error,
2 partial (some documents failed).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .annot import evaluate_run, export_manifest, export_voc, export_yolo, yolo_box_line
from .config import ConfigError, PipelineConfig
from .detect import DetectionSet, DetectorRole, FileDetector, PredictionFormatError
from .geometry import NormBox, PixelRect, rect_to_norm
from .metrics import format_report_table, report_json
from .pipeline import process_batch, process_document
from .raster import read_image, write_image
from .skew import correct_skew
from .synth import (
    SynthLineSpec,
    SyntheticDetector,
    generate_line,
    generate_page,
    word_truth_in_final_frame,
)

__all__ = ["main", "build_parser"]

_EMITTERS = ("yolo", "voc", "manifest")


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, help="JSON or key=value config file")
    p.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one config value (repeatable)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="handseg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    seg = sub.add_parser("segment", help="segment a directory of page images")
    seg.add_argument("--images", type=Path, required=True)
    seg.add_argument("--line-preds", type=Path, required=True)
    seg.add_argument("--word-preds", type=Path, required=True)
    seg.add_argument("--out", type=Path, required=True)
    seg.add_argument(
        "--emit",
        default="manifest",
        help="comma list of outputs: yolo,voc,manifest (default: manifest)",
    )
    seg.add_argument("--jobs", type=int, default=None)
    _add_config_args(seg)

    ann = sub.add_parser("annotate", help="segment with every export format on")
    ann.add_argument("--images", type=Path, required=True)
    ann.add_argument("--line-preds", type=Path, required=True)
    ann.add_argument("--word-preds", type=Path, required=True)
    ann.add_argument("--out", type=Path, required=True)
    ann.add_argument("--jobs", type=int, default=None)
    _add_config_args(ann)

    ev = sub.add_parser("evaluate", help="score YOLO predictions against ground truth")
    ev.add_argument("--gt", type=Path, required=True)
    ev.add_argument("--pred", type=Path, required=True)
    ev.add_argument("--class", dest="class_label", choices=("line", "word"), default="line")
    ev.add_argument("--ta", type=float, default=0.5)
    ev.add_argument("--json", dest="json_out", type=Path, default=None)

    syn = sub.add_parser("synth", help="generate synthetic fixtures")
    kinds = syn.add_subparsers(dest="kind", required=True)

    sline = kinds.add_parser("line", help="one synthetic line image plus ground truth")
    sline.add_argument("--out", type=Path, required=True)
    sline.add_argument("--name", default="line")
    sline.add_argument("--seed", type=int, default=0)
    sline.add_argument("--skew", type=float, default=0.0)
    sline.add_argument("--words", type=int, default=5)
    sline.add_argument("--height", type=int, default=64)

    spage = kinds.add_parser(
        "page", help="synthetic page plus prediction files and ground truth"
    )
    spage.add_argument("--out", type=Path, required=True)
    spage.add_argument("--name", default="page")
    spage.add_argument("--seed", type=int, default=0)
    spage.add_argument("--lines", type=int, default=5)
    spage.add_argument(
        "--skews", default=None, help="comma list of per-line skews in degrees"
    )
    spage.add_argument("--height", type=int, default=64)
    _add_config_args(spage)

    dbg = sub.add_parser("skew-debug", help="print the skew estimate for one image")
    dbg.add_argument("--image", type=Path, required=True)
    _add_config_args(dbg)

    return parser


def _load_config(args: argparse.Namespace) -> PipelineConfig:
    cfg = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    overrides = {}
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k.strip()] = v.strip()
    if overrides:
        cfg = cfg.with_overrides(overrides)
    cfg.validate()
    return cfg


def _discover_images(images_dir: Path) -> list[tuple[Path, str]]:
    if not images_dir.is_dir():
        raise FileNotFoundError(f"image directory not found: {images_dir}")
    paths = sorted(p for p in images_dir.iterdir() if p.suffix.lower() in (".png", ".pgm"))
    if not paths:
        raise FileNotFoundError(f"no .png or .pgm images in {images_dir}")
    return [(p, p.stem) for p in paths]


def _write_norm_gt(path: Path, pairs: list[tuple[int, NormBox]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = [yolo_box_line(cid, box) for cid, box in pairs]
    path.write_text("".join(r + "\n" for r in rows))


def _write_rect_gt(path: Path, rects: list[PixelRect], frame_w: int, frame_h: int) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = [yolo_box_line(0, rect_to_norm(r, frame_w, frame_h)) for r in rects]
    path.write_text("".join(r + "\n" for r in rows))


def _write_pred_file(path: Path, dset: DetectionSet) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = [
        f"{d.class_id} {d.box.cx:.6f} {d.box.cy:.6f} {d.box.w:.6f} {d.box.h:.6f} "
        f"{d.confidence:.6f}"
        for d in dset.detections
    ]
    path.write_text("".join(r + "\n" for r in rows))


def _cmd_segment(args: argparse.Namespace, emit: tuple[str, ...] | None = None) -> int:
    cfg = _load_config(args)
    if emit is None:
        emit = tuple(s.strip() for s in args.emit.split(",") if s.strip())
        bad = [e for e in emit if e not in _EMITTERS]
        if bad:
            raise ConfigError(f"unknown --emit value(s): {', '.join(bad)}")
        if not emit:
            raise ConfigError("--emit selected nothing")
    tasks = _discover_images(args.images)
    line_det = FileDetector(DetectorRole.LINE, args.line_preds)
    word_det = FileDetector(DetectorRole.WORD, args.word_preds)

    def report(image_id: str, ok: bool) -> None:
        print(f"{'done' if ok else 'FAIL'}  {image_id}", file=sys.stderr)

    result = process_batch(
        tasks, line_det, word_det, cfg, jobs=args.jobs, on_done=report
    )
    for page in result.pages:
        if "yolo" in emit:
            export_yolo(page, args.out / "yolo")
        if "voc" in emit:
            export_voc(page, args.out / "voc")
        if "manifest" in emit:
            export_manifest(page, args.out / "manifest" / f"{page.image_id}.json", cfg)
    for failure in result.failures:
        print(f"error: {failure.image_id}: {failure.message}", file=sys.stderr)
    print(
        f"segmented {len(result.pages)}/{len(tasks)} documents -> {args.out}",
        file=sys.stderr,
    )
    return 0 if result.ok else 2


def _cmd_evaluate(args: argparse.Namespace) -> int:
    report = evaluate_run(
        args.gt, args.pred, class_label=args.class_label, ta=args.ta
    )
    print(format_report_table([report]))
    if args.json_out:
        args.json_out.parent.mkdir(parents=True, exist_ok=True)
        args.json_out.write_text(report_json(report) + "\n")
    return 0


def _cmd_synth_line(args: argparse.Namespace) -> int:
    spec = SynthLineSpec(
        skew_deg=args.skew, n_words=args.words, height=args.height, seed=args.seed
    )
    img, truth = generate_line(spec, image_id=args.name)
    img_path = args.out / "images" / f"{args.name}.png"
    img_path.parent.mkdir(parents=True, exist_ok=True)
    write_image(img_path, img)
    _write_norm_gt(args.out / "gt" / "lines" / f"{args.name}.txt", truth.line_boxes)
    _write_norm_gt(args.out / "gt" / "words" / f"{args.name}.txt", truth.word_boxes)
    print(json.dumps({"image": str(img_path), "skew_deg": truth.skew_deg}))
    return 0


def _cmd_synth_page(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    if args.skews is not None:
        skews = [float(s) for s in args.skews.split(",")]
        if len(skews) != args.lines:
            raise ConfigError(
                f"--skews lists {len(skews)} values for --lines {args.lines}"
            )
    else:
        skews = [0.0] * args.lines
    page_img, truth = generate_page(
        args.lines, skews, args.seed, image_id=args.name, height=args.height
    )
    img_path = args.out / "images" / f"{args.name}.png"
    img_path.parent.mkdir(parents=True, exist_ok=True)
    write_image(img_path, page_img)

    # Run the pipeline against oracle detectors so every derived prediction
    # file (second pass, words) exists for a later file-driven run.
    line_det = SyntheticDetector(DetectorRole.LINE, truth)
    word_det = SyntheticDetector(DetectorRole.WORD, truth)
    seg = process_document(page_img, args.name, line_det, word_det, cfg)

    for key, dset in sorted(truth.detection_sets.items()):
        _write_pred_file(args.out / "preds" / f"{key}.txt", dset)

    _write_norm_gt(args.out / "gt" / "lines" / f"{args.name}.txt", truth.line_boxes)
    for rec in seg.lines:
        rects = word_truth_in_final_frame(
            truth,
            rec.index - 1,
            rec.page_rect,
            rec.skew,
            cfg.trim_fraction,
            rec.decision.rect,
        )
        _write_rect_gt(
            args.out / "gt" / "words" / f"{args.name}#line{rec.index}.txt",
            rects,
            rec.final_w,
            rec.final_h,
        )
    print(
        json.dumps(
            {
                "image": str(img_path),
                "lines": len(seg.lines),
                "preds": str(args.out / "preds"),
                "gt": str(args.out / "gt"),
            }
        )
    )
    return 0


def _cmd_skew_debug(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    img = read_image(args.image)
    corrected, est = correct_skew(
        img, min_correction_deg=cfg.min_correction_deg, params=cfg.skew_params()
    )
    print(
        json.dumps(
            {
                "image": str(args.image),
                "in_size": [img.width, img.height],
                "out_size": [corrected.width, corrected.height],
                "method": est.method.value,
                "theta_avg": est.theta_avg,
                "degree_avg": est.degree_avg,
                "direction": est.direction.value if est.direction else None,
                "applied": est.applied,
            },
            indent=2,
        )
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "segment":
            return _cmd_segment(args)
        if args.command == "annotate":
            return _cmd_segment(args, emit=_EMITTERS)
        if args.command == "evaluate":
            return _cmd_evaluate(args)
        if args.command == "synth":
            if args.kind == "line":
                return _cmd_synth_line(args)
            return _cmd_synth_page(args)
        if args.command == "skew-debug":
            return _cmd_skew_debug(args)
        parser.error(f"unknown command {args.command!r}")
    except (ConfigError, PredictionFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
