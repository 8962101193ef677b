import json
import shutil
import subprocess
import sys

import pytest


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "handseg.cli", *map(str, args)],
        capture_output=True,
        text=True,
        timeout=300,
    )


@pytest.fixture(scope="module")
def synth_env(tmp_path_factory):
    """One synthetic page fixture shared by the read-only CLI tests."""
    root = tmp_path_factory.mktemp("cli-env")
    proc = run_cli(
        "synth", "page",
        "--out", root,
        "--name", "pg",
        "--seed", "7",
        "--lines", "3",
        "--skews", "0,10,-10",
    )
    assert proc.returncode == 0, proc.stderr
    info = json.loads(proc.stdout)
    assert info["lines"] == 3
    return root


def test_synth_line_outputs(tmp_path):
    proc = run_cli(
        "synth", "line",
        "--out", tmp_path,
        "--name", "l1",
        "--seed", "3",
        "--skew", "10",
        "--words", "4",
    )
    assert proc.returncode == 0, proc.stderr
    info = json.loads(proc.stdout)
    assert info["skew_deg"] == 10.0
    assert (tmp_path / "images" / "l1.png").is_file()
    assert len((tmp_path / "gt" / "lines" / "l1.txt").read_text().splitlines()) == 1
    assert len((tmp_path / "gt" / "words" / "l1.txt").read_text().splitlines()) == 4


def test_synth_page_outputs(synth_env):
    assert (synth_env / "images" / "pg.png").is_file()
    preds = synth_env / "preds"
    assert (preds / "pg.txt").is_file()
    for i in (1, 2, 3):
        assert (preds / f"pg#line{i}#pass2.txt").is_file()
        assert (preds / f"pg#line{i}#words.txt").is_file()
        assert (synth_env / "gt" / "words" / f"pg#line{i}.txt").is_file()
    assert len((synth_env / "gt" / "lines" / "pg.txt").read_text().splitlines()) == 3


def test_segment_and_evaluate_loop(synth_env, tmp_path):
    out = tmp_path / "out"
    proc = run_cli(
        "segment",
        "--images", synth_env / "images",
        "--line-preds", synth_env / "preds",
        "--word-preds", synth_env / "preds",
        "--out", out,
        "--emit", "yolo,manifest",
    )
    assert proc.returncode == 0, proc.stderr
    assert "done  pg" in proc.stderr
    assert (out / "yolo" / "pg.txt").is_file()
    assert (out / "manifest" / "pg.json").is_file()
    assert not (out / "voc").exists()

    rep_path = tmp_path / "line-report.json"
    proc = run_cli(
        "evaluate",
        "--gt", synth_env / "gt" / "lines",
        "--pred", out / "yolo",
        "--json", rep_path,
    )
    assert proc.returncode == 0, proc.stderr
    assert "class" in proc.stdout and "line" in proc.stdout
    report = json.loads(rep_path.read_text())
    assert report["N"] == 3 and report["M"] == 3
    assert report["FM"] == 100.0

    proc = run_cli(
        "evaluate",
        "--gt", synth_env / "gt" / "words",
        "--pred", out / "yolo",
        "--class", "word",
    )
    assert proc.returncode == 0, proc.stderr
    assert "word" in proc.stdout
    assert "100.00" in proc.stdout


def test_annotate_emits_everything(synth_env, tmp_path):
    out = tmp_path / "out"
    proc = run_cli(
        "annotate",
        "--images", synth_env / "images",
        "--line-preds", synth_env / "preds",
        "--word-preds", synth_env / "preds",
        "--out", out,
    )
    assert proc.returncode == 0, proc.stderr
    assert (out / "yolo" / "pg.txt").is_file()
    assert (out / "voc" / "pg.xml").is_file()
    assert (out / "manifest" / "pg.json").is_file()


def test_segment_partial_failure_exit_2(synth_env, tmp_path):
    images = tmp_path / "images"
    images.mkdir()
    shutil.copy(synth_env / "images" / "pg.png", images / "pg.png")
    shutil.copy(synth_env / "images" / "pg.png", images / "orphan.png")
    proc = run_cli(
        "segment",
        "--images", images,
        "--line-preds", synth_env / "preds",
        "--word-preds", synth_env / "preds",
        "--out", tmp_path / "out",
    )
    assert proc.returncode == 2
    assert "FAIL  orphan" in proc.stderr
    assert "error: orphan:" in proc.stderr
    assert "done  pg" in proc.stderr
    assert (tmp_path / "out" / "manifest" / "pg.json").is_file()


def test_segment_missing_images_dir_exit_1(tmp_path):
    proc = run_cli(
        "segment",
        "--images", tmp_path / "nope",
        "--line-preds", tmp_path,
        "--word-preds", tmp_path,
        "--out", tmp_path / "out",
    )
    assert proc.returncode == 1
    assert "error:" in proc.stderr


def test_evaluate_missing_gt_exit_1(tmp_path):
    pred = tmp_path / "pred"
    pred.mkdir()
    proc = run_cli("evaluate", "--gt", tmp_path / "nope", "--pred", pred)
    assert proc.returncode == 1
    assert "error:" in proc.stderr


def test_synth_page_skew_count_mismatch_exit_1(tmp_path):
    proc = run_cli(
        "synth", "page", "--out", tmp_path, "--lines", "3", "--skews", "1,2"
    )
    assert proc.returncode == 1
    assert "error:" in proc.stderr


def test_bad_set_override_exit_1(synth_env, tmp_path):
    proc = run_cli(
        "segment",
        "--images", synth_env / "images",
        "--line-preds", synth_env / "preds",
        "--word-preds", synth_env / "preds",
        "--out", tmp_path / "out",
        "--set", "conf_word=2.0",
    )
    assert proc.returncode == 1
    assert "error:" in proc.stderr

    proc = run_cli(
        "segment",
        "--images", synth_env / "images",
        "--line-preds", synth_env / "preds",
        "--word-preds", synth_env / "preds",
        "--out", tmp_path / "out",
        "--set", "not-a-pair",
    )
    assert proc.returncode == 1


def test_unknown_emit_exit_1(synth_env, tmp_path):
    proc = run_cli(
        "segment",
        "--images", synth_env / "images",
        "--line-preds", synth_env / "preds",
        "--word-preds", synth_env / "preds",
        "--out", tmp_path / "out",
        "--emit", "yolo,bogus",
    )
    assert proc.returncode == 1
    assert "bogus" in proc.stderr


def test_skew_debug_reports_estimate(tmp_path):
    proc = run_cli(
        "synth", "line", "--out", tmp_path, "--name", "s", "--seed", "1", "--skew", "10"
    )
    assert proc.returncode == 0, proc.stderr
    proc = run_cli("skew-debug", "--image", tmp_path / "images" / "s.png")
    assert proc.returncode == 0, proc.stderr
    info = json.loads(proc.stdout)
    assert info["method"] == "lskew"
    assert info["applied"] is True
    assert abs(info["theta_avg"] - 10.0) <= 1.5
    assert info["direction"] == "anticlockwise"


def test_skew_debug_set_override_changes_behavior(tmp_path):
    run_cli("synth", "line", "--out", tmp_path, "--name", "s", "--seed", "1", "--skew", "10")
    proc = run_cli(
        "skew-debug",
        "--image", tmp_path / "images" / "s.png",
        "--set", "min_correction_deg=60",
    )
    assert proc.returncode == 0, proc.stderr
    info = json.loads(proc.stdout)
    assert info["applied"] is False
    assert info["in_size"] == info["out_size"]


def test_config_file_forms(tmp_path):
    run_cli("synth", "line", "--out", tmp_path, "--name", "s", "--seed", "1", "--skew", "10")
    img = tmp_path / "images" / "s.png"

    json_cfg = tmp_path / "cfg.json"
    json_cfg.write_text('{"min_correction_deg": 60.0}\n')
    proc = run_cli("skew-debug", "--image", img, "--config", json_cfg)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["applied"] is False

    kv_cfg = tmp_path / "cfg.txt"
    kv_cfg.write_text("# comment line\nmin_correction_deg = 60\n")
    proc = run_cli("skew-debug", "--image", img, "--config", kv_cfg)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["applied"] is False


def test_no_arguments_usage_error():
    proc = run_cli()
    assert proc.returncode == 2
    assert "usage" in proc.stderr.lower()
