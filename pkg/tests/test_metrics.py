from itertools import permutations

import numpy as np
import pytest

from handseg.geometry import PixelRect, intersection_area
from handseg.metrics import (
    compute_metrics,
    format_report_table,
    match_one_to_one,
    report_to_dict,
    summarize,
)


def brute_force_max_matching(gt, pred, ta):
    """Exhaustive optimal one-to-one matching size (small inputs only)."""
    admissible = [
        [
            intersection_area(g, p) >= ta * g.area
            and intersection_area(g, p) >= ta * p.area
            for p in pred
        ]
        for g in gt
    ]
    best = 0
    k = min(len(gt), len(pred))
    idx_p = range(len(pred))
    for perm in permutations(idx_p, k):
        n = sum(1 for gi, pi in enumerate(perm) if admissible[gi][pi])
        best = max(best, n)
    # also try matching subsets of gt when gt is larger
    if len(gt) > len(pred):
        for perm in permutations(range(len(gt)), len(pred)):
            n = sum(1 for pi, gi in enumerate(perm) if admissible[gi][pi])
            best = max(best, n)
    return best


def random_rects(rng, n, span=40):
    out = []
    for _ in range(n):
        x = int(rng.integers(0, span))
        y = int(rng.integers(0, span))
        w = int(rng.integers(1, 15))
        h = int(rng.integers(1, 15))
        out.append(PixelRect(x, y, w, h))
    return out


class TestMatching:
    def test_identical_sets_match_fully(self):
        rects = [PixelRect(0, 0, 10, 10), PixelRect(20, 0, 10, 10)]
        assert len(match_one_to_one(rects, list(rects))) == 2

    def test_disjoint_sets_do_not_match(self):
        gt = [PixelRect(0, 0, 5, 5)]
        pred = [PixelRect(50, 50, 5, 5)]
        assert match_one_to_one(gt, pred) == []

    def test_two_sided_criterion(self):
        # prediction fully covers the small gt box, but the gt box covers
        # only a sliver of the prediction: not admissible at Ta=0.5
        gt = [PixelRect(0, 0, 4, 4)]
        pred = [PixelRect(0, 0, 40, 40)]
        assert match_one_to_one(gt, pred, Ta=0.5) == []
        assert len(match_one_to_one(gt, pred, Ta=0.01)) == 1

    def test_each_box_used_once(self):
        gt = [PixelRect(0, 0, 10, 10)]
        pred = [PixelRect(0, 0, 10, 10), PixelRect(1, 0, 10, 10)]
        matches = match_one_to_one(gt, pred)
        assert len(matches) == 1
        assert matches[0] == (0, 0)  # the exact-overlap pair wins

    def test_split_line_matches_one_half(self):
        # a full line against its two halves: each half is admissible at
        # Ta=0.5 (covers half the line, line covers all of the half), and
        # one-to-one means only one of them can win
        gt = [PixelRect(0, 0, 100, 10)]
        pred = [PixelRect(0, 0, 50, 10), PixelRect(50, 0, 50, 10)]
        assert len(match_one_to_one(gt, pred, Ta=0.5)) == 1

    def test_greedy_matches_optimal_on_random_instances(self):
        rng = np.random.default_rng(2024)
        for trial in range(200):
            gt = random_rects(rng, int(rng.integers(0, 6)))
            pred = random_rects(rng, int(rng.integers(0, 6)))
            got = len(match_one_to_one(gt, pred, Ta=0.5))
            want = brute_force_max_matching(gt, pred, 0.5)
            assert got == want, f"trial {trial}: greedy {got} != optimal {want}"

    def test_ta_validation(self):
        with pytest.raises(ValueError):
            match_one_to_one([], [], Ta=0.0)


class TestComputeMetrics:
    def test_formulas(self):
        r = compute_metrics(1397, 1396, 1314)
        assert r.DR == pytest.approx(1314 / 1397)
        assert r.RA == pytest.approx(1314 / 1396)
        assert r.FM == pytest.approx(2 * 1314 / (1397 + 1396))

    def test_fm_is_harmonic_mean(self):
        r = compute_metrics(100, 50, 40)
        hm = 2 * r.DR * r.RA / (r.DR + r.RA)
        assert r.FM == pytest.approx(hm)

    def test_zero_counts(self):
        r = compute_metrics(0, 0, 0)
        assert (r.DR, r.RA, r.FM) == (0.0, 0.0, 0.0)
        r = compute_metrics(5, 0, 0)
        assert (r.DR, r.RA, r.FM) == (0.0, 0.0, 0.0)

    def test_o2o_capped_by_counts(self):
        with pytest.raises(ValueError):
            compute_metrics(3, 5, 4)

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            compute_metrics(-1, 0, 0)

    def test_perfect_run(self):
        r = compute_metrics(10, 10, 10)
        assert r.FM == 1.0

    def test_one_missing_prediction(self):
        n = 25
        r = compute_metrics(n, n - 1, n - 1)
        assert r.RA == 1.0
        assert r.DR == pytest.approx((n - 1) / n)


class TestSummarize:
    def test_sm_is_mean_of_fms(self):
        line = compute_metrics(100, 100, 99, class_label="line")
        word = compute_metrics(1000, 900, 850, class_label="word")
        s = summarize(line, word)
        assert s.SM == pytest.approx((line.FM + word.FM) / 2)

    def test_mismatched_ta_rejected(self):
        a = compute_metrics(10, 10, 9, Ta=0.5)
        b = compute_metrics(10, 10, 9, Ta=0.9)
        with pytest.raises(ValueError):
            summarize(a, b)


class TestReporting:
    def test_dict_percentages(self):
        d = report_to_dict(compute_metrics(1397, 1396, 1314, class_label="line"))
        assert d["DR"] == 94.06
        assert d["RA"] == 94.13
        assert d["FM"] == 94.09
        assert d["N"] == 1397

    def test_table_has_header_and_rows(self):
        t = format_report_table([compute_metrics(4, 4, 4, class_label="line")])
        lines = t.splitlines()
        assert len(lines) == 2
        assert "DR(%)" in lines[0]
        assert "100.00" in lines[1]
