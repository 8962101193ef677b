import pytest
from hypothesis import given, settings, strategies as st

from handseg.detect import DetectionSet
from handseg.geometry import Detection, NormBox, norm_to_rect
from handseg.selection import filter_first_pass, select_final_line

W, H = 1000, 800


def det(cx, cy, w, h, conf=0.9):
    return Detection(0, NormBox(cx, cy, w, h), conf)


def dset(*dets, w=W, h=H, image_id="page"):
    return DetectionSet(image_id, w, h, tuple(dets))


def line_at(cy, conf=0.9, h=0.05, cx=0.5, w=0.9):
    """A normal-looking full-width line detection at vertical position cy."""
    return det(cx, cy, w, h, conf)


class TestFilterFirstPass:
    def test_confidence_threshold_inclusive(self):
        out = filter_first_pass(dset(line_at(0.2, conf=0.3), line_at(0.5, conf=0.29)))
        assert len(out) == 1

    def test_sorted_top_to_bottom(self):
        out = filter_first_pass(dset(line_at(0.7), line_at(0.1), line_at(0.4)))
        ys = [c.rect.center_y for c in out]
        assert ys == sorted(ys)

    def test_empty_input(self):
        assert filter_first_pass(dset()) == []

    def test_tall_low_conf_overlapping_box_removed(self):
        tall = det(0.5, 0.3, 0.9, 0.4, conf=0.35)  # spans both lines below
        a = line_at(0.2, conf=0.9)
        b = line_at(0.4, conf=0.9)
        out = filter_first_pass(dset(a, tall, b))
        assert len(out) == 2
        assert all(c.rect.h < 100 for c in out)

    def test_tall_but_confident_box_kept(self):
        tall = det(0.5, 0.3, 0.9, 0.4, conf=0.8)
        a = line_at(0.2)
        b = line_at(0.4)
        out = filter_first_pass(dset(a, tall, b))
        assert len(out) == 3

    def test_tall_but_non_overlapping_box_kept(self):
        tall = det(0.5, 0.8, 0.9, 0.4, conf=0.35)  # low, away from the lines
        a = line_at(0.1)
        b = line_at(0.25)
        out = filter_first_pass(dset(a, tall, b))
        assert len(out) == 3

    def test_highest_confidence_survivor_never_removed(self):
        # the tall box overlaps and is below high_conf, but it is the single
        # most confident detection in the set
        tall = det(0.5, 0.3, 0.9, 0.4, conf=0.45)
        a = line_at(0.2, conf=0.4)
        b = line_at(0.4, conf=0.4)
        out = filter_first_pass(dset(a, tall, b), high_conf=0.5)
        assert len(out) == 3

    def test_bad_height_factor(self):
        with pytest.raises(ValueError):
            filter_first_pass(dset(line_at(0.5)), height_factor=1.0)

    @given(
        st.lists(
            st.tuples(
                st.floats(0.05, 0.95),  # cy
                st.floats(0.01, 0.5),  # h
                st.floats(0.0, 1.0),  # conf
            ),
            max_size=12,
        )
    )
    @settings(max_examples=200, deadline=None)
    def test_survivors_are_input_subset_in_y_order(self, rows):
        dets = [det(0.5, cy, 0.5, h, conf) for cy, h, conf in rows]
        out = filter_first_pass(dset(*dets))
        ys = [(c.rect.center_y, c.rect.x) for c in out]
        assert ys == sorted(ys)
        assert all(c.detection in dets for c in out)
        assert all(c.detection.confidence >= 0.3 for c in out)


def rect_of(d):
    return norm_to_rect(d.box, W, H)


class TestSelectFinalLine:
    def test_zero_boxes_keeps_whole(self):
        decision = select_final_line(dset(), W, H)
        assert decision.keep_whole
        assert decision.reason == "rule0-empty"

    def test_single_narrow_box_keeps_whole(self):
        d = det(0.5, 0.5, 0.3, 0.5)  # 30% of width
        decision = select_final_line(dset(d), W, H)
        assert decision.keep_whole
        assert decision.reason == "rule1-narrow"

    def test_single_wide_box_crops(self):
        d = det(0.5, 0.5, 0.8, 0.6)
        decision = select_final_line(dset(d), W, H)
        assert decision.rect == rect_of(d)
        assert decision.reason == "rule1-crop"

    def test_two_boxes_widest_wins_when_wide_enough(self):
        wide = det(0.5, 0.4, 0.7, 0.3, conf=0.55)
        slim = det(0.5, 0.6, 0.3, 0.3, conf=0.99)
        decision = select_final_line(dset(wide, slim), W, H)
        assert decision.rect == rect_of(wide)
        assert decision.reason == "rule2-widest"

    def test_two_narrow_boxes_confidence_wins(self):
        a = det(0.3, 0.4, 0.3, 0.3, conf=0.6)
        b = det(0.7, 0.6, 0.35, 0.3, conf=0.9)
        decision = select_final_line(dset(a, b), W, H)
        assert decision.rect == rect_of(b)
        assert decision.reason == "rule2-confidence"

    def test_three_boxes_middle_by_center_y(self):
        top = det(0.5, 0.2, 0.5, 0.2)
        mid = det(0.5, 0.5, 0.4, 0.2)
        bot = det(0.5, 0.8, 0.6, 0.2)
        decision = select_final_line(dset(bot, top, mid), W, H)
        assert decision.rect == rect_of(mid)
        assert decision.reason == "rule3-middle"

    def test_many_boxes_widest(self):
        boxes = [det(0.5, 0.1 + 0.15 * i, 0.2 + 0.1 * i, 0.1) for i in range(5)]
        decision = select_final_line(dset(*boxes), W, H)
        assert decision.rect == rect_of(boxes[-1])
        assert decision.reason == "rule4-widest"

    def test_bad_dims(self):
        with pytest.raises(ValueError):
            select_final_line(dset(), 0, 10)

    @given(
        st.lists(
            st.tuples(
                st.floats(0.0, 1.0),
                st.floats(0.0, 1.0),
                st.floats(0.001, 1.0),
                st.floats(0.001, 1.0),
                st.floats(0.0, 1.0),
            ),
            max_size=10,
        ),
        st.integers(1, 2000),
        st.integers(1, 2000),
    )
    @settings(max_examples=500, deadline=None)
    def test_total_on_any_detection_set(self, rows, w, h):
        dets = [det(cx, cy, bw, bh, conf) for cx, cy, bw, bh, conf in rows]
        decision = select_final_line(dset(*dets, w=w, h=h), w, h)
        assert decision.reason.startswith("rule")
        if decision.rect is not None:
            assert decision.rect.right <= w
            assert decision.rect.bottom <= h
        else:
            assert decision.keep_whole
