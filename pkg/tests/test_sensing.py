# -*- coding: utf-8 -*-

from types import SimpleNamespace

import numpy as np
from hypothesis import given, settings, strategies as st

from pedcross.behaviour import BehaviourState
from pedcross.sensing import (MAX_DISTANCE, BoundingBox, CameraModel, compute_tte, project_bbox, raw_crossing_label,
                              sequence_label, smooth_labels, visibility_gate)
from pedcross.world import EgoPose, build_world

CAMERA = CameraModel()
EGO = EgoPose(np.zeros(2), np.array((1.0, 0.0)))


def gate(x, y, height=1.75):
    ped = SimpleNamespace(position=np.array((x, y), dtype=float), height=height)
    return visibility_gate(CAMERA, EGO, ped, project_bbox(CAMERA, EGO, ped))


def test_gate_stages():
    assert gate(80.0, 0.0) == (False, 1)
    assert gate(-10.0, 0.0) == (False, 2)
    # a pedestrian is only about 10 px wide at 30 m
    assert gate(30.0, 0.0) == (False, 3)
    # well outside the field of view
    assert gate(5.0, 10.0) == (False, 4)
    assert gate(20.0, 0.0) == (True, 0)
    assert gate(20.0, -3.0) == (True, 0)


def test_projection_shrinks_with_distance():
    near = project_bbox(CAMERA, EGO, SimpleNamespace(position=np.array((10.0, 0.0)), height=1.75))
    far = project_bbox(CAMERA, EGO, SimpleNamespace(position=np.array((20.0, 0.0)), height=1.75))
    assert near.height > far.height and near.width > far.width
    # centred pedestrian straddles the principal point
    assert near.x_min < CAMERA.width / 2 < near.x_max
    assert not near.clipped
    assert project_bbox(CAMERA, EGO, SimpleNamespace(position=np.array((-5.0, 0.0)), height=1.75)) is None


def test_box_height_is_set_by_the_nearest_face():
    bbox = project_bbox(CAMERA, EGO, SimpleNamespace(position=np.array((20.0, 0.0)), height=1.8))
    assert abs(bbox.height - 1.8 * CAMERA.focal_px / 19.8) < 1e-9
    # the centre-depth approximation is slightly smaller
    assert round(1.8 * CAMERA.focal_px / 20.0, 1) == 57.6 < bbox.height


@given(st.floats(-100, 100), st.floats(-100, 100))
@settings(max_examples=300, deadline=None)
def test_gate_reports_first_failed_stage(x, y):
    passed, stage = gate(x, y)
    distance = float(np.hypot(x, y))
    assert passed == (stage == 0)
    if distance >= MAX_DISTANCE:
        assert stage == 1
    elif x <= 0:
        assert stage == 2
    else:
        assert stage in (0, 3, 4)


def gate_box(x, w, h):
    ped = SimpleNamespace(position=np.array((x, 0.0)), height=1.75)
    return visibility_gate(CAMERA, EGO, ped, BoundingBox(600.0, 300.0, 600.0 + w, 300.0 + h))


def test_gate_box_thresholds():
    # small boxes only pass beyond 50 m
    assert gate_box(60.0, 10.0, 20.0) == (True, 0)
    assert gate_box(45.0, 10.0, 20.0) == (False, 3)
    assert gate_box(50.0, 10.0, 20.0) == (False, 3)
    assert gate_box(50.01, 10.0, 20.0) == (True, 0)
    assert gate_box(45.0, 15.0, 30.0) == (True, 0)

    assert gate_box(40.0, 15.0, 30.0) == (True, 0)
    assert gate_box(40.0, 14.99, 30.0) == (False, 3)
    assert gate_box(40.0, 15.0, 29.99) == (False, 3)
    assert gate_box(55.0, 8.0, 15.0) == (True, 0)
    assert gate_box(55.0, 7.99, 15.0) == (False, 3)
    assert gate_box(55.0, 8.0, 14.99) == (False, 3)
    assert gate_box(69.99, 8.0, 15.0) == (True, 0)
    assert gate_box(70.0, 8.0, 15.0) == (False, 1)


def test_gate_over_ten_thousand_poses():
    rng = np.random.default_rng(7)
    seen = set()
    for x, y, height in zip(rng.uniform(-80, 80, 10000), rng.uniform(-80, 80, 10000), rng.uniform(1.0, 2.0, 10000)):
        ped = SimpleNamespace(position=np.array((x, y)), height=height)
        bbox = project_bbox(CAMERA, EGO, ped)
        passed, stage = visibility_gate(CAMERA, EGO, ped, bbox)
        distance = float(np.hypot(x, y))
        seen.add(stage)
        assert passed == (stage == 0)
        if distance >= MAX_DISTANCE:
            assert stage == 1
        elif x <= 0:
            assert stage == 2
        else:
            min_w, min_h = (8.0, 15.0) if distance > 50.0 else (15.0, 30.0)
            small = bbox is None or bbox.width < min_w or bbox.height < min_h
            assert (stage == 3) == small
            if passed:
                cx, cy = bbox.centre
                assert 0 <= cx <= CAMERA.width and 0 <= cy <= CAMERA.height
    assert seen == {0, 1, 2, 3, 4}


def test_raw_crossing_label():
    world = build_world("town_a")

    def label(state, y):
        return raw_crossing_label(SimpleNamespace(state=state, position=np.array((50.0, y))), world)

    assert label(BehaviourState.CROSSING_ROAD, -1.0) == 1
    assert label(BehaviourState.PAUSING_MID_CROSS, 1.0) == 1
    assert label(BehaviourState.CROSSING_ROAD, -4.0) == 0
    assert label(BehaviourState.WALKING_SIDEWALK, -1.0) == 0


binary = st.lists(st.integers(0, 1), max_size=60)


@given(binary)
def test_smoothing_is_symmetric(raw):
    smoothed = smooth_labels(raw)
    assert len(smoothed) == len(raw)
    assert set(smoothed) <= {0, 1}
    assert smooth_labels([1 - x for x in raw]) == [1 - x for x in smoothed]


@given(st.integers(0, 40), st.integers(0, 1))
def test_smoothing_keeps_constant_runs(n, value):
    assert smooth_labels([value] * n) == [value] * n


@given(binary)
def test_tte_counts_down(labels):
    tte = compute_tte(labels)
    assert len(tte) == len(labels)
    if 1 not in labels:
        assert all(t is None for t in tte)
        return
    first = labels.index(1)
    assert tte[first] == 0
    for a, b in zip(tte, tte[1:]):
        assert a - b == 1
    assert all(label == 0 for label, t in zip(labels, tte) if t > 0)


def test_tte_skips_unlabelled_frames():
    assert compute_tte([None, 0, None, 1]) == [3, 2, 1, 0]


def test_sequence_label():
    frames = [SimpleNamespace(label=x) for x in (None, 0, 0, 1, None)]
    assert sequence_label(frames) == "Crosser"
    assert sequence_label(frames[:3]) == "NonCrosser"
    assert sequence_label(frames[:1]) is None
    assert sequence_label([]) is None
