# -*- coding: utf-8 -*-
"""
Ego camera model, projection, visibility gate and crossing labels.
"""
import math
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from pedcross.behaviour import CROSSING_STATES
from pedcross.world import LaneType, lane_type_at

PED_WIDTH = 0.5
PED_DEPTH = 0.4
NEAR_PLANE = 0.1

MAX_DISTANCE = 70.0
FAR_DISTANCE = 50.0
MIN_BOX = (15.0, 30.0)
MIN_FAR_BOX = (8.0, 15.0)

SMOOTHING_WINDOW = 5


@dataclass(frozen=True)
class CameraModel:
    """
    Forward-looking pinhole camera at driver eye height.

        >>> CameraModel().focal_px
        640.0

    """
    width: int = 1280
    height: int = 720
    horizontal_fov: float = 90.0
    mount_height: float = 1.2

    @property
    def focal_px(self):
        return round(self.width / (2.0 * math.tan(math.radians(self.horizontal_fov) / 2.0)), 9)

    def intrinsics(self):
        f = self.focal_px
        return np.array([[f, 0.0, self.width / 2.0],
                         [0.0, f, self.height / 2.0],
                         [0.0, 0.0, 1.0]])

    def describe(self):
        return OrderedDict([("width", self.width), ("height", self.height),
                            ("horizontal_fov", self.horizontal_fov), ("focal_px", self.focal_px),
                            ("mount_height", self.mount_height)])


@dataclass(frozen=True)
class BoundingBox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float
    clipped: bool = False

    @property
    def width(self):
        return self.x_max - self.x_min

    @property
    def height(self):
        return self.y_max - self.y_min

    @property
    def centre(self):
        return (self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0

    def as_list(self):
        return [self.x_min, self.y_min, self.x_max, self.y_max]


def to_camera_frame(ego, xy, heights):
    """
    Map world points ``(n, 2)`` with heights ``(n,)`` to camera coordinates: x right, y down, z forward.
    """
    forward = np.asarray(ego.forward, dtype=float)
    right = np.array((forward[1], -forward[0]))
    rel = np.asarray(xy, dtype=float) - np.asarray(ego.position, dtype=float)
    return np.stack([rel @ right, ego.camera_height - np.asarray(heights, dtype=float), rel @ forward])


def project_bbox(cam, ego, ped):
    """
    Project the body box of ``ped`` into the ego camera.

    The pedestrian is an upright box with a 0.5 x 0.4 m footprint aligned with the camera axes.
    Corners behind the near plane are dropped; the box is absent when no corner is in front.

        >>> from pedcross.world import EgoPose
        >>> from types import SimpleNamespace
        >>> ego = EgoPose(np.zeros(2), np.array((1.0, 0.0)))
        >>> bbox = project_bbox(CameraModel(), ego, SimpleNamespace(position=np.array((20.0, 0.0)), height=1.8))
        >>> round(bbox.height, 2), round(bbox.width, 2)
        (58.18, 16.16)

    """
    forward = np.asarray(ego.forward, dtype=float)
    right = np.array((forward[1], -forward[0]))
    centre = np.asarray(ped.position, dtype=float)

    xy, heights = [], []
    for dx in (-PED_WIDTH / 2, PED_WIDTH / 2):
        for dz in (-PED_DEPTH / 2, PED_DEPTH / 2):
            for h in (0.0, ped.height):
                xy.append(centre + dx * right + dz * forward)
                heights.append(h)
    X, Y, Z = to_camera_frame(ego, np.array(xy), np.array(heights))

    in_front = Z > NEAR_PLANE
    if not in_front.any():
        return None

    uvw = cam.intrinsics() @ np.stack([X[in_front], Y[in_front], Z[in_front]])
    u, v = uvw[0] / uvw[2], uvw[1] / uvw[2]
    x_min, y_min, x_max, y_max = float(u.min()), float(v.min()), float(u.max()), float(v.max())
    clipped = (not in_front.all()) or x_min < 0 or y_min < 0 or x_max > cam.width or y_max > cam.height
    return BoundingBox(x_min, y_min, x_max, y_max, clipped=bool(clipped))


def distance_to_ego(ego, ped):
    return float(np.hypot(*(np.asarray(ped.position, dtype=float) - ego.position)))


def visibility_gate(cam, ego, ped, bbox):
    """
    Four-stage visibility gate.

    1. distance to the ego below 70 m
    2. in front of the camera
    3. box at least 15 x 30 px, 8 x 15 px beyond 50 m
    4. box intersects the image and its centre lies inside

    :returns: ``(passed, stage)`` where ``stage`` is the first failed stage or 0

    """
    distance = distance_to_ego(ego, ped)
    if not distance < MAX_DISTANCE:
        return False, 1

    if not float(np.dot(np.asarray(ped.position, dtype=float) - ego.position, ego.forward)) > 0:
        return False, 2

    min_w, min_h = MIN_FAR_BOX if distance > FAR_DISTANCE else MIN_BOX
    if bbox is None or bbox.width < min_w or bbox.height < min_h:
        return False, 3

    cx, cy = bbox.centre
    intersects = bbox.x_max > 0 and bbox.y_max > 0 and bbox.x_min < cam.width and bbox.y_min < cam.height
    if not (intersects and 0 <= cx <= cam.width and 0 <= cy <= cam.height):
        return False, 4

    return True, 0


def raw_crossing_label(ped, world):
    """
    1 iff the pedestrian is in a crossing state and stands on a driving lane.
    """
    return int(ped.state in CROSSING_STATES and lane_type_at(world, ped.position) is LaneType.Driving)


def smooth_labels(raw, window=SMOOTHING_WINDOW):
    """
    Centred majority vote; windows are truncated at the ends and ties keep the raw value.

        >>> smooth_labels([1, 1, 0, 1, 1])
        [1, 1, 1, 1, 1]
        >>> smooth_labels([0, 0, 1, 0, 0, 0])
        [0, 0, 0, 0, 0, 0]
        >>> smooth_labels([0, 0, 0, 1, 1, 1])
        [0, 0, 0, 1, 1, 1]

    """
    half = window // 2
    raw = [int(x) for x in raw]
    smoothed = []
    for i, x in enumerate(raw):
        votes = raw[max(0, i - half):i + half + 1]
        ones = 2 * sum(votes)
        if ones > len(votes):
            smoothed.append(1)
        elif ones < len(votes):
            smoothed.append(0)
        else:
            smoothed.append(x)
    return smoothed


def compute_tte(labels):
    """
    Frames until the first positive label, negative afterwards; ``None`` throughout when there is
    no positive label. Entries may be ``None`` for frames without a label.

        >>> compute_tte([0, 0, 0, 1, 1])
        [3, 2, 1, 0, -1]
        >>> compute_tte([0, 0])
        [None, None]

    """
    first = next((i for i, label in enumerate(labels) if label == 1), None)
    if first is None:
        return [None] * len(labels)
    return [first - i for i in range(len(labels))]


def sequence_label(frames):
    """
    ``"Crosser"`` if any frame of the visible sequence is labelled 1, ``"NonCrosser"`` otherwise and
    ``None`` for a pedestrian without visible frames.
    """
    labels = [f.label for f in frames if f.label is not None]
    if not labels:
        return None
    return "Crosser" if any(label == 1 for label in labels) else "NonCrosser"
