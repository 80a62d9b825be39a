# -*- coding: utf-8 -*-
"""
Annotation records, clip manifests and their on-disk form.

A clip directory holds ``manifest.json``, ``annotations.jsonl`` with one record per frame and
pedestrian and ``events.jsonl`` with the behaviour transitions and hazard events of the clip.
"""
import json
import os
import shutil
from collections import OrderedDict
from dataclasses import dataclass, field

from pedcross.utils.util import dumps

MANIFEST = "manifest.json"
ANNOTATIONS = "annotations.jsonl"
EVENTS = "events.jsonl"

MANIFEST_KEYS = ("clip_id", "seed", "town", "weather", "difficulty", "frame_count", "pedestrians",
                 "annotated_samples")


class ClipWriteError(IOError):
    pass


@dataclass(frozen=True)
class FrameAnnotation:
    frame: int
    ped_id: int
    visible: bool
    gate_stage: int
    label_raw: int
    label: int
    tte: int
    state: str
    lane_type: str
    control_mode: str
    distance_to_ego: float
    bbox: tuple = None
    bbox_clipped: bool = False
    archetype: str = None
    behaviour_type: str = None
    group_id: int = None

    def to_record(self):
        return OrderedDict([("frame", self.frame),
                            ("ped_id", self.ped_id),
                            ("visible", self.visible),
                            ("gate_stage", self.gate_stage),
                            ("label_raw", self.label_raw),
                            ("label", self.label),
                            ("tte", self.tte),
                            ("state", self.state),
                            ("lane_type", self.lane_type),
                            ("control_mode", self.control_mode),
                            ("distance_to_ego", self.distance_to_ego),
                            ("bbox", None if self.bbox is None else list(self.bbox)),
                            ("bbox_clipped", self.bbox_clipped),
                            ("archetype", self.archetype),
                            ("behaviour_type", self.behaviour_type),
                            ("group_id", self.group_id),
                            ("keypoints", None)])

    @classmethod
    def from_record(cls, record):
        kwds = dict((k, v) for k, v in record.items() if k != "keypoints")
        if kwds.get("bbox") is not None:
            kwds["bbox"] = tuple(kwds["bbox"])
        return cls(**kwds)


@dataclass
class ClipManifest:
    clip_id: str
    seed: int
    town: str
    weather: str
    difficulty: str
    frame_count: int
    fps: int
    pedestrians: list
    annotated_samples: int
    spawn_plan_digest: str
    spawn_plan: dict = field(default_factory=OrderedDict)
    crossing_rates: dict = field(default_factory=OrderedDict)
    sensors: dict = field(default_factory=OrderedDict)
    config: dict = field(default_factory=OrderedDict)
    transitions: int = 0
    hazard_events: int = 0

    @property
    def duration(self):
        return self.frame_count / float(self.fps)

    def to_dict(self):
        return OrderedDict([("clip_id", self.clip_id),
                            ("seed", self.seed),
                            ("town", self.town),
                            ("weather", self.weather),
                            ("difficulty", self.difficulty),
                            ("frame_count", self.frame_count),
                            ("fps", self.fps),
                            ("annotated_samples", self.annotated_samples),
                            ("transitions", self.transitions),
                            ("hazard_events", self.hazard_events),
                            ("pedestrians", self.pedestrians),
                            ("sensors", self.sensors),
                            ("crossing_rates", self.crossing_rates),
                            ("config", self.config),
                            ("spawn_plan_digest", self.spawn_plan_digest),
                            ("spawn_plan", self.spawn_plan)])


def _write_lines(path, records):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(dumps(record))
            fh.write("\n")


def write_clip(manifest, annotations, out_dir, events=()):
    """
    Write one clip directory below ``out_dir``.

    Files are written into a hidden staging directory which is renamed once complete, so a failed
    write never leaves a partial clip behind.

    :param manifest: :class:`ClipManifest`
    :param annotations: :class:`FrameAnnotation` list sorted by frame and pedestrian
    :param out_dir: batch output directory
    :param events: transition and hazard events
    :returns: path of the clip directory

    """
    final = os.path.join(out_dir, manifest.clip_id)
    staging = os.path.join(out_dir, ".%s.partial" % manifest.clip_id)
    try:
        if os.path.isdir(staging):
            shutil.rmtree(staging)
        os.makedirs(staging)
        with open(os.path.join(staging, MANIFEST), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dumps(manifest.to_dict(), indent=2))
            fh.write("\n")
        _write_lines(os.path.join(staging, ANNOTATIONS), (a.to_record() for a in annotations))
        _write_lines(os.path.join(staging, EVENTS), (e.to_dict() for e in events))
        if os.path.isdir(final):
            shutil.rmtree(final)
        os.rename(staging, final)
    except (OSError, ValueError) as e:
        shutil.rmtree(staging, ignore_errors=True)
        raise ClipWriteError("Could not write clip %s: %s" % (manifest.clip_id, e))
    return final


def _load_json_lines(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line, object_pairs_hook=OrderedDict) for line in fh if line.strip()]


def load_manifest(clip_dir):
    """
    Read and check the manifest of a clip directory.

    :raises ValueError: when the manifest is missing, unreadable or incomplete

    """
    path = os.path.join(clip_dir, MANIFEST)
    try:
        with open(path, encoding="utf-8") as fh:
            manifest = json.load(fh, object_pairs_hook=OrderedDict)
    except (OSError, ValueError) as e:
        raise ValueError("malformed manifest %s: %s" % (path, e))
    if not isinstance(manifest, dict):
        raise ValueError("malformed manifest %s" % path)
    missing = [k for k in MANIFEST_KEYS if k not in manifest]
    if missing:
        raise ValueError("malformed manifest %s, missing %s" % (path, ", ".join(missing)))
    return manifest


def load_annotations(clip_dir):
    return _load_json_lines(os.path.join(clip_dir, ANNOTATIONS))


def load_events(clip_dir):
    return _load_json_lines(os.path.join(clip_dir, EVENTS))


def find_clip_dirs(root):
    """
    Clip directories directly below ``root`` in sorted order; ``root`` itself if it is one.
    """
    if os.path.isfile(os.path.join(root, MANIFEST)):
        return [root]
    if not os.path.isdir(root):
        return []
    return [os.path.join(root, d) for d in sorted(os.listdir(root))
            if not d.startswith(".") and os.path.isdir(os.path.join(root, d))]
