# -*- coding: utf-8 -*-
"""
Simulation of a single clip.

Every tick steps all vehicles and pedestrians against the previous tick's snapshot, synchronises
crossing groups and then observes every pedestrian through the ego camera. After the last tick the
raw crossing labels are smoothed, time-to-event markers computed and the clip is written out.
"""
import gc
import logging
from collections import OrderedDict, namedtuple

import numpy as np

from pedcross.algorithms.spawner import CrossingRateConfig, build_spawn_plan
from pedcross.annotation import ClipManifest, FrameAnnotation, write_clip
from pedcross.behaviour import SimulationError, find_ego, fsm_step, group_sync
from pedcross.sensing import (CameraModel, distance_to_ego, compute_tte, project_bbox, raw_crossing_label,
                              sequence_label, smooth_labels, visibility_gate)
from pedcross.utils.util import RngStream
from pedcross.world import ego_pose, lane_type_at, step_vehicle

logger = logging.getLogger("pedcross.clip")

Sample = namedtuple("Sample", ("frame", "visible", "stage", "raw", "state", "lane_type", "control_mode", "bbox",
                               "distance"))

ClipRecording = namedtuple("ClipRecording", ("manifest", "annotations", "events"))


class ClipSimulation(object):
    """
    State of one clip from spawn to teardown.

    :param params: resolved :class:`pedcross.generation_params.GenerationParams`
    :param world: road world
    :param weather: weather condition
    :param clip_seed: 64-bit seed all random streams of the clip derive from
    :param clip_id: name of the clip directory

    """

    def __init__(self, params, world, weather, clip_seed, clip_id=None, camera=None):
        self.params = params
        self.world = world
        self.weather = weather
        self.clip_seed = int(clip_seed)
        self.clip_id = clip_id if clip_id is not None else "clip_%016x" % self.clip_seed
        self.camera = camera if camera is not None else CameraModel()
        self.dt = 1.0 / params["fps"]
        self.crossing = CrossingRateConfig.from_params(params)

        self.stream = RngStream(self.clip_seed)
        self.frame_count = 0
        self.plan = None
        self.vehicles = []
        self.pedestrians = []
        self.groups = OrderedDict()
        self.ped_rngs = {}
        self.samples = OrderedDict()
        self.transitions = []
        self.hazards = []

    def setup(self):
        lo, hi = self.params["clip_duration_range"]
        duration = float(self.stream.generator("duration").uniform(lo, hi))
        self.frame_count = int(round(duration * self.params["fps"]))

        self.plan = build_spawn_plan(self.crossing, self.world, self.weather, self.stream.child("spawn"))
        self.vehicles = list(self.plan.vehicles)
        self.pedestrians = list(self.plan.pedestrians)
        for group_id, ids in enumerate(self.plan.groups):
            self.groups[group_id] = list(ids)
        self.ped_rngs = dict((p.id, self.stream.generator("fsm", p.id)) for p in self.pedestrians)
        self.samples = OrderedDict((p.id, []) for p in self.pedestrians)
        logger.debug("%s: %d frames, %d pedestrians, %d vehicles, %d groups", self.clip_id, self.frame_count,
                     len(self.pedestrians), len(self.vehicles), len(self.groups))

    def step(self, tick):
        prev_vehicles, prev_pedestrians = self.vehicles, self.pedestrians
        sensing_range = self.params["sensing_range"]

        self.vehicles = [step_vehicle(v, prev_pedestrians, self.world, self.dt) for v in prev_vehicles]

        pedestrians = OrderedDict()
        for ped in prev_pedestrians:
            ped, event = fsm_step(ped, self.world, prev_vehicles, self.ped_rngs[ped.id], self.dt, tick=tick,
                                  sensing_range=sensing_range, hazard_log=self.hazards)
            if event is not None:
                self.transitions.append(event)
            pedestrians[ped.id] = ped

        for ids in self.groups.values():
            for member in group_sync([pedestrians[i] for i in ids], tick, self.world, self.transitions):
                pedestrians[member.id] = member

        self.pedestrians = list(pedestrians.values())

        for agent in self.pedestrians + self.vehicles:
            if not np.all(np.isfinite(agent.position)):
                raise SimulationError("%s: non-finite position of %s %d at tick %d" %
                                      (self.clip_id, type(agent).__name__, agent.id, tick))

    def observe(self, frame):
        pose = ego_pose(find_ego(self.vehicles), self.camera.mount_height)
        for ped in self.pedestrians:
            bbox = project_bbox(self.camera, pose, ped)
            visible, stage = visibility_gate(self.camera, pose, ped, bbox)
            self.samples[ped.id].append(Sample(frame, visible, stage, raw_crossing_label(ped, self.world),
                                               ped.state.name, lane_type_at(self.world, ped.position).name,
                                               ped.control_mode.name, bbox if visible else None,
                                               distance_to_ego(pose, ped)))

    def annotate(self):
        """
        Turn the per-frame samples into annotations and pedestrian records.
        """
        initial = dict((p.id, p) for p in self.plan.pedestrians)
        annotations, records = [], []
        for ped_id, samples in self.samples.items():
            ped = initial[ped_id]
            smoothed = smooth_labels([s.raw for s in samples])
            labels = [label if s.visible else None for s, label in zip(samples, smoothed)]
            frames = []
            for s, label, tte in zip(samples, labels, compute_tte(labels)):
                frames.append(FrameAnnotation(
                    frame=s.frame, ped_id=ped_id, visible=s.visible, gate_stage=s.stage, label_raw=s.raw,
                    label=label, tte=tte, state=s.state, lane_type=s.lane_type, control_mode=s.control_mode,
                    distance_to_ego=s.distance,
                    bbox=None if s.bbox is None else tuple(s.bbox.as_list()),
                    bbox_clipped=False if s.bbox is None else s.bbox.clipped,
                    archetype=ped.archetype.name,
                    behaviour_type=None if ped.behaviour_type is None else ped.behaviour_type.name,
                    group_id=ped.group_id))
            annotations.extend(frames)

            first_cross = next((f.frame for f in frames if f.label == 1), None)
            records.append(OrderedDict([("id", ped_id),
                                        ("archetype", ped.archetype.name),
                                        ("role", ped.role.name),
                                        ("behaviour_type", frames[0].behaviour_type if frames else None),
                                        ("committed", ped.committed),
                                        ("group_id", ped.group_id),
                                        ("is_group_leader", ped.is_group_leader),
                                        ("speed_profile", ped.speed_profile.name),
                                        ("sequence_label", sequence_label(frames)),
                                        ("first_cross_frame", first_cross),
                                        ("visible_frames", sum(1 for f in frames if f.visible))]))

        annotations.sort(key=lambda a: (a.frame, a.ped_id))
        return annotations, records

    def manifest(self, records, annotated_samples):
        sensors = OrderedDict([("rgb", True),
                               ("lidar", bool(self.params["sensor/lidar"])),
                               ("dvs", bool(self.params["sensor/dvs"])),
                               ("emergency", bool(self.params["sensor/emergency"])),
                               ("camera", self.camera.describe())])
        plan = self.plan.to_dict()
        return ClipManifest(clip_id=self.clip_id, seed=self.clip_seed, town=self.world.template_name,
                            weather=self.weather.name, difficulty=self.weather.difficulty.name,
                            frame_count=self.frame_count, fps=self.params["fps"], pedestrians=records,
                            annotated_samples=annotated_samples, spawn_plan_digest=self.plan.digest(),
                            spawn_plan=plan, crossing_rates=self.crossing.to_dict(), sensors=sensors,
                            config=self.params.recorded(), transitions=len(self.transitions),
                            hazard_events=len(self.hazards))

    def run(self):
        self.setup()
        for frame in range(self.frame_count):
            if frame > 0:
                self.step(frame)
            self.observe(frame)

        annotations, records = self.annotate()
        manifest = self.manifest(records, sum(1 for a in annotations if a.visible))
        events = sorted(self.transitions + self.hazards, key=lambda e: e.tick)
        return ClipRecording(manifest, annotations, events)

    def teardown(self):
        """
        Release the clip state in a fixed order: traffic, agents, annotation buffers, random streams.

        :returns: number of objects released per phase

        """
        phases = OrderedDict()
        phases["traffic"] = len(self.vehicles)
        self.vehicles = []
        phases["agents"] = len(self.pedestrians)
        self.pedestrians = []
        self.groups = OrderedDict()
        self.plan = None
        phases["annotation_buffers"] = sum(len(s) for s in self.samples.values()) + len(self.transitions) + \
            len(self.hazards)
        self.samples = OrderedDict()
        self.transitions = []
        self.hazards = []
        phases["rng_streams"] = len(self.ped_rngs)
        self.ped_rngs = {}
        self.stream = None
        return phases


def reset_between_clips(simulation):
    """
    Tear ``simulation`` down and collect garbage so nothing of the clip survives.
    """
    phases = simulation.teardown()
    gc.collect()
    logger.debug("%s released %s", simulation.clip_id, ", ".join("%s=%d" % kv for kv in phases.items()))
    return phases


def simulate_clip(params, world, weather, clip_seed, clip_id=None):
    """
    Simulate a clip in memory.

    :returns: :class:`ClipRecording` with manifest, annotations and events

    """
    simulation = ClipSimulation(params, world, weather, clip_seed, clip_id=clip_id)
    try:
        return simulation.run()
    finally:
        reset_between_clips(simulation)


def run_clip(params, world, weather, clip_seed, clip_id=None, out_dir=None):
    """
    Simulate a clip and write it below ``out_dir`` (``params["outputs_dir"]`` by default).

    :returns: :class:`pedcross.annotation.ClipManifest`

    """
    recording = simulate_clip(params, world, weather, clip_seed, clip_id=clip_id)
    if out_dir is None:
        out_dir = params["outputs_dir"]
    if out_dir is not None:
        write_clip(recording.manifest, recording.annotations, out_dir, events=recording.events)
    logger.info("%s: %d frames, %d annotated samples", recording.manifest.clip_id, recording.manifest.frame_count,
                recording.manifest.annotated_samples)
    return recording.manifest
