# -*- coding: utf-8 -*-

import gc
import os
import tracemalloc
from collections import defaultdict

import pytest

from pedcross.algorithms.clip import ClipSimulation, reset_between_clips, run_clip, simulate_clip
from pedcross.annotation import load_events, load_manifest
from pedcross.behaviour import BehaviourState, allowed_transitions
from pedcross.generation_params import GenerationParams
from pedcross.sensing import smooth_labels
from pedcross.utils.util import dumps
from pedcross.weather import get_weather
from pedcross.world import build_world


def short_params(**kwds):
    return GenerationParams(clip_duration_range=(3.0, 4.0), **kwds).resolved()


def simulate(seed, params=None, town="town_a", weather="clear_noon"):
    params = params if params is not None else short_params()
    return simulate_clip(params, build_world(town), get_weather(weather), seed, clip_id="clip_%d" % seed)


def by_pedestrian(annotations):
    frames = defaultdict(list)
    for a in annotations:
        frames[a.ped_id].append(a)
    return frames


def test_default_clip_length():
    recording = simulate(5, params=GenerationParams().resolved())
    manifest = recording.manifest
    assert 300 <= manifest.frame_count <= 450
    assert 5 <= len(manifest.pedestrians) <= 10
    assert len(recording.annotations) == manifest.frame_count * len(manifest.pedestrians)
    keys = [(a.frame, a.ped_id) for a in recording.annotations]
    assert keys == sorted(keys)
    assert manifest.annotated_samples == sum(1 for a in recording.annotations if a.visible)


def test_clips_are_reproducible():
    a, b, c = simulate(11), simulate(11), simulate(12)
    assert dumps(a.manifest.to_dict()) == dumps(b.manifest.to_dict())
    assert [r.to_record() for r in a.annotations] == [r.to_record() for r in b.annotations]
    assert [e.to_dict() for e in a.events] == [e.to_dict() for e in b.events]
    assert a.manifest.spawn_plan_digest != c.manifest.spawn_plan_digest


def test_no_crossers_without_crossing_roles():
    params = short_params(crossing__crosser_ratio=0.0, jaywalking_ratio=0.0)
    for seed in range(3):
        recording = simulate(seed, params=params)
        assert all(p["role"] == "NonCrosser" for p in recording.manifest.pedestrians)
        assert all(p["sequence_label"] != "Crosser" for p in recording.manifest.pedestrians)
        assert all(a.label_raw == 0 for a in recording.annotations)


@pytest.mark.parametrize("seed", range(4))
def test_labels_follow_smoothed_raw_labels(seed):
    recording = simulate(seed, params=short_params(jaywalking_ratio=1.0))
    records = dict((p["id"], p) for p in recording.manifest.pedestrians)
    for ped_id, frames in by_pedestrian(recording.annotations).items():
        smoothed = smooth_labels([f.label_raw for f in frames])
        for f, label in zip(frames, smoothed):
            assert f.label == (label if f.visible else None)
            assert (f.bbox is None) == (not f.visible)
            assert f.visible == (f.gate_stage == 0)

        labels = [f.label for f in frames]
        if 1 in labels:
            first = labels.index(1)
            assert records[ped_id]["sequence_label"] == "Crosser"
            assert records[ped_id]["first_cross_frame"] == frames[first].frame
            assert [f.tte for f in frames] == [first - i for i in range(len(frames))]
        else:
            assert all(f.tte is None for f in frames)
            assert records[ped_id]["first_cross_frame"] is None
        assert records[ped_id]["visible_frames"] == sum(f.visible for f in frames)


def test_event_trace_follows_the_transition_graph(tmp_path):
    for seed in range(4):
        manifest = run_clip(short_params(jaywalking_ratio=1.0), build_world("town_a"), get_weather("clear_noon"),
                            seed, clip_id="clip_%d" % seed, out_dir=str(tmp_path))
        events = load_events(os.path.join(str(tmp_path), manifest.clip_id))
        assert [e["tick"] for e in events] == sorted(e["tick"] for e in events)
        last = {}
        for e in events:
            assert 1 <= e["tick"] < manifest.frame_count
            if e["kind"] != "transition":
                assert e["progress"] < 0.4 or not e["retreated"]
                continue
            source, target = BehaviourState[e["from"]], BehaviourState[e["to"]]
            assert target in allowed_transitions(source)
            if e["ped_id"] in last:
                assert last[e["ped_id"]] is source
            last[e["ped_id"]] = target


def test_run_clip_writes_manifest(tmp_path):
    params = short_params(outputs_dir=str(tmp_path), sensor__lidar=True)
    manifest = run_clip(params, build_world("town_c"), get_weather("night_rainy"), 3, clip_id="night_rainy_0003")
    written = load_manifest(os.path.join(str(tmp_path), "night_rainy_0003"))
    assert written["frame_count"] == manifest.frame_count
    assert written["sensors"]["lidar"] is True
    assert written["sensors"]["camera"]["focal_px"] == 640.0
    assert written["town"] == "town_c"
    assert "outputs_dir" not in written["config"]


def test_teardown_releases_everything():
    simulation = ClipSimulation(short_params(), build_world("town_a"), get_weather("clear_noon"), 9)
    recording = simulation.run()
    phases = reset_between_clips(simulation)
    assert list(phases) == ["traffic", "agents", "annotation_buffers", "rng_streams"]
    assert phases["agents"] == phases["rng_streams"] == len(recording.manifest.pedestrians)
    assert phases["annotation_buffers"] >= len(recording.annotations)
    assert simulation.vehicles == [] and simulation.pedestrians == [] and simulation.stream is None


def test_aborted_clip_leaves_no_trace():
    isolated = simulate(1)

    aborted = ClipSimulation(short_params(), build_world("town_a"), get_weather("clear_noon"), 2)
    aborted.setup()
    for tick in range(1, 20):
        aborted.step(tick)
    reset_between_clips(aborted)

    again = simulate(1)
    assert dumps(again.manifest.to_dict()) == dumps(isolated.manifest.to_dict())
    assert [r.to_record() for r in again.annotations] == [r.to_record() for r in isolated.annotations]


@pytest.mark.slow
def test_memory_stays_flat_over_consecutive_clips():
    params = GenerationParams(clip_duration_range=(1.0, 1.5)).resolved()
    peaks = {}
    tracemalloc.start()
    try:
        for i in range(1, 101):
            gc.collect()
            tracemalloc.reset_peak()
            # identical clips, so any growth is state carried over from earlier clips
            recording = simulate(3, params=params)
            del recording
            peaks[i] = tracemalloc.get_traced_memory()[1]
    finally:
        tracemalloc.stop()
    assert peaks[100] <= 1.1 * peaks[5]
