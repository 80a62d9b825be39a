# -*- coding: utf-8 -*-

import json
import os

import pytest

from pedcross.algorithms import batch
from pedcross.algorithms.batch import BATCH_REPORT, clip_jobs, clip_seed, run_batch
from pedcross.behaviour import SimulationError
from pedcross.generation_params import GenerationParams
from pedcross.weather import WEATHER_CONDITIONS


def batch_params(out_dir, **kwds):
    kwds.setdefault("clip_duration_range", (1.0, 1.5))
    return GenerationParams(outputs_dir=str(out_dir), **kwds).resolved()


def read_tree(root):
    files = {}
    for dirpath, _, filenames in os.walk(str(root)):
        for name in filenames:
            path = os.path.join(dirpath, name)
            with open(path, "rb") as fh:
                files[os.path.relpath(path, str(root))] = fh.read()
    return files


def test_clip_jobs():
    params = GenerationParams(dataset_mode=True, videos_per_weather=2, towns=("town_a", "town_b"),
                              seed=7).resolved()
    jobs = clip_jobs(params)
    assert len(jobs) == 2 * len(WEATHER_CONDITIONS)
    assert jobs[0]["clip_id"] == "clear_noon_0000"
    assert [j["town"] for j in jobs[:2]] == ["town_a", "town_b"]
    assert len(set(j["clip_seed"] for j in jobs)) == len(jobs)


def test_clip_seeds_depend_on_position_only():
    params = GenerationParams(weather_conditions=("heavy_rain",), videos_per_weather=3, seed=7).resolved()
    wide = GenerationParams(weather_conditions=("clear_noon", "heavy_rain"), videos_per_weather=5, seed=7).resolved()
    seeds = dict((j["clip_id"], j["clip_seed"]) for j in clip_jobs(wide))
    for job in clip_jobs(params):
        assert seeds[job["clip_id"]] == job["clip_seed"]
    assert clip_seed(7, 0, 0) != clip_seed(8, 0, 0)


def test_batch_writes_clips_and_report(tmp_path):
    report = run_batch(batch_params(tmp_path, videos_per_weather=2))
    assert report["status"] == "ok"
    assert report["clips"] == 2
    assert report["failed_clips"] == []
    assert report["verification"] is None
    assert sorted(os.listdir(str(tmp_path))) == [BATCH_REPORT, "clear_noon_0000", "clear_noon_0001"]
    with open(os.path.join(str(tmp_path), BATCH_REPORT)) as fh:
        written = json.load(fh)
    assert written["stats"]["total_clips"] == 2
    assert "outputs_dir" not in written["config"]


def test_batches_are_byte_identical(tmp_path):
    run_batch(batch_params(tmp_path / "a", videos_per_weather=2, crossing_ratio=0.6))
    run_batch(batch_params(tmp_path / "b", videos_per_weather=2, crossing_ratio=0.6))
    run_batch(batch_params(tmp_path / "c", videos_per_weather=2, crossing_ratio=0.6, workers=2))
    a = read_tree(tmp_path / "a")
    assert len(a) == 1 + 2 * 3
    assert a == read_tree(tmp_path / "b")
    assert a == read_tree(tmp_path / "c")


def test_failed_clips_fail_the_batch(tmp_path, monkeypatch):
    run_clip = batch.run_clip

    def flaky(params, world, weather, seed, clip_id=None, out_dir=None):
        if clip_id.endswith("0000"):
            raise SimulationError("non-finite position")
        return run_clip(params, world, weather, seed, clip_id=clip_id, out_dir=out_dir)

    monkeypatch.setattr(batch, "run_clip", flaky)
    report = run_batch(batch_params(tmp_path, videos_per_weather=2))
    assert report["status"] == "failed"
    assert [f["clip_id"] for f in report["failed_clips"]] == ["clear_noon_0000"]
    assert "SimulationError" in report["failed_clips"][0]["error"]
    assert report["stats"]["total_clips"] == 1
    assert not os.path.exists(os.path.join(str(tmp_path), "clear_noon_0000"))

    report = run_batch(batch_params(tmp_path, videos_per_weather=2, failure_threshold=0.5))
    assert report["status"] == "ok"


@pytest.mark.slow
def test_full_dataset_batch(tmp_path):
    report = run_batch(batch_params(tmp_path, dataset_mode=True, videos_per_weather=2, crossing_ratio=0.6,
                                    clip_duration_range=(10.0, 15.0), workers=4))
    stats = report["stats"]
    assert report["status"] == "ok"
    assert stats["total_clips"] == 2 * len(WEATHER_CONDITIONS)
    assert list(stats["weather_coverage"]) == sorted(WEATHER_CONDITIONS)
    assert 300 <= stats["avg_frames_per_clip"] <= 450
    assert stats["crossing"] > 0 and stats["non_crossing"] > 0
    assert report["verification"]["samples"] == stats["labelled_pedestrians"]
    assert report["verification"]["ci_low"] <= report["verification"]["measured"] <= report["verification"]["ci_high"]


@pytest.mark.slow
def test_dataset_batch_meets_the_crossing_target(tmp_path):
    report = run_batch(batch_params(tmp_path, dataset_mode=True, videos_per_weather=5, towns=("town_a", "town_b"),
                                    crossing_ratio=0.6, clip_duration_range=(10.0, 15.0), workers=4))
    stats = report["stats"]
    assert stats["total_clips"] == 60
    # 60 clips label about 460 pedestrians
    assert stats["labelled_pedestrians"] >= 400
    assert report["calibration"]["pilot_clips"] == 60
    assert 0.52 <= stats["crossing_share"] <= 0.68


@pytest.mark.slow
@pytest.mark.parametrize("target", (0.40, 0.55, 0.75))
def test_crossing_targets_within_tolerance(tmp_path, target):
    report = run_batch(batch_params(tmp_path, dataset_mode=True, videos_per_weather=6, crossing_ratio=target,
                                   clip_duration_range=(10.0, 15.0), workers=4))
    verification = report["verification"]
    assert verification["samples"] >= 500
    assert verification["verdict"] == "pass"
    assert abs(verification["measured"] - target) <= 0.08


@pytest.mark.slow
@pytest.mark.parametrize("seed", (11, 12))
def test_zeroing_a_layer_never_raises_the_measured_share(tmp_path, seed):
    def share(name, **kwds):
        report = run_batch(batch_params(tmp_path / name, weather_conditions=("clear_noon",), videos_per_weather=50,
                                        seed=seed, clip_duration_range=(10.0, 15.0), workers=4, **kwds))
        return report["stats"]["crossing_share"]

    base = share("base")
    assert base > 0
    assert share("crosser", crossing__crosser_ratio=0.0) <= base
    assert share("behaviours", crossing__crossing_behaviors_ratio=0.0) <= base
    assert share("jaywalking", jaywalking_ratio=0.0) <= base
    assert share("groups", crossing__group_probability=0.0) <= base
