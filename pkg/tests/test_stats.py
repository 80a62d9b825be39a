# -*- coding: utf-8 -*-

import json

import pytest

from pedcross.utils.stats import dataset_stats, format_stats, verify_crossing_ratio


def write_manifest(clip_dir, weather, labels, frame_count=300, samples=120, town="town_a"):
    clip_dir.mkdir()
    pedestrians = [{"id": i, "archetype": "young_person", "sequence_label": label} for i, label in enumerate(labels)]
    manifest = {"clip_id": clip_dir.name, "seed": 1, "town": town, "weather": weather, "difficulty": "Easy",
                "frame_count": frame_count, "fps": 30, "pedestrians": pedestrians, "annotated_samples": samples}
    (clip_dir / "manifest.json").write_text(json.dumps(manifest))
    return str(clip_dir)


def test_dataset_stats(tmp_path, caplog):
    dirs = [write_manifest(tmp_path / "a", "clear_noon", ["Crosser", "NonCrosser", None]),
            write_manifest(tmp_path / "b", "heavy_rain", ["Crosser", "Crosser", "NonCrosser"], frame_count=450,
                           samples=0, town="town_b")]
    broken = tmp_path / "c"
    broken.mkdir()
    (broken / "manifest.json").write_text("{")
    dirs.append(str(broken))

    report = dataset_stats(dirs)
    assert report["total_clips"] == 2
    assert report["total_frames"] == 750
    assert report["avg_frames_per_clip"] == 375.0
    assert report["avg_duration"] == 12.5
    assert report["unique_pedestrians"] == 6
    assert report["labelled_pedestrians"] == 5
    assert report["crossing"] == 3 and report["non_crossing"] == 2
    assert report["crossing_share"] == pytest.approx(0.6)
    assert report["cnc_ratio"] == 1.5
    assert report["annotated_samples"] == 120
    assert dict(report["weather_coverage"]) == {"clear_noon": 1, "heavy_rain": 1}
    assert dict(report["town_coverage"]) == {"town_a": 1, "town_b": 1}
    assert report["errors"] == [str(broken)]
    assert "malformed manifest" in caplog.text

    table = format_stats(report)
    assert "Malformed clips" in table
    assert "3 (60.0%)" in table


def test_empty_dataset():
    report = dataset_stats([])
    assert report["crossing_share"] == 0.0
    assert report["cnc_ratio"] == 0.0
    assert verify_crossing_ratio(report, 0.6)["verdict"] == "inconclusive"


@pytest.mark.parametrize("crossing, non_crossing, verdict", [(600, 400, "pass"),
                                                             (680, 320, "pass"),
                                                             (690, 310, "fail"),
                                                             (100, 300, "fail"),
                                                             (60, 39, "inconclusive")])
def test_verify_crossing_ratio(crossing, non_crossing, verdict):
    report = verify_crossing_ratio({"crossing": crossing, "non_crossing": non_crossing}, 0.6)
    assert report["verdict"] == verdict
    assert report["samples"] == crossing + non_crossing
    assert report["ci_low"] <= report["measured"] <= report["ci_high"]
    assert report["confidence"] == 0.95
