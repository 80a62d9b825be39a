# -*- coding: utf-8 -*-

import copy
import logging

import pytest

from pedcross.generation_params import ConfigurationError, GenerationParams
from pedcross.weather import WEATHER_CONDITIONS, Difficulty, get_weather, weather_index


def test_defaults():
    params = GenerationParams()
    assert params["towns"] == ("town_a",)
    assert params["weather_conditions"] == ("clear_noon",)
    assert params["fps"] == 30
    assert params["clip_duration_range"] == (10.0, 15.0)
    assert params["crossing/crosser_ratio"] == 0.90
    assert params["crossing_ratio"] is None


def test_unknown_key():
    with pytest.raises(ConfigurationError):
        GenerationParams()["bogus"] = 1
    with pytest.raises(ConfigurationError):
        GenerationParams()["bogus"]


def test_copy_is_independent():
    params = GenerationParams()
    other = copy.copy(params)
    other["seed"] = 5
    assert params["seed"] == 0
    assert params.new(seed=5) == other


def test_recorded_leaves_out_runtime_keys():
    recorded = GenerationParams(outputs_dir="/tmp/a", workers=4).recorded()
    assert "outputs_dir" not in recorded
    assert "workers" not in recorded
    assert recorded["seed"] == 0


def test_crossing_ratio_is_clamped(caplog):
    with caplog.at_level(logging.WARNING, logger="pedcross.params"):
        params = GenerationParams(crossing_ratio=0.9).resolved()
    assert params["crossing_ratio"] == 0.75
    assert "clamped" in caplog.text

    assert GenerationParams(crossing_ratio=0.1).resolved()["crossing_ratio"] == 0.40
    assert GenerationParams(crossing_ratio=0.6).resolved()["crossing_ratio"] == 0.6


def test_dataset_mode_covers_all_weather():
    params = GenerationParams(dataset_mode=True).resolved()
    assert params["weather_conditions"] == tuple(WEATHER_CONDITIONS)
    assert GenerationParams(weather_conditions=["all"]).resolved()["weather_conditions"] == tuple(WEATHER_CONDITIONS)
    assert GenerationParams(towns="town_b").resolved()["towns"] == ("town_b",)


@pytest.mark.parametrize("kwds", [dict(type="free_drive_rear_cam"),
                                  dict(towns=("town_q",)),
                                  dict(weather_conditions=("sandstorm",)),
                                  dict(videos_per_weather=0),
                                  dict(workers=0),
                                  dict(seed=-1),
                                  dict(fps=25),
                                  dict(clip_duration_range=(15.0, 10.0)),
                                  dict(sudden_crossing_ratio=1.5),
                                  dict(crossing_intensity=2.5),
                                  dict(crossing_intensity=-0.1),
                                  dict(calibration_clips=-1),
                                  dict(calibration_rounds=0),
                                  dict(calibration_tolerance=0.0)])
def test_invalid_values(kwds):
    with pytest.raises(ConfigurationError):
        GenerationParams(**kwds).resolved()


def test_unknown_type_lists_registered_types():
    with pytest.raises(ConfigurationError) as e:
        GenerationParams(type="bogus").resolved()
    assert "free_drive_front_cam_v2" in str(e.value)


def test_weather_table():
    assert len(WEATHER_CONDITIONS) == 12
    difficulties = [w.difficulty for w in WEATHER_CONDITIONS.values()]
    assert difficulties.count(Difficulty.Easy) == 3
    assert difficulties.count(Difficulty.Moderate) == 5
    assert difficulties.count(Difficulty.Hard) == 4
    assert weather_index("clear_noon") == 0
    assert get_weather("night_rainy").sun_altitude < 0
    assert get_weather("clear_noon").key_conditions == "Optimal baseline"
    assert get_weather("night_foggy").describe()["key_conditions"] == "Extreme darkness + fog"
    with pytest.raises(ConfigurationError):
        get_weather("sandstorm")
