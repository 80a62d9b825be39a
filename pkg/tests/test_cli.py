# -*- coding: utf-8 -*-

import json
import logging

import pytest

from pedcross.algorithms.batch import run_batch
from pedcross.generation_params import ConfigurationError, GenerationParams
from pedcross.utils.cli import UsageError, parse_cli
from scenarios import EXIT_OK, EXIT_USAGE, EXIT_VERIFICATION_FAILED, main


def test_minimal_generate(tmp_path):
    args, params = parse_cli(["generate", "--outputs_dir", str(tmp_path)])
    assert args.command == "generate"
    assert params["outputs_dir"] == str(tmp_path)
    assert params["type"] == "free_drive_front_cam_v2"
    assert params["towns"] == ("town_a",)


def test_aliases_replace_whole_arguments(tmp_path):
    out = str(tmp_path / "Town01_runs")
    _, params = parse_cli(["generate", "--outputs-dir", out, "--towns", "Town01"])
    assert params["outputs_dir"] == out
    assert params["towns"] == ("town_a",)


def test_generate_flags(tmp_path, caplog):
    with caplog.at_level(logging.WARNING, logger="pedcross.params"):
        args, params = parse_cli(["scenarios", "generate", "--outputs-dir", str(tmp_path), "--towns", "Town02",
                                  "Town05", "--crossing-ratio", "0.9", "--enable_lidar", "-w", "3",
                                  "--dataset-mode", "--port", "2000"])
    assert params["towns"] == ("town_b", "town_e")
    assert params["crossing_ratio"] == 0.75
    assert "clamped to 0.75" in caplog.text
    assert params["sensor/lidar"] is True
    assert params["sensor/dvs"] is False
    assert params["workers"] == 3
    assert len(params["weather_conditions"]) == 12


def test_free_parameters(tmp_path):
    _, params = parse_cli(["generate", "--outputs_dir", str(tmp_path), "--crossing/group_probability", "0",
                           "--clip-duration-range", "10", "12", "--sensing_range", "40.0"])
    assert params["crossing/group_probability"] == 0
    assert params["clip_duration_range"] == (10.0, 12.0)
    assert params["sensing_range"] == 40.0

    with pytest.raises(ConfigurationError):
        parse_cli(["generate", "--outputs_dir", str(tmp_path), "--bogus", "1"])


def test_usage_errors(tmp_path):
    with pytest.raises(UsageError):
        parse_cli([])
    with pytest.raises(UsageError):
        parse_cli(["generate"])
    with pytest.raises(UsageError):
        parse_cli(["stats"])
    with pytest.raises(ConfigurationError):
        parse_cli(["generate", "--outputs_dir", str(tmp_path), "--type", "free_drive_rear_cam"])


def test_show_defaults(capsys):
    args, params = parse_cli(["generate", "--show-defaults"])
    assert params == GenerationParams()
    assert main(["generate", "--show-defaults"]) == EXIT_OK
    assert "crossing/crosser_ratio" in capsys.readouterr().out


def test_main_exit_codes(tmp_path, capsys):
    assert main([]) == EXIT_USAGE
    assert main(["generate", "--outputs_dir", str(tmp_path), "--type", "bogus"]) == EXIT_USAGE
    assert "free_drive_front_cam_v2" in capsys.readouterr().err
    assert main(["generate", "--outputs_dir", str(tmp_path), "--dry-run"]) == EXIT_OK
    assert not list(tmp_path.iterdir())


def test_describe(capsys):
    assert main(["describe"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["weather_conditions"]) == 12
    assert set(doc["templates"]) == {"town_a", "town_b", "town_c", "town_e"}
    assert doc["camera"]["focal_px"] == 640.0


def test_stats_and_verify(tmp_path, capsys):
    run_batch(GenerationParams(outputs_dir=str(tmp_path), videos_per_weather=2,
                               clip_duration_range=(1.0, 1.5)).resolved())
    capsys.readouterr()

    assert main(["stats", str(tmp_path), "--json"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["total_clips"] == 2

    assert main(["stats", str(tmp_path)]) == EXIT_OK
    assert capsys.readouterr().out.startswith("Metric")

    # a handful of pedestrians is never enough for a verdict
    assert main(["verify", str(tmp_path), "--target", "0.6"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["verdict"] == "inconclusive"
    assert main(["verify", str(tmp_path), "--target", "0.6", "--tolerance", "0.1"]) != EXIT_VERIFICATION_FAILED
