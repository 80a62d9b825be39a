# -*- coding: utf-8 -*-
"""
Generation Parameters
"""
import copy
import logging
from collections import OrderedDict


class ConfigurationError(ValueError):
    pass


SCENARIO_TYPES = ("free_drive_front_cam_v2",)

SUPPORTED_CROSSING_BAND = (0.40, 0.75)

# keys describing how a batch is executed rather than what it generates; they are
# never recorded in manifests so that outputs do not depend on them
RUNTIME_KEYS = ("outputs_dir", "workers")


class GenerationParams(object):
    """
    Key-value store for all parameters of a generation run.

    Keys with a ``prefix/`` belong to a sub-configuration (``crossing/`` for the crossing-rate
    layers, ``sensor/`` for the recorded sensor flags)::

        >>> params = GenerationParams(videos_per_weather=2, crossing__group_probability=0.0)
        >>> params.videos_per_weather, params["crossing/group_probability"]
        (2, 0.0)
        >>> params.new(seed=3).seed
        3
        >>> GenerationParams(bogus=1)
        Traceback (most recent call last):
        ...
        pedcross.generation_params.ConfigurationError: Unknown parameter 'bogus'

    """

    defaults = OrderedDict([
        ("type", SCENARIO_TYPES[0]),
        ("outputs_dir", None),
        ("towns", ("town_a",)),
        ("weather_conditions", ("clear_noon",)),
        ("videos_per_weather", 1),
        ("dataset_mode", False),
        ("crossing_ratio", None),
        ("sudden_crossing_ratio", None),
        ("jaywalking_ratio", None),
        ("sensor/lidar", False),
        ("sensor/dvs", False),
        ("sensor/emergency", False),
        ("seed", 0),
        ("fps", 30),
        ("clip_duration_range", (10.0, 15.0)),
        ("workers", 1),
        ("crossing/crosser_ratio", 0.90),
        ("crossing/crossing_behaviors_ratio", 0.75),
        ("crossing/normal_ratio", 0.50),
        ("crossing/sudden_ratio", 0.25),
        ("crossing/jaywalk_ratio", 0.25),
        ("crossing/lateral_offset", 1.5),
        ("crossing/group_probability", 0.40),
        ("crossing_intensity", None),
        ("calibration_clips", 60),
        ("calibration_rounds", 6),
        ("calibration_tolerance", 0.01),
        ("sensing_range", 50.0),
        ("failure_threshold", 0.10),
    ])

    def __init__(self, **kwds):
        self._data = OrderedDict(self.defaults)
        for k, v in kwds.items():
            self[k.replace("__", "/")] = v

    def __getitem__(self, key):
        try:
            return self._data[key]
        except KeyError:
            raise ConfigurationError("Unknown parameter '%s'" % key)

    def __setitem__(self, key, value):
        if key not in self.defaults:
            raise ConfigurationError("Unknown parameter '%s'" % key)
        self._data[key] = value

    def __getattr__(self, key):
        if key.startswith("_"):
            raise AttributeError(key)
        try:
            return self._data[key]
        except KeyError:
            raise AttributeError(key)

    def __contains__(self, key):
        return key in self._data

    def __iter__(self):
        return iter(self._data)

    def __len__(self):
        return len(self._data)

    def __copy__(self):
        params = GenerationParams.__new__(GenerationParams)
        params._data = OrderedDict(self._data)
        return params

    def __eq__(self, other):
        return isinstance(other, GenerationParams) and self._data == other._data

    def __repr__(self):
        return "GenerationParams(%s)" % ", ".join("%s=%r" % (k, v) for k, v in self._data.items())

    def keys(self):
        return list(self._data.keys())

    def items(self):
        return list(self._data.items())

    def get(self, key, default=None):
        return self._data.get(key, default)

    def pop(self, key, *default):
        return self._data.pop(key, *default)

    def new(self, **kwds):
        params = copy.copy(self)
        for k, v in kwds.items():
            params[k.replace("__", "/")] = v
        return params

    def dict(self):
        return OrderedDict(self._data)

    def recorded(self):
        """
        Parameters as written into manifests and batch reports.
        """
        return OrderedDict((k, v) for k, v in self._data.items() if k not in RUNTIME_KEYS)

    def resolved(self):
        """
        Return a validated copy with aliases, ``all`` and ``dataset_mode`` expanded and the
        target crossing ratio clamped into the supported band.

        """
        from pedcross.algorithms.spawner import MAX_INTENSITY
        from pedcross.world import TEMPLATES
        from pedcross.weather import WEATHER_CONDITIONS

        params = copy.copy(self)

        if params["type"] not in SCENARIO_TYPES:
            raise ConfigurationError("Unknown scenario type '%s', registered types: %s" %
                                     (params["type"], ", ".join(SCENARIO_TYPES)))

        towns = params["towns"]
        if isinstance(towns, str):
            towns = (towns,)
        towns = tuple(towns)
        if not towns:
            raise ConfigurationError("At least one town is required.")
        for town in towns:
            if town not in TEMPLATES:
                raise ConfigurationError("Unknown town template '%s', registered templates: %s" %
                                         (town, ", ".join(TEMPLATES)))
        params["towns"] = towns

        weathers = params["weather_conditions"]
        if isinstance(weathers, str):
            weathers = (weathers,)
        weathers = tuple(weathers)
        if params["dataset_mode"] or "all" in weathers:
            weathers = tuple(WEATHER_CONDITIONS)
        for name in weathers:
            if name not in WEATHER_CONDITIONS:
                raise ConfigurationError("Unknown weather condition '%s'" % name)
        params["weather_conditions"] = weathers

        if int(params["videos_per_weather"]) < 1:
            raise ConfigurationError("videos_per_weather must be at least 1.")
        params["videos_per_weather"] = int(params["videos_per_weather"])

        if int(params["workers"]) < 1:
            raise ConfigurationError("workers must be at least 1.")

        seed = int(params["seed"])
        if not 0 <= seed < 2**64:
            raise ConfigurationError("seed must be a 64-bit unsigned integer.")
        params["seed"] = seed

        if int(params["fps"]) != 30:
            raise ConfigurationError("Only 30 FPS clips are supported.")

        lo, hi = params["clip_duration_range"]
        if not 0 < lo <= hi:
            raise ConfigurationError("Invalid clip duration range %s" % (params["clip_duration_range"],))
        params["clip_duration_range"] = (float(lo), float(hi))

        for key in ("sudden_crossing_ratio", "jaywalking_ratio"):
            if params[key] is not None and not 0.0 <= params[key] <= 1.0:
                raise ConfigurationError("%s must be a probability." % key)

        target = params["crossing_ratio"]
        if target is not None:
            lo, hi = SUPPORTED_CROSSING_BAND
            clamped = min(max(float(target), lo), hi)
            if clamped != target:
                logging.getLogger("pedcross.params").warning(
                    "crossing_ratio %.3f outside the supported band [%.2f, %.2f], clamped to %.2f",
                    target, lo, hi, clamped)
            params["crossing_ratio"] = clamped

        intensity = params["crossing_intensity"]
        if intensity is not None and not 0.0 <= float(intensity) <= MAX_INTENSITY:
            raise ConfigurationError("crossing_intensity must lie in [0, %.1f]." % MAX_INTENSITY)
        if int(params["calibration_clips"]) < 0 or int(params["calibration_rounds"]) < 1:
            raise ConfigurationError("calibration needs a non-negative pilot size and at least one round.")
        if not float(params["calibration_tolerance"]) > 0:
            raise ConfigurationError("calibration_tolerance must be positive.")

        return params
