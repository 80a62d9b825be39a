# -*- coding: utf-8 -*-
"""
Weather presets and their difficulty classes.
"""
from collections import OrderedDict
from dataclasses import dataclass
from enum import Enum

from pedcross.generation_params import ConfigurationError


class Difficulty(Enum):
    Easy = "Easy"
    Moderate = "Moderate"
    Hard = "Hard"


@dataclass(frozen=True)
class WeatherCondition:
    name: str
    sun_altitude: float
    key_conditions: str
    difficulty: Difficulty

    def describe(self):
        return OrderedDict([("name", self.name),
                            ("sun_altitude", self.sun_altitude),
                            ("key_conditions", self.key_conditions),
                            ("difficulty", self.difficulty.name)])


def _w(name, sun_altitude, key_conditions, difficulty):
    return WeatherCondition(name, float(sun_altitude), key_conditions, Difficulty[difficulty])


# registry order fixes the weather index used for seeding
WEATHER_CONDITIONS = OrderedDict((w.name, w) for w in (
    _w("clear_noon", 70, "Optimal baseline", "Easy"),
    _w("cloudy_noon", 60, "Diffuse lighting", "Easy"),
    _w("wet_noon", 65, "Post-rain surface effects", "Easy"),
    _w("soft_rain", 60, "Intermediate precipitation", "Moderate"),
    _w("foggy_noon", 45, "Visibility limitation", "Moderate"),
    _w("clear_sunset", 10, "Extreme shadows", "Moderate"),
    _w("night_clear", -40, "Artificial lighting only", "Moderate"),
    _w("dawn", 5, "Transitional lighting", "Moderate"),
    _w("heavy_rain", 50, "Severe precipitation", "Hard"),
    _w("rainy_sunset", 12, "Poor light + precipitation", "Hard"),
    _w("night_rainy", -35, "Minimal light + rain + fog", "Hard"),
    _w("night_foggy", -35, "Extreme darkness + fog", "Hard"),
))


def get_weather(name):
    """
    Look up a weather preset by name.

        >>> get_weather("heavy_rain").difficulty
        <Difficulty.Hard: 'Hard'>
        >>> list(WEATHER_CONDITIONS).index("night_foggy")
        11

    """
    try:
        return WEATHER_CONDITIONS[name]
    except KeyError:
        raise ConfigurationError("Unknown weather condition '%s', known: %s" %
                                 (name, ", ".join(WEATHER_CONDITIONS)))


def weather_index(name):
    return list(WEATHER_CONDITIONS).index(get_weather(name).name)
