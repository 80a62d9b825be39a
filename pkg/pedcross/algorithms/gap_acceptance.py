# -*- coding: utf-8 -*-
"""
Time-to-collision, gap acceptance and in-crossing safety checks.

All functions are pure in their inputs; random decisions take an explicit numpy ``Generator``.
"""
from collections import namedtuple
from enum import Enum

import numpy as np

SENSING_RANGE = 50.0
SAFETY_RADIUS = 3.0
LOOKAHEAD = (0.5, 1.5, 2.5)
PREDICTION_HORIZON = 0.5
RETREAT_PROBABILITY = 0.15
RETREAT_WINDOW = 0.4
DECISION_WINDOW = (10.0, 40.0)
RUN_FACTOR = 1.6
MAX_RUN_SPEED = 4.0

INF = float("inf")

TtcResult = namedtuple("TtcResult", ("value", "vehicle_id"))


class PatienceOutcome(Enum):
    KeepWaiting = "KeepWaiting"
    Abandon = "Abandon"
    ForceSudden = "ForceSudden"


def ttc(p, vehicle):
    """
    Time until ``vehicle`` reaches ``p`` at its projected closing speed.

        >>> from pedcross.world import Vehicle, DrivingProfile
        >>> v = Vehicle(0, np.array((-20., 0.)), np.array((10., 0.)), np.array((1., 0.)), 0, DrivingProfile.Normal, 10.)
        >>> ttc(np.zeros(2), v)
        2.0

    :param p: pedestrian position
    :param vehicle: anything with ``position`` and ``velocity``
    :returns: seconds, ``inf`` when the vehicle is not closing in, ``0.0`` when already there

    """
    diff = np.asarray(p, dtype=float) - vehicle.position
    dist = float(np.hypot(*diff))
    if dist == 0.0:
        return 0.0
    v_close = float(np.dot(vehicle.velocity, diff)) / dist
    if v_close <= 0.0:
        return INF
    return dist / v_close


def min_ttc(p, vehicles, sensor_range=SENSING_RANGE):
    """
    Smallest TTC over all vehicles within ``sensor_range`` of ``p``.

    Returns ``TtcResult(inf, -1)`` when no vehicle in range is closing in.
    """
    p = np.asarray(p, dtype=float)
    best = TtcResult(INF, -1)
    for vehicle in vehicles:
        if np.hypot(*(p - vehicle.position)) > sensor_range:
            continue
        t = ttc(p, vehicle)
        if t < best.value:
            best = TtcResult(t, vehicle.id)
    return best


def effective_crossing_speed(ped):
    if ped.crossing_speed > 0:
        return ped.crossing_speed
    return ped.base_speed * ped.speed_profile.multiplier


def gap_threshold(ped, world):
    """
    Smallest gap in seconds ``ped`` accepts: its TTC threshold, its safety margin and the time it
    needs to walk across the road.
    """
    s = effective_crossing_speed(ped)
    if s <= 0:
        return INF
    return ped.archetype.tau_ttc + ped.archetype.delta_safety + world.w_road / s


def gap_accepted(ped, vehicles, world, sensor_range=SENSING_RANGE):
    """
    Return ``True`` when the smallest TTC over all vehicles in range strictly exceeds the
    pedestrian's gap threshold.
    """
    threshold = gap_threshold(ped, world)
    if threshold == INF:
        return False
    return min_ttc(ped.position, vehicles, sensor_range).value > threshold


def hazard_points(ped):
    """
    Lookahead points along the crossing vector and the position predicted half a second ahead.
    """
    p = np.asarray(ped.position, dtype=float)
    c = ped.crossing_vector
    points = [p + d * c for d in LOOKAHEAD]
    points.append(p + np.asarray(ped.velocity, dtype=float) * PREDICTION_HORIZON)
    return np.array(points)


def in_crossing_hazard(ped, vehicles, dt=None, radius=SAFETY_RADIUS):
    """
    Return ``True`` when any vehicle centre lies within ``radius`` of a hazard point of ``ped``.

    :param ped: pedestrian in a crossing state
    :param vehicles: vehicles to consider
    :param dt: tick length, unused by the geometric test
    :param radius: safety radius in metres

    """
    if not vehicles:
        return False
    points = hazard_points(ped)
    centres = np.array([v.position for v in vehicles], dtype=float)
    dists = np.linalg.norm(points[:, None, :] - centres[None, :, :], axis=2)
    return bool((dists <= radius).any())


def maybe_retreat(ped, rng):
    """
    Retreat lottery for a hazard event; only pedestrians in the first 40% of the road may draw.
    """
    if ped.crossing_progress >= RETREAT_WINDOW:
        return False
    return bool(rng.random() < RETREAT_PROBABILITY)


def update_patience(ped, dt, rng):
    """
    Accumulate waiting time on ``ped`` and decide what happens once its patience runs out.

    :param ped: a waiting pedestrian, modified in place
    :param dt: tick length in seconds
    :param rng: numpy random generator

    """
    ped.wait_timer += dt
    if ped.wait_timer < ped.archetype.patience_cap:
        return PatienceOutcome.KeepWaiting
    if rng.random() < 0.5:
        return PatienceOutcome.ForceSudden
    return PatienceOutcome.Abandon


def in_decision_window(ped, ego):
    """
    ``True`` iff the ego vehicle is 10 to 40 m away from ``ped`` and closing in.
    """
    if ego is None:
        return False
    diff = np.asarray(ped.position, dtype=float) - ego.position
    dist = float(np.hypot(*diff))
    lo, hi = DECISION_WINDOW
    if not lo <= dist <= hi:
        return False
    return float(np.dot(ego.velocity, diff)) / dist > 0.0


def running_speed(ped):
    return min(effective_crossing_speed(ped) * RUN_FACTOR, MAX_RUN_SPEED)


def escape_feasible(ped, world, vehicles, sensor_range=SENSING_RANGE):
    """
    ``True`` when running for the far side clears the road before the nearest vehicle arrives.
    """
    s = float(np.dot(ped.position, ped.crossing_vector))
    remaining = max(0.0, world.half_width - s)
    speed = running_speed(ped)
    if speed <= 0:
        return False
    return remaining / speed < min_ttc(ped.position, vehicles, sensor_range).value
