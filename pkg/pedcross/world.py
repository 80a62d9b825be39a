# -*- coding: utf-8 -*-
"""
Parametric road world: templates, lane typing, waypoint queries and vehicle kinematics.

The road is a straight segment whose centreline runs through the origin along ``road_axis``.
Lateral offsets are measured along the left normal of the road axis, longitudinal offsets along
the axis itself.
"""
from collections import OrderedDict
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from pedcross.generation_params import ConfigurationError

DT = 1.0 / 30

LANE_WIDTH = 3.5
SIDEWALK_WIDTH = 3.0
WORLD_LENGTH = 400.0

ACCEL_LIMIT = 3.0
BRAKE_LIMIT = 8.0
MAX_VEHICLE_SPEED = 25.0
STOPPED_SPEED = 0.1
STANDSTILL_GAP = 8.0
PED_HALF_WIDTH = 0.25


class LaneType(Enum):
    Driving = "Driving"
    Sidewalk = "Sidewalk"
    Shoulder = "Shoulder"
    Parking = "Parking"


class Side(Enum):
    Left = 1
    Right = -1


class DrivingProfile(Enum):
    Aggressive = "Aggressive"
    Normal = "Normal"
    Cautious = "Cautious"


# TTC below which a vehicle brakes for a pedestrian in its lane
YIELD_TTC = OrderedDict([
    (DrivingProfile.Cautious, 4.0),
    (DrivingProfile.Normal, 2.5),
    (DrivingProfile.Aggressive, 1.2),
])


@dataclass(frozen=True)
class RoadWorld:
    template_name: str
    road_axis: tuple
    n_driving_lanes: int
    lane_width: float = LANE_WIDTH
    sidewalk_width: float = SIDEWALK_WIDTH
    world_length: float = WORLD_LENGTH
    shoulder_width: float = 0.0
    # parking strip on the left side only
    parking_width: float = 0.0

    def __post_init__(self):
        if abs(np.hypot(*self.road_axis) - 1.0) > 1e-9:
            raise ConfigurationError("road_axis %s is not a unit vector" % (self.road_axis,))
        if self.n_driving_lanes < 1:
            raise ConfigurationError("A road needs at least one driving lane.")

    @property
    def w_road(self):
        return self.n_driving_lanes * self.lane_width

    @property
    def half_width(self):
        return self.w_road / 2

    @property
    def axis(self):
        return np.array(self.road_axis, dtype=float)

    @property
    def normal(self):
        ax, ay = self.road_axis
        return np.array((-ay, ax), dtype=float) + 0.0

    def lateral(self, position):
        return float(np.dot(position, self.normal))

    def longitudinal(self, position):
        return float(np.dot(position, self.axis))

    def point(self, longitudinal, lateral):
        return longitudinal * self.axis + lateral * self.normal

    def lane_centre(self, lane):
        return -self.half_width + self.lane_width * (lane + 0.5)

    def lane_heading(self, lane):
        """
        Lanes right of the centreline drive along the road axis, the others against it.
        """
        return self.axis if lane < self.n_driving_lanes / 2 else -self.axis

    def kerb_offset(self, side):
        """
        Unsigned lateral offset of the inner sidewalk edge on ``side``.
        """
        offset = self.half_width + self.shoulder_width
        if side is Side.Left:
            offset += self.parking_width
        return offset

    def bands(self):
        """
        Lateral bands ``(lo, hi, lane_type)`` from the right sidewalk to the left sidewalk.

            >>> [b[2].name for b in build_world("town_c").bands()]
            ['Sidewalk', 'Driving', 'Parking', 'Sidewalk']

        """
        h, sh, pk, sw = self.half_width, self.shoulder_width, self.parking_width, self.sidewalk_width
        bands = [(-h - sh - sw, -h - sh, LaneType.Sidewalk)]
        if sh > 0:
            bands.append((-h - sh, -h, LaneType.Shoulder))
        bands.append((-h, h, LaneType.Driving))
        if sh > 0:
            bands.append((h, h + sh, LaneType.Shoulder))
        if pk > 0:
            bands.append((h + sh, h + sh + pk, LaneType.Parking))
        bands.append((h + sh + pk, h + sh + pk + sw, LaneType.Sidewalk))
        return bands


TEMPLATES = OrderedDict([
    ("town_a", dict(road_axis=(1.0, 0.0), n_driving_lanes=2)),
    ("town_b", dict(road_axis=(0.0, 1.0), n_driving_lanes=4, shoulder_width=0.5)),
    ("town_c", dict(road_axis=(1.0, 0.0), n_driving_lanes=2, parking_width=2.5)),
    ("town_e", dict(road_axis=(0.6, 0.8), n_driving_lanes=6, shoulder_width=1.0)),
])


def build_world(template):
    """
    Build the road world registered as ``template``.

        >>> build_world("town_a").w_road
        7.0
        >>> build_world("town_e").w_road
        21.0

    """
    try:
        kwds = TEMPLATES[template]
    except KeyError:
        raise ConfigurationError("Unknown town template '%s', registered templates: %s" %
                                 (template, ", ".join(TEMPLATES)))
    return RoadWorld(template_name=template, **kwds)


def lane_type_at(world, position):
    """
    Classify ``position``; band boundaries belong to the more roadward band and anything off the
    road segment counts as sidewalk.

        >>> world = build_world("town_a")
        >>> lane_type_at(world, (10.0, 0.0)).name, lane_type_at(world, (10.0, 3.5)).name
        ('Driving', 'Driving')
        >>> lane_type_at(world, (10.0, -4.5)).name
        'Sidewalk'

    """
    position = np.asarray(position, dtype=float)
    lon = world.longitudinal(position)
    if not 0.0 <= lon <= world.world_length:
        return LaneType.Sidewalk

    lat = world.lateral(position)
    x = abs(lat)
    h, sh = world.half_width, world.shoulder_width
    pk = world.parking_width if lat > 0 else 0.0

    if x <= h:
        return LaneType.Driving
    if x <= h + sh:
        return LaneType.Shoulder
    if x <= h + sh + pk:
        return LaneType.Parking
    return LaneType.Sidewalk


def nearest_road_waypoint(world, position):
    """
    Project ``position`` onto the nearest driving-lane centreline, ties going to the lower lane.

    :returns: ``(waypoint, forward)``

    """
    position = np.asarray(position, dtype=float)
    lat = world.lateral(position)
    centres = np.array([world.lane_centre(k) for k in range(world.n_driving_lanes)])
    lane = int(np.argmin(np.abs(centres - lat)))
    waypoint = world.point(world.longitudinal(position), centres[lane])
    return waypoint, world.axis


def crossing_vector(world, ped_position, spawn_side=None):
    """
    Unit vector perpendicular to the road pointing toward the opposite sidewalk.

        >>> crossing_vector(build_world("town_a"), (5.0, -5.0)).tolist()
        [0.0, 1.0]
        >>> crossing_vector(build_world("town_b"), (6.0, 5.0)).tolist()
        [-1.0, 0.0]

    :param spawn_side: side the pedestrian came from, used when it stands on the centreline

    """
    lat = world.lateral(np.asarray(ped_position, dtype=float))
    if lat < 0 or (lat == 0 and spawn_side is not Side.Left):
        return world.normal
    return -world.normal + 0.0


@dataclass(eq=False)
class Vehicle:
    id: int
    position: np.ndarray
    velocity: np.ndarray
    heading: np.ndarray
    lane: int
    profile: DrivingProfile
    target_speed: float
    is_ego: bool = False
    half_extents: tuple = (2.3, 0.95)

    @property
    def speed(self):
        return float(np.hypot(*self.velocity))

    def to_dict(self):
        return OrderedDict([("id", self.id),
                            ("is_ego", self.is_ego),
                            ("lane", self.lane),
                            ("profile", self.profile),
                            ("position", self.position),
                            ("target_speed", self.target_speed)])


@dataclass(frozen=True)
class EgoPose:
    position: np.ndarray
    forward: np.ndarray
    camera_height: float = 1.2

    def __post_init__(self):
        if abs(np.hypot(*self.forward) - 1.0) > 1e-9:
            raise ValueError("forward must be a unit vector")


def ego_pose(vehicle, camera_height=1.2):
    """
    Camera pose of ``vehicle``: mounted at its centre, looking along its lane heading.
    """
    return EgoPose(position=np.array(vehicle.position, dtype=float),
                   forward=np.array(vehicle.heading, dtype=float),
                   camera_height=camera_height)


def _yields(vehicle, pedestrians, world):
    speed = vehicle.speed
    lane_lat = world.lane_centre(vehicle.lane)
    threshold = YIELD_TTC[vehicle.profile]

    for ped in pedestrians:
        if lane_type_at(world, ped.position) is not LaneType.Driving:
            continue
        if abs(world.lateral(ped.position) - lane_lat) > world.lane_width / 2 + PED_HALF_WIDTH:
            continue
        gap = float(np.dot(ped.position - vehicle.position, vehicle.heading)) - vehicle.half_extents[0]
        if gap <= 0:
            continue
        if speed > STOPPED_SPEED:
            if gap / speed < threshold:
                return True
        elif gap < STANDSTILL_GAP:
            return True
    return False


def step_vehicle(vehicle, pedestrians, world, dt=DT):
    """
    Advance ``vehicle`` by one tick of lane-following kinematics.

    The vehicle brakes when a pedestrian on a driving lane is ahead in its lane with a TTC below
    its profile threshold, holds at standstill while that pedestrian stays close, and otherwise
    accelerates toward its target speed.

    :param vehicle: vehicle state of the previous tick
    :param pedestrians: pedestrians of the previous tick
    :param world: road world
    :param dt: tick length in seconds

    """
    speed = vehicle.speed
    if _yields(vehicle, pedestrians, world):
        new_speed = max(0.0, speed - BRAKE_LIMIT * dt)
    else:
        dv = vehicle.target_speed - speed
        new_speed = speed + min(max(dv, -BRAKE_LIMIT * dt), ACCEL_LIMIT * dt)
    new_speed = min(max(new_speed, 0.0), vehicle.target_speed, MAX_VEHICLE_SPEED)

    velocity = new_speed * vehicle.heading
    return replace(vehicle, position=vehicle.position + velocity * dt, velocity=velocity)


def spawn_vehicle(world, id, lane, longitudinal, profile, target_speed, is_ego=False):
    heading = np.array(world.lane_heading(lane), dtype=float)
    position = world.point(longitudinal, world.lane_centre(lane))
    return Vehicle(id=id, position=position, velocity=np.zeros(2), heading=heading, lane=lane,
                   profile=profile, target_speed=float(target_speed), is_ego=is_ego)

