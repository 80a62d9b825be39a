# -*- coding: utf-8 -*-
"""
Scenario population.

Crossing rates are controlled by four layers: crosser allocation at spawn, behaviour type
assignment, mid-road jaywalker injection and group formation. Traffic is spawned alongside.
Every layer draws from its own random sub-stream of the clip seed.
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass, field, replace

import numpy as np

from pedcross.behaviour import (ARCHETYPES, GROUP_JITTER, BehaviourState, BehaviourType, ControlMode, Pedestrian,
                                Role, sample_archetype, sample_speed_profile)
from pedcross.generation_params import ConfigurationError
from pedcross.utils.cli import pop_prefixed_params
from pedcross.utils.util import digest
from pedcross.world import LANE_WIDTH, DrivingProfile, Side, crossing_vector, spawn_vehicle

logger = logging.getLogger("pedcross.spawner")

PEDESTRIAN_COUNT = (5, 10)
VEHICLE_COUNT = (5, 10)
MAX_JAYWALKERS = 2

EGO_START = 20.0
EGO_SPEED = (8.0, 12.0)
TRAFFIC_SPAN = (0.0, 200.0)
HEADWAY = 8.0
PLACEMENT_ATTEMPTS = 50

CROSSER_AHEAD = (10.0, 55.0)
NON_CROSSER_AHEAD = (5.0, 70.0)
JAYWALKER_AHEAD = (15.0, 50.0)
KERB_DEPTH = (0.2, 0.8)
RIGHT_SIDE_PROBABILITY = 0.6
WALK_TIMER = (0.3, 1.0)
HEIGHT = (1.6, 1.9)

MAX_INTENSITY = 2.0

GROUP_SPAN = 5.0
GROUP_RADIUS = 2.0
MAX_GROUP_SIZE = 3

DRIVING_PROFILE_MIX = OrderedDict([
    (DrivingProfile.Aggressive, 0.20),
    (DrivingProfile.Normal, 0.60),
    (DrivingProfile.Cautious, 0.20),
])

TARGET_SPEEDS = OrderedDict([
    (DrivingProfile.Aggressive, (12.0, 16.0)),
    (DrivingProfile.Normal, (8.0, 12.0)),
    (DrivingProfile.Cautious, (5.0, 8.0)),
])


def override_mix(mix, overrides):
    """
    Replace entries of a probability mix and rescale the remaining ones to fill up to one.

        >>> mix = override_mix(OrderedDict([("normal", 0.5), ("sudden", 0.25), ("jaywalk", 0.25)]), {"sudden": 0.5})
        >>> [round(p, 4) for p in mix.values()]
        [0.3333, 0.5, 0.1667]

    :param mix: ordered mapping of probabilities summing to one
    :param overrides: entries to fix

    """
    fixed = sum(overrides.values())
    if fixed > 1.0 + 1e-9:
        raise ConfigurationError("Behaviour mix overrides %s exceed one." % dict(overrides))
    free = [k for k in mix if k not in overrides]
    if not free and abs(fixed - 1.0) > 1e-9:
        raise ConfigurationError("Behaviour mix overrides %s do not sum to one." % dict(overrides))
    free_total = sum(mix[k] for k in free)

    result = OrderedDict()
    for k in mix:
        if k in overrides:
            result[k] = float(overrides[k])
        elif free_total > 0:
            result[k] = mix[k] * (1.0 - fixed) / free_total
        else:
            result[k] = (1.0 - fixed) / len(free)
    return result


@dataclass(frozen=True)
class CrossingRateConfig:
    crosser_ratio: float = 0.90
    crossing_behaviors_ratio: float = 0.75
    normal_ratio: float = 0.50
    sudden_ratio: float = 0.25
    jaywalk_ratio: float = 0.25
    lateral_offset: float = 1.5
    group_probability: float = 0.40
    crossing_ratio_target: float = None

    def __post_init__(self):
        for name in ("crosser_ratio", "crossing_behaviors_ratio", "normal_ratio", "sudden_ratio", "jaywalk_ratio",
                     "group_probability"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigurationError("%s=%s is not a probability" % (name, value))
        if abs(self.normal_ratio + self.sudden_ratio + self.jaywalk_ratio - 1.0) > 1e-9:
            raise ConfigurationError("behaviour mix %s does not sum to one" % list(self.behaviour_mix.values()))
        if not 0.0 <= self.lateral_offset <= LANE_WIDTH / 2:
            raise ConfigurationError("lateral_offset must lie in [0, %.2f] m" % (LANE_WIDTH / 2))

    @property
    def behaviour_mix(self):
        return OrderedDict([(BehaviourType.NormalCrossing, self.normal_ratio),
                            (BehaviourType.SuddenCrossing, self.sudden_ratio),
                            (BehaviourType.Jaywalking, self.jaywalk_ratio)])

    @classmethod
    def from_params(cls, params):
        """
        Build the crossing-rate layers from generation parameters: ``crossing/`` keys first, then the
        ``sudden_crossing_ratio`` and ``jaywalking_ratio`` overrides, then the target crossing ratio.
        """
        kwds = pop_prefixed_params("crossing", params.dict())

        mix = OrderedDict([("normal", kwds.pop("normal_ratio")),
                           ("sudden", kwds.pop("sudden_ratio")),
                           ("jaywalk", kwds.pop("jaywalk_ratio"))])
        overrides = OrderedDict()
        if params["sudden_crossing_ratio"] is not None:
            overrides["sudden"] = params["sudden_crossing_ratio"]
        if params["jaywalking_ratio"] is not None:
            overrides["jaywalk"] = params["jaywalking_ratio"]
        if overrides:
            mix = override_mix(mix, overrides)

        cfg = cls(normal_ratio=mix["normal"], sudden_ratio=mix["sudden"], jaywalk_ratio=mix["jaywalk"], **kwds)
        target = params["crossing_ratio"]
        if target is None:
            return cfg
        if params["crossing_intensity"] is not None:
            return scale_crossing_layers(cfg, params["crossing_intensity"], target)
        return resolve_crossing_rates(cfg, target)

    def to_dict(self):
        return OrderedDict((k, getattr(self, k)) for k in self.__dataclass_fields__)


def mean_crossing_propensity():
    """
    Archetype-weighted probability that a crosser passes its archetype check.

        >>> round(mean_crossing_propensity(), 6)
        0.75

    """
    return sum(a.proportion * a.crossing_prob for a in ARCHETYPES.values())


def expected_crosser_fraction(cfg):
    """
    Analytic fraction of spawned pedestrians that are committed crossers, counting injected
    mid-road jaywalkers.

        >>> round(expected_crosser_fraction(CrossingRateConfig()), 4)
        0.5247

    """
    lo, hi = PEDESTRIAN_COUNT
    counts = range(lo, hi + 1)
    e_side = float(np.mean(counts))
    # jaywalkers are capped so that the total stays within the pedestrian count range
    e_jay = cfg.jaywalk_ratio * float(np.mean([np.mean([min(j, hi - n) for j in range(1, MAX_JAYWALKERS + 1)])
                                               for n in counts]))
    side = cfg.crosser_ratio * mean_crossing_propensity() * cfg.crossing_behaviors_ratio
    return (e_side * side + e_jay) / (e_side + e_jay)


def layers_enabled(cfg):
    return cfg.crosser_ratio > 0 and cfg.crossing_behaviors_ratio > 0


def scale_crossing_layers(cfg, intensity, target=None):
    """
    Crossing-rate layers at a crossing ``intensity`` in ``[0, MAX_INTENSITY]``.

    Up to 1, ``crosser_ratio`` and ``crossing_behaviors_ratio`` are scaled by a common factor
    that reaches one for both at intensity 1. Beyond that both stay at one and
    ``group_probability`` rises linearly from its configured value to one.

        >>> cfg = CrossingRateConfig()
        >>> scale_crossing_layers(cfg, 0.0).crosser_ratio
        0.0
        >>> top = scale_crossing_layers(cfg, 1.5)
        >>> top.crosser_ratio, top.crossing_behaviors_ratio, round(top.group_probability, 6)
        (1.0, 1.0, 0.7)

    :param cfg: configured crossing-rate layers
    :param intensity: crossing intensity
    :param target: recorded as ``crossing_ratio_target``

    """
    if not layers_enabled(cfg):
        return replace(cfg, crossing_ratio_target=target)
    intensity = min(max(float(intensity), 0.0), MAX_INTENSITY)
    if intensity >= 1.0:
        crosser_ratio, behaviors_ratio = 1.0, 1.0
    else:
        s = intensity * max(1.0 / cfg.crosser_ratio, 1.0 / cfg.crossing_behaviors_ratio)
        crosser_ratio = min(1.0, cfg.crosser_ratio * s)
        behaviors_ratio = min(1.0, cfg.crossing_behaviors_ratio * s)
    group_probability = cfg.group_probability
    if intensity > 1.0:
        group_probability += (intensity - 1.0) * (1.0 - cfg.group_probability)
    return replace(cfg, crosser_ratio=crosser_ratio, crossing_behaviors_ratio=behaviors_ratio,
                   group_probability=min(1.0, group_probability), crossing_ratio_target=target)


def analytic_intensity(cfg, target):
    """
    Intensity at which :func:`expected_crosser_fraction` equals ``target``, clipped to ``[0, 1]``.
    """
    def fraction(intensity):
        return expected_crosser_fraction(scale_crossing_layers(cfg, intensity))

    if fraction(1.0) < target:
        logger.warning("target crossing ratio %.2f is out of reach at spawn, using %.3f", target, fraction(1.0))
        return 1.0
    if fraction(0.0) > target:
        logger.warning("target crossing ratio %.2f is below the jaywalker share", target)
        return 0.0

    lo, hi = 0.0, 1.0
    for _ in range(100):
        mid = (lo + hi) / 2
        if fraction(mid) < target:
            lo = mid
        else:
            hi = mid
    return hi


def resolve_crossing_rates(cfg, target):
    """
    Scale ``crosser_ratio`` and ``crossing_behaviors_ratio`` by a common factor (each capped at one)
    so that :func:`expected_crosser_fraction` equals ``target``.

        >>> cfg = resolve_crossing_rates(CrossingRateConfig(), 0.6)
        >>> round(expected_crosser_fraction(cfg), 6)
        0.6

    """
    if not layers_enabled(cfg):
        logger.warning("crossing layers are disabled, target crossing ratio %.2f ignored", target)
        return replace(cfg, crossing_ratio_target=target)
    return scale_crossing_layers(cfg, analytic_intensity(cfg, target), target)


def _uniform(rng, bounds):
    return float(rng.uniform(*bounds))


def allocate_roles(n, cfg, ego, world, rng, start_id=0):
    """
    Spawn ``n`` sidewalk pedestrians ahead of the ego vehicle.

    Each pedestrian is a potential crosser with probability ``crosser_ratio``. Potential crossers
    stand close to the kerb 10 to 55 m ahead of the ego vehicle, the others anywhere on a sidewalk
    5 to 70 m ahead.

    :param n: number of pedestrians
    :param cfg: crossing-rate configuration
    :param ego: ego vehicle
    :param world: road world
    :param rng: numpy random generator
    :param start_id: id of the first pedestrian

    """
    ego_lon = world.longitudinal(ego.position)
    pedestrians = []
    for i in range(n):
        crosser = bool(rng.random() < cfg.crosser_ratio)
        archetype = sample_archetype(rng)
        base_speed = archetype.draw_speed(rng)
        height = _uniform(rng, HEIGHT)
        side = Side.Right if rng.random() < RIGHT_SIDE_PROBABILITY else Side.Left
        if crosser:
            ahead = _uniform(rng, CROSSER_AHEAD)
            depth = _uniform(rng, KERB_DEPTH)
        else:
            ahead = _uniform(rng, NON_CROSSER_AHEAD)
            depth = _uniform(rng, (0.3, world.sidewalk_width - 0.3))
        walk_direction = 1.0 if rng.random() < 0.5 else -1.0
        walk_timer = _uniform(rng, WALK_TIMER)

        position = world.point(ego_lon + ahead, side.value * (world.kerb_offset(side) + depth))
        pedestrians.append(Pedestrian(id=start_id + i, position=position, archetype=archetype,
                                      base_speed=base_speed, height=height,
                                      role=Role.PotentialCrosser if crosser else Role.NonCrosser,
                                      spawn_side=side, walk_direction=walk_direction,
                                      state_duration=walk_timer))
    return pedestrians


def assign_behaviour_types(crossers, cfg, rng):
    """
    Run the archetype check of every potential crosser and type a ``crossing_behaviors_ratio``
    share of them according to the behaviour mix. Crossers are modified in place.
    """
    types = list(cfg.behaviour_mix)
    p = np.array(list(cfg.behaviour_mix.values()))
    p = p / p.sum()
    for ped in crossers:
        ped.committed = bool(rng.random() < ped.archetype.crossing_prob)
        if rng.random() < cfg.crossing_behaviors_ratio:
            ped.behaviour_type = types[int(rng.choice(len(types), p=p))]
    return crossers


def inject_jaywalkers(cfg, world, ego, rng, start_id=0, max_count=MAX_JAYWALKERS):
    """
    With probability ``jaywalk_ratio`` spawn one or two jaywalkers directly on driving lanes.

    :param cfg: crossing-rate configuration
    :param world: road world
    :param ego: ego vehicle
    :param rng: numpy random generator
    :param start_id: id of the first jaywalker
    :param max_count: cap keeping the pedestrian count of the clip in range

    """
    if not rng.random() < cfg.jaywalk_ratio:
        return []
    count = min(int(rng.integers(1, MAX_JAYWALKERS + 1)), max(max_count, 0))

    ego_lon = world.longitudinal(ego.position)
    jaywalkers = []
    for i in range(count):
        archetype = sample_archetype(rng)
        base_speed = archetype.draw_speed(rng)
        height = _uniform(rng, HEIGHT)
        lane = int(rng.integers(world.n_driving_lanes))
        lateral = world.lane_centre(lane) + _uniform(rng, (-cfg.lateral_offset, cfg.lateral_offset))
        position = world.point(ego_lon + _uniform(rng, JAYWALKER_AHEAD), lateral)

        side = Side.Left if lateral > 0 else Side.Right
        cv = crossing_vector(world, position, side)
        progress = (float(np.dot(position, cv)) + world.half_width) / world.w_road
        jaywalkers.append(Pedestrian(id=start_id + i, position=position, archetype=archetype,
                                     base_speed=base_speed, height=height, role=Role.MidRoadJaywalker,
                                     spawn_side=side, state=BehaviourState.JAYWALKING,
                                     crossing_vector=cv, crossing_progress=min(max(progress, 0.0), 1.0),
                                     behaviour_type=BehaviourType.Jaywalking, committed=True,
                                     control_mode=ControlMode.Direct, visited_driving=True,
                                     onset_tick=0, onset_state=BehaviourState.JAYWALKING))
    return jaywalkers


def _commitment_rank(ped):
    if not ped.committed:
        return 0
    return 2 if ped.behaviour_type is not None else 1


def candidate_groups(crossers, world):
    """
    Runs of up to three crossers on the same side of the road within 5 m of the first one.
    """
    ordered = sorted(crossers, key=lambda p: (p.spawn_side.value, world.longitudinal(p.position), p.id))
    candidates = []
    i = 0
    while i < len(ordered):
        head = ordered[i]
        head_lon = world.longitudinal(head.position)
        members = [head]
        j = i + 1
        while (j < len(ordered) and len(members) < MAX_GROUP_SIZE and ordered[j].spawn_side is head.spawn_side
               and world.longitudinal(ordered[j].position) - head_lon <= GROUP_SPAN):
            members.append(ordered[j])
            j += 1
        if len(members) > 1:
            candidates.append(members)
            i = j
        else:
            i += 1
    return candidates


def form_groups(crossers, cfg, rng, world, first_group_id=0):
    """
    Turn candidate groups into crossing groups with probability ``group_probability``.

    The member with the strongest commitment leads (ties to the lowest id); followers take over its
    commitment and behaviour type, walk with it and are pulled within 2 m of it.

    :returns: list of formed groups, each a list of pedestrians

    """
    groups = []
    for members in candidate_groups(crossers, world):
        if not rng.random() < cfg.group_probability:
            continue
        group_id = first_group_id + len(groups)
        leader = min(members, key=lambda p: (-_commitment_rank(p), p.id))
        for member in members:
            member.group_id = group_id
            member.is_group_leader = member is leader
            if member is leader:
                continue
            member.committed = leader.committed
            member.behaviour_type = leader.behaviour_type
            member.walk_direction = leader.walk_direction
            member.state_duration = leader.state_duration
            member.sync_jitter = int(rng.integers(0, GROUP_JITTER + 1))
            offset = member.position - leader.position
            dist = float(np.hypot(*offset))
            if dist > GROUP_RADIUS:
                member.position = leader.position + offset * (GROUP_RADIUS / dist)
        groups.append(members)
    return groups


def sample_driving_profile(rng):
    profiles = list(DRIVING_PROFILE_MIX)
    return profiles[int(rng.choice(len(profiles), p=list(DRIVING_PROFILE_MIX.values())))]


def sample_vehicle_count(rng):
    lo, hi = VEHICLE_COUNT
    return int(rng.integers(lo, hi + 1))


def place_traffic(count, world, rng, first_id=0):
    """
    Place the ego vehicle and up to ``count`` traffic vehicles keeping an 8 m same-lane headway.
    Vehicles that cannot be placed are dropped with a warning.
    """
    ego = spawn_vehicle(world, first_id, 0, EGO_START, DrivingProfile.Normal, _uniform(rng, EGO_SPEED), is_ego=True)
    vehicles = [ego]
    for _ in range(count):
        profile = sample_driving_profile(rng)
        target_speed = _uniform(rng, TARGET_SPEEDS[profile])
        lane = int(rng.integers(world.n_driving_lanes))
        for _ in range(PLACEMENT_ATTEMPTS):
            lon = _uniform(rng, TRAFFIC_SPAN)
            if all(v.lane != lane or abs(world.longitudinal(v.position) - lon) >= HEADWAY for v in vehicles):
                break
        else:
            logger.warning("no room for another vehicle in lane %d, vehicle dropped", lane)
            continue
        vehicles.append(spawn_vehicle(world, first_id + len(vehicles), lane, lon, profile, target_speed))
    return vehicles


def spawn_traffic(cfg, world, rng):
    """
    Ego vehicle plus five to ten traffic vehicles with the 20/60/20 driving profile mix.
    """
    return place_traffic(sample_vehicle_count(rng), world, rng)


@dataclass
class SpawnPlan:
    pedestrians: list
    vehicles: list
    seed: int
    dropped_vehicles: int = 0
    groups: list = field(default_factory=list)

    def to_dict(self):
        return OrderedDict([("seed", self.seed),
                            ("pedestrians", [p.to_dict() for p in self.pedestrians]),
                            ("vehicles", [v.to_dict() for v in self.vehicles]),
                            ("groups", self.groups),
                            ("dropped_vehicles", self.dropped_vehicles)])

    def digest(self):
        return digest(self.to_dict())


def build_spawn_plan(cfg, world, weather, stream):
    """
    Populate a clip.

    :param cfg: crossing-rate configuration
    :param world: road world
    :param weather: weather condition, forcing cautious speed profiles when hard
    :param stream: :class:`pedcross.utils.util.RngStream` of the clip

    """
    vehicles = spawn_traffic(cfg, world, stream.generator("traffic"))
    # the first draw of the traffic stream is the requested vehicle count
    requested = sample_vehicle_count(stream.generator("traffic"))
    ego = vehicles[0]

    roles_rng = stream.generator("roles")
    lo, hi = PEDESTRIAN_COUNT
    n_side = int(roles_rng.integers(lo, hi + 1))
    pedestrians = allocate_roles(n_side, cfg, ego, world, roles_rng)
    jaywalkers = inject_jaywalkers(cfg, world, ego, stream.generator("jaywalkers"), start_id=n_side,
                                   max_count=min(MAX_JAYWALKERS, hi - n_side))

    crossers = [p for p in pedestrians if p.role is Role.PotentialCrosser]
    assign_behaviour_types(crossers, cfg, stream.generator("behaviour"))
    groups = form_groups(crossers, cfg, stream.generator("groups"), world)

    pedestrians += jaywalkers
    profiles_rng = stream.generator("profiles")
    for ped in pedestrians:
        ped.speed_profile = sample_speed_profile(profiles_rng, weather, ped.archetype)
    for ped in jaywalkers:
        ped.crossing_speed = ped.base_speed * ped.speed_profile.multiplier

    dropped = requested + 1 - len(vehicles)
    if dropped:
        logger.warning("%d vehicles dropped for lack of room", dropped)

    return SpawnPlan(pedestrians=pedestrians, vehicles=vehicles, seed=stream.root_seed, dropped_vehicles=dropped,
                     groups=[[m.id for m in g] for g in groups])
