# -*- coding: utf-8 -*-
"""
Pedestrian behaviour: character archetypes, speed profiles, the twelve-state behavioural machine
and crossing groups.

A pedestrian is advanced one tick at a time by :func:`fsm_step`. State changes only ever follow
the edges of :data:`TRANSITIONS`; anything else raises :class:`IllegalTransitionError`.
"""
from collections import OrderedDict
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from pedcross.algorithms.gap_acceptance import (RETREAT_WINDOW, SENSING_RANGE, PatienceOutcome, escape_feasible,
                                                gap_accepted, in_crossing_hazard, in_decision_window,
                                                maybe_retreat, running_speed, update_patience)
from pedcross.weather import Difficulty
from pedcross.world import DT, STOPPED_SPEED, LaneType, Side, crossing_vector, lane_type_at

SCAN_DURATION = (0.5, 1.5)
DISTRACTION_DURATION = (2.0, 5.0)
DISTRACTION_ONSET = 0.02
DISTRACTED_PAUSE = (1.0, 3.0)
DISTRACTED_PAUSE_ONSET = 0.02
IDLE_LOOK_ONSET = 0.005
OPPORTUNISTIC_LOOK_ONSET = 0.01
OPPORTUNISTIC_COOLDOWN = 2.0
SUDDEN_TRIGGER = 0.15
MAX_PAUSE = 3.0
GROUP_JITTER = 15


class SimulationError(RuntimeError):
    pass


class IllegalTransitionError(SimulationError):
    pass


class GroupConsistencyError(SimulationError):
    pass


class BehaviourState(Enum):
    WALKING_SIDEWALK = "WALKING_SIDEWALK"
    LOOKING_AROUND = "LOOKING_AROUND"
    CHECKING_TRAFFIC = "CHECKING_TRAFFIC"
    HESITATING = "HESITATING"
    CROSSING_ROAD = "CROSSING_ROAD"
    SUDDEN_CROSSING = "SUDDEN_CROSSING"
    JAYWALKING = "JAYWALKING"
    RUNNING_ACROSS = "RUNNING_ACROSS"
    PAUSING_MID_CROSS = "PAUSING_MID_CROSS"
    DISTRACTED_BEHAVIOR = "DISTRACTED_BEHAVIOR"
    FINISHED_CROSSING = "FINISHED_CROSSING"
    RETREAT = "RETREAT"


S = BehaviourState

CROSSING_STATES = frozenset((S.CROSSING_ROAD, S.SUDDEN_CROSSING, S.JAYWALKING, S.RUNNING_ACROSS,
                             S.PAUSING_MID_CROSS))
MOVING_CROSSING_STATES = CROSSING_STATES - {S.PAUSING_MID_CROSS}
SIDEWALK_STATES = frozenset((S.WALKING_SIDEWALK, S.LOOKING_AROUND, S.CHECKING_TRAFFIC, S.HESITATING,
                             S.DISTRACTED_BEHAVIOR))

_IN_CROSSING = frozenset((S.RUNNING_ACROSS, S.PAUSING_MID_CROSS, S.RETREAT, S.FINISHED_CROSSING))

TRANSITIONS = OrderedDict([
    (S.WALKING_SIDEWALK, frozenset((S.LOOKING_AROUND, S.DISTRACTED_BEHAVIOR, S.SUDDEN_CROSSING))),
    (S.LOOKING_AROUND, frozenset((S.WALKING_SIDEWALK, S.CHECKING_TRAFFIC, S.JAYWALKING))),
    (S.CHECKING_TRAFFIC, frozenset((S.HESITATING, S.CROSSING_ROAD, S.WALKING_SIDEWALK, S.SUDDEN_CROSSING))),
    (S.HESITATING, frozenset((S.CROSSING_ROAD, S.CHECKING_TRAFFIC, S.WALKING_SIDEWALK, S.SUDDEN_CROSSING))),
    (S.CROSSING_ROAD, _IN_CROSSING),
    (S.SUDDEN_CROSSING, _IN_CROSSING),
    (S.JAYWALKING, _IN_CROSSING),
    (S.RUNNING_ACROSS, frozenset((S.PAUSING_MID_CROSS, S.RETREAT, S.FINISHED_CROSSING))),
    (S.PAUSING_MID_CROSS, frozenset((S.CROSSING_ROAD, S.RUNNING_ACROSS))),
    (S.DISTRACTED_BEHAVIOR, frozenset((S.WALKING_SIDEWALK,))),
    (S.FINISHED_CROSSING, frozenset((S.WALKING_SIDEWALK,))),
    (S.RETREAT, frozenset((S.WALKING_SIDEWALK,))),
])


def allowed_transitions(state):
    """
    States reachable from ``state`` in one transition.

        >>> sorted(s.name for s in allowed_transitions(BehaviourState.FINISHED_CROSSING))
        ['WALKING_SIDEWALK']
        >>> sorted(s.name for s in allowed_transitions(BehaviourState.CHECKING_TRAFFIC))
        ['CROSSING_ROAD', 'HESITATING', 'SUDDEN_CROSSING', 'WALKING_SIDEWALK']

    """
    return TRANSITIONS[state]


class Role(Enum):
    PotentialCrosser = "PotentialCrosser"
    NonCrosser = "NonCrosser"
    MidRoadJaywalker = "MidRoadJaywalker"


class BehaviourType(Enum):
    NormalCrossing = "NormalCrossing"
    SuddenCrossing = "SuddenCrossing"
    Jaywalking = "Jaywalking"


class ControlMode(Enum):
    Path = "Path"
    Direct = "Direct"


class SpeedProfile(Enum):
    Cautious = 0.8
    Normal = 1.0
    Rushed = 1.3
    Distracted = 0.9

    @property
    def multiplier(self):
        return self.value


class _Intent(Enum):
    Walker = 0
    Opportunistic = 1
    Normal = 2
    Sudden = 3
    Jaywalk = 4


@dataclass(frozen=True)
class Archetype:
    name: str
    proportion: float
    speed_range: tuple
    hesitation_range: tuple
    attention: float
    crossing_prob: float
    tau_ttc: float
    delta_safety: float
    patience_cap: float

    def draw_speed(self, rng):
        return float(rng.uniform(*self.speed_range))

    def draw_hesitation(self, rng):
        return float(rng.uniform(*self.hesitation_range))

    def describe(self):
        return OrderedDict((k, getattr(self, k)) for k in self.__dataclass_fields__)


def _archetype(name, proportion, speed_range, hesitation_range, attention, crossing_prob):
    return Archetype(name=name, proportion=proportion, speed_range=speed_range,
                     hesitation_range=hesitation_range, attention=attention, crossing_prob=crossing_prob,
                     tau_ttc=3.0 + 3.0 * attention,
                     delta_safety=0.5 + 0.5 * attention,
                     patience_cap=6.0 + 12.0 * attention)


ARCHETYPES = OrderedDict((a.name, a) for a in (
    _archetype("business_person", 0.30, (1.4, 1.8), (0.3, 0.8), 0.5, 0.85),
    _archetype("casual_person", 0.25, (1.0, 1.4), (0.5, 1.5), 0.7, 0.70),
    _archetype("elderly_person", 0.10, (0.6, 1.0), (1.0, 2.0), 0.9, 0.50),
    _archetype("young_person", 0.20, (1.2, 2.0), (0.2, 0.6), 0.4, 0.90),
    _archetype("parent_with_child", 0.15, (0.8, 1.2), (0.8, 1.8), 0.8, 0.60),
))

_ARCHETYPE_P = np.array([a.proportion for a in ARCHETYPES.values()])
_ARCHETYPE_P = _ARCHETYPE_P / _ARCHETYPE_P.sum()


def sample_archetype(rng):
    """
    Categorical archetype draw.

        >>> sample_archetype(np.random.default_rng(0)).name in ARCHETYPES
        True

    """
    return list(ARCHETYPES.values())[int(rng.choice(len(ARCHETYPES), p=_ARCHETYPE_P))]


SPEED_PROFILE_MIX = OrderedDict([
    (SpeedProfile.Normal, 0.55),
    (SpeedProfile.Rushed, 0.15),
    (SpeedProfile.Distracted, 0.20),
    (SpeedProfile.Cautious, 0.10),
])


def sample_speed_profile(rng, weather, archetype):
    """
    Situational speed profile: poor visibility and elderly agents are always cautious.
    """
    if weather.difficulty is Difficulty.Hard or archetype.name == "elderly_person":
        return SpeedProfile.Cautious
    profiles = list(SPEED_PROFILE_MIX)
    return profiles[int(rng.choice(len(profiles), p=list(SPEED_PROFILE_MIX.values())))]


@dataclass(frozen=True)
class TransitionEvent:
    ped_id: int
    from_state: BehaviourState
    to_state: BehaviourState
    tick: int
    cause: str

    def to_dict(self):
        return OrderedDict([("kind", "transition"), ("tick", self.tick), ("ped_id", self.ped_id),
                            ("from", self.from_state), ("to", self.to_state), ("cause", self.cause)])


@dataclass(frozen=True)
class HazardEvent:
    tick: int
    ped_id: int
    state: BehaviourState
    progress: float
    eligible: bool
    retreated: bool
    response: BehaviourState

    def to_dict(self):
        return OrderedDict([("kind", "hazard"), ("tick", self.tick), ("ped_id", self.ped_id),
                            ("state", self.state), ("progress", self.progress), ("eligible", self.eligible),
                            ("retreated", self.retreated), ("response", self.response)])


@dataclass(eq=False)
class Pedestrian:
    id: int
    position: np.ndarray
    archetype: Archetype
    base_speed: float
    height: float
    role: Role
    spawn_side: Side
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(2))
    speed_profile: SpeedProfile = SpeedProfile.Normal
    state: BehaviourState = BehaviourState.WALKING_SIDEWALK
    state_timer: float = 0.0
    state_duration: float = 0.0
    wait_timer: float = 0.0
    crossing_vector: np.ndarray = None
    crossing_progress: float = 0.0
    behaviour_type: BehaviourType = None
    committed: bool = False
    group_id: int = None
    is_group_leader: bool = False
    crossing_speed: float = 0.0
    walk_direction: float = 1.0
    control_mode: ControlMode = ControlMode.Path
    visited_driving: bool = False
    attempt_done: bool = False
    hazard_active: bool = False
    pause_timer: float = 0.0
    sync_jitter: int = 0
    onset_tick: int = None
    onset_state: BehaviourState = None

    def clone(self):
        cv = None if self.crossing_vector is None else np.array(self.crossing_vector, dtype=float)
        return replace(self, position=np.array(self.position, dtype=float),
                       velocity=np.array(self.velocity, dtype=float), crossing_vector=cv)

    @property
    def speed(self):
        return float(np.hypot(*self.velocity))

    @property
    def in_crossing_state(self):
        return self.state in CROSSING_STATES

    @property
    def is_follower(self):
        return self.group_id is not None and not self.is_group_leader

    def to_dict(self):
        return OrderedDict([("id", self.id),
                            ("role", self.role),
                            ("archetype", self.archetype.name),
                            ("behaviour_type", self.behaviour_type),
                            ("committed", self.committed),
                            ("group_id", self.group_id),
                            ("is_group_leader", self.is_group_leader),
                            ("spawn_side", self.spawn_side),
                            ("speed_profile", self.speed_profile),
                            ("base_speed", self.base_speed),
                            ("height", self.height),
                            ("position", self.position),
                            ("state", self.state)])


def _intent(ped):
    if ped.attempt_done or ped.role is Role.NonCrosser or not ped.committed:
        return _Intent.Walker
    if ped.behaviour_type is None:
        return _Intent.Opportunistic
    return {BehaviourType.NormalCrossing: _Intent.Normal,
            BehaviourType.SuddenCrossing: _Intent.Sudden,
            BehaviourType.Jaywalking: _Intent.Jaywalk}[ped.behaviour_type]


def find_ego(vehicles):
    for vehicle in vehicles:
        if vehicle.is_ego:
            return vehicle
    return None


def _duration(state, ped, rng):
    if rng is None:
        return 0.0
    if state in (S.LOOKING_AROUND, S.CHECKING_TRAFFIC):
        return float(rng.uniform(*SCAN_DURATION))
    if state is S.HESITATING:
        return ped.archetype.draw_hesitation(rng)
    if state is S.DISTRACTED_BEHAVIOR:
        return float(rng.uniform(*DISTRACTION_DURATION))
    if state is S.WALKING_SIDEWALK and _intent(ped) is _Intent.Opportunistic:
        return OPPORTUNISTIC_COOLDOWN
    return 0.0


def _enter(ped, new_state, tick, cause, world, rng):
    """
    Move ``ped`` into ``new_state`` in place and return the transition event.
    """
    old_state = ped.state
    if new_state not in TRANSITIONS[old_state]:
        raise IllegalTransitionError("Pedestrian %d: %s -> %s is not a registered transition (tick %d)" %
                                     (ped.id, old_state.name, new_state.name, tick))

    ped.state = new_state
    ped.state_timer = 0.0
    ped.pause_timer = 0.0
    ped.state_duration = _duration(new_state, ped, rng)

    if new_state in CROSSING_STATES and old_state in SIDEWALK_STATES:
        ped.crossing_vector = crossing_vector(world, ped.position, ped.spawn_side)
        ped.crossing_speed = ped.base_speed * ped.speed_profile.multiplier
        ped.onset_tick = tick
        ped.onset_state = new_state
        ped.wait_timer = 0.0

    if new_state in CROSSING_STATES or new_state in (S.RETREAT, S.FINISHED_CROSSING):
        ped.control_mode = ControlMode.Direct
    else:
        ped.control_mode = ControlMode.Path
        ped.hazard_active = False

    if new_state not in CROSSING_STATES and new_state is not S.RETREAT:
        ped.crossing_progress = 0.0

    return TransitionEvent(ped.id, old_state, new_state, tick, cause)


def _road_offset(ped):
    return float(np.dot(ped.position, ped.crossing_vector))


def _decide_crossing(ped, world, vehicles, rng, dt, tick, sensing_range, hazard_log):
    # stopped vehicles are yielding
    moving = [v for v in vehicles if v.speed > STOPPED_SPEED]
    hazard = in_crossing_hazard(ped, moving, dt)
    onset = hazard and not ped.hazard_active
    ped.hazard_active = hazard

    if ped.state is S.PAUSING_MID_CROSS:
        if not hazard:
            return S.CROSSING_ROAD, "hazard_cleared"
        if ped.state_timer >= MAX_PAUSE and escape_feasible(ped, world, moving, sensing_range):
            return S.RUNNING_ACROSS, "vehicle_proximity"
        return None

    if _road_offset(ped) > world.half_width and ped.visited_driving:
        return S.FINISHED_CROSSING, "lane_exit"

    if not onset:
        return None

    eligible = ped.crossing_progress < RETREAT_WINDOW
    retreated = maybe_retreat(ped, rng)
    if retreated:
        response, cause = S.RETREAT, "fast_vehicle"
    elif escape_feasible(ped, world, moving, sensing_range):
        response, cause = S.RUNNING_ACROSS, "vehicle_proximity"
    else:
        response, cause = S.PAUSING_MID_CROSS, "fear"

    if hazard_log is not None:
        hazard_log.append(HazardEvent(tick, ped.id, ped.state, ped.crossing_progress, eligible, retreated,
                                      response))
    if response is ped.state:
        return None
    return response, cause


def _decide_waiting(ped, world, vehicles, ego, rng, dt, sensing_range):
    intent = _intent(ped)
    outcome = update_patience(ped, dt, rng)
    if outcome is PatienceOutcome.Abandon:
        ped.attempt_done = True
        return S.WALKING_SIDEWALK, "patience_expired"
    if outcome is PatienceOutcome.ForceSudden:
        return S.SUDDEN_CROSSING, "patience_expired"

    if ped.state is S.HESITATING:
        if intent is _Intent.Normal and in_decision_window(ped, ego):
            if gap_accepted(ped, vehicles, world, sensing_range):
                return S.CROSSING_ROAD, "gap_accepted"
            ped.speed_profile = SpeedProfile.Rushed
            return S.CROSSING_ROAD, "decision_window_rushed"
        if ped.state_timer < ped.state_duration:
            return None
        if gap_accepted(ped, vehicles, world, sensing_range):
            return S.CROSSING_ROAD, "gap_accepted"
        return S.CHECKING_TRAFFIC, "confidence_threshold"

    if ped.state_timer < ped.state_duration and not (intent is _Intent.Normal and in_decision_window(ped, ego)):
        return None
    if gap_accepted(ped, vehicles, world, sensing_range):
        return S.CROSSING_ROAD, "gap_accepted"
    if intent is _Intent.Opportunistic:
        ped.wait_timer = 0.0
        return S.WALKING_SIDEWALK, "gap_rejected"
    if intent is _Intent.Normal and in_decision_window(ped, ego):
        ped.speed_profile = SpeedProfile.Rushed
        return S.CROSSING_ROAD, "decision_window_rushed"
    return S.HESITATING, "gap_rejected"


def _decide(ped, world, vehicles, ego, rng, dt, tick, sensing_range, hazard_log):
    state = ped.state

    if state in CROSSING_STATES:
        return _decide_crossing(ped, world, vehicles, rng, dt, tick, sensing_range, hazard_log)

    if state is S.RETREAT:
        if _road_offset(ped) < 0 and lane_type_at(world, ped.position) is LaneType.Sidewalk:
            ped.attempt_done = True
            return S.WALKING_SIDEWALK, "sidewalk_regained"
        return None

    if state is S.FINISHED_CROSSING:
        if _road_offset(ped) > 0 and lane_type_at(world, ped.position) is LaneType.Sidewalk:
            ped.attempt_done = True
            return S.WALKING_SIDEWALK, "sidewalk_reached"
        return None

    # followers only move through the sidewalk states by group synchronisation
    if ped.is_follower:
        return None

    intent = _intent(ped)

    if state is S.DISTRACTED_BEHAVIOR:
        if ped.state_timer >= ped.state_duration:
            return S.WALKING_SIDEWALK, "attention_regained"
        return None

    if state is S.WALKING_SIDEWALK:
        if intent in (_Intent.Walker, _Intent.Opportunistic):
            if (ped.speed_profile is SpeedProfile.Distracted and ped.group_id is None
                    and rng.random() < DISTRACTION_ONSET):
                return S.DISTRACTED_BEHAVIOR, "archetype_probability"
        if intent is _Intent.Walker:
            if rng.random() < IDLE_LOOK_ONSET:
                return S.LOOKING_AROUND, "attention_threshold"
            return None
        if intent is _Intent.Opportunistic:
            if ped.state_timer >= ped.state_duration and rng.random() < OPPORTUNISTIC_LOOK_ONSET:
                return S.LOOKING_AROUND, "attention_threshold"
            return None
        # typed crossers stop strolling once the ego is in the decision window
        window = in_decision_window(ped, ego)
        if ped.state_timer < ped.state_duration and not window:
            return None
        if intent is _Intent.Normal:
            return S.LOOKING_AROUND, "crossing_intent"
        if intent is _Intent.Sudden:
            if window and rng.random() < SUDDEN_TRIGGER:
                return S.SUDDEN_CROSSING, "random_trigger"
            return None
        if window:
            return S.LOOKING_AROUND, "position_trigger"
        return None

    if state is S.LOOKING_AROUND:
        # a committed crosser enters the road as soon as the ego is in the decision window
        rushed = intent in (_Intent.Normal, _Intent.Jaywalk) and in_decision_window(ped, ego)
        if ped.state_timer < ped.state_duration and not rushed:
            return None
        if intent in (_Intent.Normal, _Intent.Opportunistic):
            return S.CHECKING_TRAFFIC, "ttc_calculation"
        if intent is _Intent.Jaywalk:
            return S.JAYWALKING, "mid_block"
        return S.WALKING_SIDEWALK, "scan_complete"

    return _decide_waiting(ped, world, vehicles, ego, rng, dt, sensing_range)


def _integrate(ped, world, dt, rng):
    state = ped.state
    walking = ped.base_speed * ped.speed_profile.multiplier
    along = ped.walk_direction * world.axis

    if state is S.WALKING_SIDEWALK:
        velocity = walking * along
    elif state is S.LOOKING_AROUND:
        velocity = 0.5 * walking * along
    elif state is S.DISTRACTED_BEHAVIOR:
        if ped.pause_timer <= 0 and rng.random() < DISTRACTED_PAUSE_ONSET:
            ped.pause_timer = float(rng.uniform(*DISTRACTED_PAUSE))
        if ped.pause_timer > 0:
            ped.pause_timer -= dt
            velocity = np.zeros(2)
        else:
            velocity = walking * along
    elif state is S.RUNNING_ACROSS:
        velocity = running_speed(ped) * ped.crossing_vector
    elif state in MOVING_CROSSING_STATES:
        velocity = ped.crossing_speed * ped.crossing_vector
    elif state is S.RETREAT:
        velocity = -ped.crossing_speed * ped.crossing_vector
    elif state is S.FINISHED_CROSSING:
        velocity = walking * ped.crossing_vector
    else:
        velocity = np.zeros(2)

    ped.velocity = np.array(velocity, dtype=float)
    ped.position = ped.position + ped.velocity * dt

    if lane_type_at(world, ped.position) is LaneType.Driving:
        ped.visited_driving = True

    if state in CROSSING_STATES or state is S.RETREAT:
        progress = (_road_offset(ped) + world.half_width) / world.w_road
        ped.crossing_progress = min(max(progress, 0.0), 1.0)
    else:
        ped.crossing_progress = 0.0


def fsm_step(ped, world, vehicles, rng, dt=DT, tick=0, sensing_range=SENSING_RANGE, hazard_log=None):
    """
    Advance ``ped`` by one tick.

    :param ped: pedestrian state of the previous tick, left untouched
    :param world: road world
    :param vehicles: vehicles of the previous tick, the ego vehicle among them
    :param rng: the pedestrian's own numpy random generator
    :param dt: tick length in seconds
    :param tick: index of the tick being computed, recorded on transition events
    :param sensing_range: how far the pedestrian considers traffic
    :param hazard_log: if a list, in-crossing hazard events are appended to it
    :returns: ``(pedestrian, event)`` where ``event`` is a :class:`TransitionEvent` or ``None``

    """
    ped = ped.clone()
    ped.state_timer += dt

    event = None
    decision = _decide(ped, world, vehicles, find_ego(vehicles), rng, dt, tick, sensing_range, hazard_log)
    if decision is not None:
        event = _enter(ped, decision[0], tick, decision[1], world, rng)

    _integrate(ped, world, dt, rng)
    return ped, event


def group_sync(members, tick, world, events=None):
    """
    Let group followers copy their leader.

    While the leader is on the sidewalk, followers mirror its state. Once the leader steps onto the
    road, every follower enters the same crossing state ``sync_jitter`` ticks later.

    :param members: all pedestrians of one group
    :param tick: current tick
    :param world: road world
    :param events: if a list, transition events of followers are appended to it
    :returns: the updated members in the same order

    """
    leaders = [m for m in members if m.is_group_leader]
    if len(leaders) != 1:
        raise GroupConsistencyError("Group %s has %d leaders" % (members[0].group_id if members else None,
                                                                 len(leaders)))
    leader = leaders[0]
    if any(m.group_id != leader.group_id for m in members):
        raise GroupConsistencyError("Members of group %s disagree on their group id" % leader.group_id)

    synced = []
    for member in members:
        if member is leader or member.attempt_done or member.state not in SIDEWALK_STATES:
            synced.append(member)
            continue

        target, cause = None, None
        if leader.onset_tick is not None:
            if tick >= leader.onset_tick + member.sync_jitter:
                target, cause = leader.onset_state, "group_sync"
        elif leader.state in SIDEWALK_STATES and leader.state is not member.state:
            target, cause = leader.state, "group_mirror"

        if target is None or target not in TRANSITIONS[member.state]:
            synced.append(member)
            continue

        member = member.clone()
        if target in CROSSING_STATES and leader.speed_profile is SpeedProfile.Rushed:
            member.speed_profile = SpeedProfile.Rushed
        event = _enter(member, target, tick, cause, world, None)
        if events is not None:
            events.append(event)
        synced.append(member)

    return synced


def describe_behaviour():
    """
    Archetype table, speed profiles and transition graph as plain data.
    """
    return OrderedDict([
        ("archetypes", [a.describe() for a in ARCHETYPES.values()]),
        ("speed_profiles", OrderedDict((p.name, p.multiplier) for p in SpeedProfile)),
        ("states", [s.name for s in BehaviourState]),
        ("crossing_states", [s.name for s in BehaviourState if s in CROSSING_STATES]),
        ("transitions", OrderedDict((s.name, sorted(t.name for t in targets))
                                    for s, targets in TRANSITIONS.items())),
    ])
