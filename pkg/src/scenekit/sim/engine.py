"""Fixed-timestep scenario execution.

Everything here is pure float arithmetic driven by the concrete scenario; no
randomness, so identical inputs give bitwise-identical traces.  Unicycle
kinematics: heading comes from a pure-pursuit point on the assigned lane,
then position advances by speed * dt along the updated heading.  Behavior
triggers are evaluated before motion against the previous frame and latch
once fired.  Frame k sits at time k * dt (multiplied, not accumulated).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from scenekit.dsl.nodes import ActionKind, AgentClass
from scenekit.dsl.sampler import (
    CAbsolute,
    COnLane,
    CRelative,
    ConcreteBehavior,
    ConcreteScenario,
    SampleError,
)
from scenekit.sim.classify import ClassifierConfig, CollisionClass, classify_collision
from scenekit.sim.geometry import (
    Box,
    contact_faces,
    impact_point,
    rel_heading_deg,
    signed_separation,
)
from scenekit.sim.worldmap import WorldMap

LOOKAHEAD_MIN = 2.0  # metres
LOOKAHEAD_TIME = 0.5  # seconds of travel


class PlacementError(Exception):
    """Initial poses overlap or cannot be resolved."""


@dataclass
class SimConfig:
    dt: float = 0.05
    max_duration: float = 30.0
    collision_stop: bool = True
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.max_duration <= 0:
            raise ValueError(f"max_duration must be positive, got {self.max_duration}")


@dataclass
class AgentState:
    name: str
    klass: AgentClass
    x: float
    y: float
    heading: float  # radians
    speed: float
    length: float
    width: float
    behavior_state: str
    active: bool = True

    def box(self) -> Box:
        return Box(self.x, self.y, self.heading, self.length, self.width)


@dataclass
class CollisionEvent:
    time: float
    frame: int
    agent_a: str  # declaration order: a precedes b
    agent_b: str
    impact: tuple[float, float]
    rel_heading_deg: float
    faces: tuple[str, str]
    classification: CollisionClass


@dataclass
class Trace:
    map_name: str
    dt: float
    frames: list[tuple[AgentState, ...]]
    events: list[CollisionEvent]
    termination: str  # "collision" | "script" | "timeout"

    @property
    def duration(self) -> float:
        return (len(self.frames) - 1) * self.dt

    def frame_time(self, index: int) -> float:
        return index * self.dt

    def agent_track(self, name: str) -> list[AgentState]:
        return [next(s for s in frame if s.name == name) for frame in self.frames]


@dataclass
class _Runtime:
    behavior: ConcreteBehavior | None
    triggered: bool = False
    lane_id: str | None = None
    s: float = 0.0
    base_heading: float = 0.0
    lateral_travel: float = 0.0
    merged: bool = False


@dataclass
class SimState:
    world: WorldMap
    states: list[AgentState]
    runtimes: list[_Runtime]


_LANE_KINDS = (ActionKind.FOLLOW_LANE, ActionKind.BRAKE, ActionKind.CUT_IN)


def instantiate(scenario: ConcreteScenario, world: WorldMap) -> SimState:
    """Resolve placements into initial agent states.

    Raises SampleError for lane references the map cannot satisfy and
    PlacementError when any two initial boxes already interpenetrate.
    """
    states: list[AgentState] = []
    runtimes: list[_Runtime] = []
    poses: dict[str, tuple[float, float, float]] = {}

    for obj in scenario.objects:
        spatial = obj.spatial
        if isinstance(spatial, CAbsolute):
            x, y, heading = spatial.x, spatial.y, math.radians(spatial.heading_deg)
        elif isinstance(spatial, CRelative):
            rx, ry, rh = poses[spatial.ref]
            c, s = math.cos(rh), math.sin(rh)
            d = spatial.amount
            if spatial.kind == "ahead":
                x, y = rx + d * c, ry + d * s
            elif spatial.kind == "behind":
                x, y = rx - d * c, ry - d * s
            elif spatial.kind == "left":
                x, y = rx - d * s, ry + d * c
            else:  # right
                x, y = rx + d * s, ry - d * c
            heading = rh
        elif isinstance(spatial, COnLane):
            lane = world.lanes.get(spatial.lane)
            if lane is None:
                known = ", ".join(world.lanes)
                raise SampleError(
                    f"object {obj.name!r}: map {world.name!r} has no lane {spatial.lane!r} "
                    f"(lanes: {known})"
                )
            if spatial.s > lane.length:
                raise SampleError(
                    f"object {obj.name!r}: position {spatial.s} exceeds lane "
                    f"{spatial.lane!r} length {lane.length}"
                )
            x, y = lane.point_at(spatial.s)
            heading = lane.heading_at(spatial.s)
        else:
            raise TypeError(f"unknown spatial {spatial!r}")
        poses[obj.name] = (x, y, heading)

        rt = _Runtime(behavior=obj.behavior, base_heading=heading)
        if obj.behavior is not None and obj.behavior.trigger is None:
            rt.triggered = True
        if isinstance(spatial, COnLane):
            rt.lane_id, rt.s = spatial.lane, spatial.s
        elif obj.behavior is not None and obj.behavior.kind in _LANE_KINDS:
            lane_id, s, _ = world.nearest_lane(x, y)
            rt.lane_id, rt.s = lane_id, s

        states.append(
            AgentState(
                name=obj.name,
                klass=obj.klass,
                x=x,
                y=y,
                heading=heading,
                speed=obj.init_speed,
                length=obj.dims[0],
                width=obj.dims[1],
                behavior_state=_initial_state(obj.behavior, obj.init_speed),
            )
        )
        runtimes.append(rt)

    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            if signed_separation(states[i].box(), states[j].box()) > 0:
                raise PlacementError(
                    f"initial poses of {states[i].name!r} and {states[j].name!r} overlap"
                )
    return SimState(world=world, states=states, runtimes=runtimes)


def _initial_state(behavior: ConcreteBehavior | None, speed: float) -> str:
    if behavior is None:
        return "coasting" if speed > 0 else "idle"
    return {
        ActionKind.FOLLOW_LANE: "cruise",
        ActionKind.BRAKE: "cruise",
        ActionKind.CROSS: "waiting",
        ActionKind.CUT_IN: "cruise",
        ActionKind.IDLE: "idle",
        ActionKind.STOP: "stopped",
    }[behavior.kind]


def run(scenario: ConcreteScenario, world: WorldMap, config: SimConfig = SimConfig()) -> Trace:
    """Simulate until collision, scripted termination, or timeout."""
    sim = instantiate(scenario, world)
    frames: list[tuple[AgentState, ...]] = [tuple(replace(s) for s in sim.states)]
    events: list[CollisionEvent] = []
    contacted: set[tuple[str, str]] = set()
    n_steps = round(config.max_duration / config.dt)
    termination = "timeout"

    for k in range(1, n_steps + 1):
        prev_time = (k - 1) * config.dt
        now = k * config.dt
        prev = {s.name: s for s in frames[-1]}

        for state, rt in zip(sim.states, sim.runtimes):
            if state.active:
                _update_trigger(rt, prev, prev_time)
        for state, rt in zip(sim.states, sim.runtimes):
            if state.active:
                _advance(state, rt, sim.world, config.dt)

        frames.append(tuple(replace(s) for s in sim.states))

        new_events = _detect(sim.states, contacted, now, k, config.classifier)
        events.extend(new_events)
        if new_events and config.collision_stop:
            termination = "collision"
            break
        for ev in new_events:
            for state in sim.states:
                if state.name in (ev.agent_a, ev.agent_b):
                    state.active = False
                    state.speed = 0.0
        if _terminated(scenario, sim.states, now):
            termination = "script"
            break

    return Trace(
        map_name=world.name,
        dt=config.dt,
        frames=frames,
        events=events,
        termination=termination,
    )


def _update_trigger(rt: _Runtime, prev: dict[str, AgentState], prev_time: float) -> None:
    if rt.behavior is None or rt.triggered or rt.behavior.trigger is None:
        return
    trig = rt.behavior.trigger
    if trig.kind == "time":
        if prev_time >= trig.value:
            rt.triggered = True
    elif trig.kind == "distance":
        obj = prev.get(trig.obj)
        ego = prev.get("ego")
        if obj is not None and ego is not None:
            if math.hypot(obj.x - ego.x, obj.y - ego.y) < trig.value:
                rt.triggered = True


def _advance(state: AgentState, rt: _Runtime, world: WorldMap, dt: float) -> None:
    b = rt.behavior
    if b is None:
        _straight(state, dt)
        return
    if b.kind is ActionKind.IDLE or b.kind is ActionKind.STOP:
        state.speed = 0.0
        state.behavior_state = "idle" if b.kind is ActionKind.IDLE else "stopped"
        return
    if b.kind is ActionKind.FOLLOW_LANE:
        target = b.args[0] if rt.triggered else state.speed
        _pursuit(state, rt, world, dt, target)
        if state.behavior_state != "stopped":
            state.behavior_state = "cruise"
        return
    if b.kind is ActionKind.BRAKE:
        if not rt.triggered:
            _pursuit(state, rt, world, dt, state.speed)
            return
        speed = max(0.0, state.speed - b.args[0] * dt)
        _pursuit(state, rt, world, dt, speed)
        state.behavior_state = "stopped" if speed == 0.0 else "braking"
        return
    if b.kind is ActionKind.CROSS:
        if not rt.triggered:
            state.speed = 0.0
            state.behavior_state = "waiting"
            return
        offset = {"left": math.pi / 2.0, "right": -math.pi / 2.0, "forward": 0.0}[b.direction]
        state.heading = _wrap(rt.base_heading + offset)
        state.speed = b.args[0]
        _straight(state, dt)
        state.behavior_state = "crossing"
        return
    if b.kind is ActionKind.CUT_IN:
        if not rt.triggered:
            _pursuit(state, rt, world, dt, state.speed)
            return
        if rt.merged:
            _pursuit(state, rt, world, dt, state.speed)
            if state.behavior_state != "stopped":
                state.behavior_state = "merged"
            return
        _cut_in(state, rt, world, dt, b)
        return
    raise TypeError(f"unknown behavior kind {b.kind!r}")


def _straight(state: AgentState, dt: float) -> None:
    state.x += state.speed * math.cos(state.heading) * dt
    state.y += state.speed * math.sin(state.heading) * dt


def _pursuit(state: AgentState, rt: _Runtime, world: WorldMap, dt: float, speed: float) -> None:
    """Advance along the assigned lane with pure-pursuit steering."""
    if rt.lane_id is None:
        state.speed = speed
        _straight(state, dt)
        return
    lane = world.lanes[rt.lane_id]
    s_next = rt.s + speed * dt
    while s_next > lane.length:
        if lane.successors:
            s_next -= lane.length
            rt.lane_id = lane.successors[0]
            lane = world.lanes[rt.lane_id]
        else:
            state.x, state.y = lane.point_at(lane.length)
            state.heading = lane.heading_at(lane.length)
            state.speed = 0.0
            rt.s = lane.length
            state.behavior_state = "stopped"
            return
    rt.s = s_next
    lookahead = max(LOOKAHEAD_MIN, LOOKAHEAD_TIME * speed)
    tx, ty = _walk_point(world, rt.lane_id, rt.s + lookahead)
    alpha = _wrap(math.atan2(ty - state.y, tx - state.x) - state.heading)
    state.heading = _wrap(state.heading + speed * (2.0 * math.sin(alpha) / lookahead) * dt)
    state.speed = speed
    _straight(state, dt)


def _walk_point(world: WorldMap, lane_id: str, s: float) -> tuple[float, float]:
    """Point at arc position s, following first successors past lane ends."""
    lane = world.lanes[lane_id]
    while s > lane.length and lane.successors:
        s -= lane.length
        lane = world.lanes[lane.successors[0]]
    return lane.point_at(min(s, lane.length))


def _cut_in(state: AgentState, rt: _Runtime, world: WorldMap, dt: float, b: ConcreteBehavior) -> None:
    """Drift laterally toward the adjacent lane while keeping forward speed."""
    lane = world.lanes[rt.lane_id]
    rt.s = min(rt.s + state.speed * dt, lane.length)
    tangent = lane.heading_at(rt.s)
    normal = tangent + (math.pi / 2.0 if b.direction == "left" else -math.pi / 2.0)
    rate = b.args[0]
    vx = state.speed * math.cos(tangent) + rate * math.cos(normal)
    vy = state.speed * math.sin(tangent) + rate * math.sin(normal)
    state.x += vx * dt
    state.y += vy * dt
    state.heading = math.atan2(vy, vx)
    rt.lateral_travel += rate * dt
    if rt.lateral_travel >= lane.width:
        rt.merged = True
        lane_id, s, _ = world.nearest_lane(state.x, state.y)
        rt.lane_id, rt.s = lane_id, s
        state.heading = world.lanes[lane_id].heading_at(s)
        state.behavior_state = "merged"
    else:
        state.behavior_state = "cutting"


def _detect(
    states: list[AgentState],
    contacted: set[tuple[str, str]],
    now: float,
    frame: int,
    classifier: ClassifierConfig,
) -> list[CollisionEvent]:
    events = []
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            a, b = states[i], states[j]
            if not (a.active and b.active):
                continue
            key = (a.name, b.name)
            if key in contacted:
                continue
            if signed_separation(a.box(), b.box()) <= 0:
                continue
            contacted.add(key)
            faces = contact_faces(a.box(), b.box())
            rel = rel_heading_deg(a.heading, b.heading)
            events.append(
                CollisionEvent(
                    time=now,
                    frame=frame,
                    agent_a=a.name,
                    agent_b=b.name,
                    impact=impact_point(a.box(), b.box()),
                    rel_heading_deg=rel,
                    faces=faces,
                    classification=classify_collision(a.klass, b.klass, rel, faces, classifier),
                )
            )
    return events


def _terminated(scenario: ConcreteScenario, states: list[AgentState], now: float) -> bool:
    trig = scenario.termination
    if trig is None:
        return False
    if trig.kind == "time":
        return now >= trig.value
    if trig.kind == "distance":
        by_name = {s.name: s for s in states}
        obj = by_name.get(trig.obj)
        ego = by_name.get("ego")
        if obj is None or ego is None:
            return False
        return math.hypot(obj.x - ego.x, obj.y - ego.y) < trig.value
    return False


def _wrap(angle: float) -> float:
    """Fold into (-pi, pi]."""
    a = math.fmod(angle + math.pi, 2.0 * math.pi)
    if a <= 0:
        a += 2.0 * math.pi
    return a - math.pi
