"""Seeded resolution of scenario distributions into concrete scenarios.

One `random.Random(seed)` (Mersenne Twister) drives a whole sample.  Draws
happen in a fixed documented order: params in declaration order, then per
object (declaration order) its spatial scalars, initial speed, dims, and
behavior arguments.  Only Range and Choice consume randomness; constants and
parameter references never touch the generator, so adding one does not shift
the values drawn for everything after it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from scenekit.dsl.nodes import (
    Absolute,
    ActionKind,
    AgentClass,
    AheadOf,
    Always,
    Behind,
    BehaviorDef,
    Choice,
    Constant,
    DistanceToEgoBelow,
    LeftOf,
    ObjectDecl,
    OnLane,
    ParamRef,
    Range,
    RequireCollision,
    RequireEgoSpeedAbove,
    RightOf,
    Scalar,
    ScenarioAst,
    TimeElapsed,
)

_RETRY_CAP = 32


class SampleError(Exception):
    """A sampled value violates a constraint (bad dims, negative arc length, ...)."""


class VariationError(Exception):
    """Distinct variations cannot be produced (deterministic script or retry cap)."""


# --------------------------------------------------------------------------
# concrete (fully numeric) scenario types


@dataclass(frozen=True)
class CAbsolute:
    x: float
    y: float
    heading_deg: float


@dataclass(frozen=True)
class CRelative:
    kind: str  # "ahead" | "behind" | "left" | "right"
    ref: str
    amount: float


@dataclass(frozen=True)
class COnLane:
    lane: str
    s: float


CSpatial = CAbsolute | CRelative | COnLane


@dataclass(frozen=True)
class CTrigger:
    """Concrete trigger; kind is "distance" (obj, meters) or "time" (seconds)."""

    kind: str
    obj: str | None = None
    value: float = 0.0


@dataclass(frozen=True)
class ConcreteBehavior:
    kind: ActionKind
    args: tuple[float, ...] = ()
    direction: str | None = None
    trigger: CTrigger | None = None  # None means unconditional (always on)


@dataclass(frozen=True)
class ConcreteObject:
    name: str
    klass: AgentClass
    spatial: CSpatial
    init_speed: float
    dims: tuple[float, float]
    behavior: ConcreteBehavior | None = None


@dataclass(frozen=True)
class CRequirement:
    """kind "collision" (coll_type optional) or "ego_speed_above" (value)."""

    kind: str
    coll_type: str | None = None
    value: float = 0.0


@dataclass(frozen=True)
class ConcreteScenario:
    seed: int
    params: tuple[tuple[str, float], ...]
    objects: tuple[ConcreteObject, ...]
    requirements: tuple[CRequirement, ...] = ()
    termination: CTrigger | None = None

    def resolved_key(self) -> tuple:
        """Everything that identifies the sampled values, minus the seed."""
        return (self.params, self.objects, self.requirements, self.termination)

    def object_named(self, name: str) -> ConcreteObject:
        for obj in self.objects:
            if obj.name == name:
                return obj
        raise KeyError(name)


# --------------------------------------------------------------------------
# sampling


def sample_parameters(ast: ScenarioAst, seed: int) -> ConcreteScenario:
    """Resolve every distribution in the AST using the given seed."""
    rng = random.Random(seed)
    params: dict[str, float] = {}
    for p in ast.params:
        params[p.name] = _draw(p.value, rng, params)

    behaviors = {b.name: b for b in ast.behaviors}
    objects = []
    for obj in ast.objects:
        objects.append(_sample_object(obj, behaviors, rng, params))

    requirements = []
    for req in ast.requirements:
        if isinstance(req, RequireCollision):
            requirements.append(CRequirement("collision", coll_type=req.coll_type))
        elif isinstance(req, RequireEgoSpeedAbove):
            requirements.append(
                CRequirement("ego_speed_above", value=_resolve(req.speed, params))
            )

    termination = None
    if ast.termination is not None:
        termination = _concrete_trigger(ast.termination, owner=None, params=params, bound={})

    return ConcreteScenario(
        seed=seed,
        params=tuple(sorted(params.items())),
        objects=tuple(objects),
        requirements=tuple(requirements),
        termination=termination,
    )


def sample_variations(ast: ScenarioAst, n: int, base_seed: int) -> list[ConcreteScenario]:
    """Sample n pairwise-distinct variations.

    Variation i uses seed base_seed + i.  When a draw collides with an earlier
    variation it is redrawn with seed + n + retry (retry = 1, 2, ...) up to a
    cap, after which VariationError is raised.  A script with no Range or
    Choice anywhere cannot vary, so n > 1 fails up front.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if n > 1 and not _has_stochastic(ast):
        raise VariationError(
            "script contains no Range or Choice distribution; it cannot produce "
            f"{n} distinct variations"
        )
    seen: set[tuple] = set()
    out: list[ConcreteScenario] = []
    for i in range(n):
        seed = base_seed + i
        scenario = sample_parameters(ast, seed)
        retry = 0
        while scenario.resolved_key() in seen:
            retry += 1
            if retry > _RETRY_CAP:
                raise VariationError(
                    f"gave up finding a distinct draw for variation {i} after {_RETRY_CAP} retries"
                )
            scenario = sample_parameters(ast, seed + n + retry)
        seen.add(scenario.resolved_key())
        out.append(scenario)
    return out


def _has_stochastic(ast: ScenarioAst) -> bool:
    def stochastic(scalar: Scalar) -> bool:
        return isinstance(scalar, (Range, Choice))

    for p in ast.params:
        if stochastic(p.value):
            return True
    for obj in ast.objects:
        scalars: list[Scalar] = list(_spatial_scalars(obj.spatial)) + [obj.init_speed]
        if obj.dims is not None:
            scalars += list(obj.dims)
        if obj.behavior is not None:
            scalars += list(obj.behavior.args)
        if any(stochastic(s) for s in scalars):
            return True
    return False


def _spatial_scalars(spatial) -> tuple[Scalar, ...]:
    if isinstance(spatial, Absolute):
        return (spatial.x, spatial.y, spatial.heading)
    if isinstance(spatial, (AheadOf, Behind)):
        return (spatial.distance,)
    if isinstance(spatial, (LeftOf, RightOf)):
        return (spatial.offset,)
    if isinstance(spatial, OnLane):
        return (spatial.s,)
    raise TypeError(f"unknown spatial spec {spatial!r}")


def _draw(scalar: Scalar, rng: random.Random, params: dict[str, float]) -> float:
    if isinstance(scalar, Constant):
        return scalar.value
    if isinstance(scalar, ParamRef):
        try:
            return params[scalar.name]
        except KeyError:
            raise SampleError(f"unresolved param {scalar.name!r}") from None
    if isinstance(scalar, Range):
        return rng.uniform(scalar.lo, scalar.hi)
    if isinstance(scalar, Choice):
        return rng.choice(scalar.values)
    raise TypeError(f"unknown scalar {scalar!r}")


def _resolve(scalar: Scalar, params: dict[str, float], bound: dict[str, float] | None = None) -> float:
    """Resolve a scalar that may not draw randomness (bodies, requirements)."""
    if isinstance(scalar, Constant):
        return scalar.value
    if isinstance(scalar, ParamRef):
        if bound is not None and scalar.name in bound:
            return bound[scalar.name]
        try:
            return params[scalar.name]
        except KeyError:
            raise SampleError(f"unresolved param {scalar.name!r}") from None
    raise SampleError(f"distribution {scalar!r} is not allowed outside declaration sites")


def _sample_object(
    obj: ObjectDecl,
    behaviors: dict[str, BehaviorDef],
    rng: random.Random,
    params: dict[str, float],
) -> ConcreteObject:
    spatial = obj.spatial
    if isinstance(spatial, Absolute):
        cspatial: CSpatial = CAbsolute(
            _draw(spatial.x, rng, params),
            _draw(spatial.y, rng, params),
            _draw(spatial.heading, rng, params),
        )
    elif isinstance(spatial, AheadOf):
        cspatial = CRelative("ahead", spatial.ref, _draw(spatial.distance, rng, params))
    elif isinstance(spatial, Behind):
        cspatial = CRelative("behind", spatial.ref, _draw(spatial.distance, rng, params))
    elif isinstance(spatial, LeftOf):
        cspatial = CRelative("left", spatial.ref, _draw(spatial.offset, rng, params))
    elif isinstance(spatial, RightOf):
        cspatial = CRelative("right", spatial.ref, _draw(spatial.offset, rng, params))
    elif isinstance(spatial, OnLane):
        s = _draw(spatial.s, rng, params)
        if s < 0:
            raise SampleError(f"object {obj.name!r}: lane position must be >= 0, got {s}")
        cspatial = COnLane(spatial.lane, s)
    else:
        raise TypeError(f"unknown spatial spec {spatial!r}")

    init_speed = _draw(obj.init_speed, rng, params)
    if obj.dims is not None:
        dims = (_draw(obj.dims[0], rng, params), _draw(obj.dims[1], rng, params))
        if dims[0] <= 0 or dims[1] <= 0:
            raise SampleError(f"object {obj.name!r}: dims must be positive, got {dims}")
    else:
        dims = obj.klass.default_dims

    behavior = None
    if obj.behavior is not None:
        bdef = behaviors[obj.behavior.name]
        args = tuple(_draw(a, rng, params) for a in obj.behavior.args)
        bound = dict(zip(bdef.params, args))
        trigger = None
        if not isinstance(bdef.trigger, Always):
            trigger = _concrete_trigger(bdef.trigger, owner=obj.name, params=params, bound=bound)
        behavior = ConcreteBehavior(
            kind=bdef.action.kind,
            args=tuple(_resolve(a, params, bound) for a in bdef.action.args),
            direction=bdef.action.direction,
            trigger=trigger,
        )
    return ConcreteObject(obj.name, obj.klass, cspatial, init_speed, dims, behavior)


def _concrete_trigger(
    trigger,
    owner: str | None,
    params: dict[str, float],
    bound: dict[str, float],
) -> CTrigger | None:
    if isinstance(trigger, Always):
        return None
    if isinstance(trigger, DistanceToEgoBelow):
        obj = trigger.obj if trigger.obj is not None else owner
        return CTrigger("distance", obj=obj, value=_resolve(trigger.meters, params, bound))
    if isinstance(trigger, TimeElapsed):
        return CTrigger("time", value=_resolve(trigger.seconds, params, bound))
    raise TypeError(f"unknown trigger {trigger!r}")
