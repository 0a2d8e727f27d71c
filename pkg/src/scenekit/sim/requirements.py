"""Evaluate scripted requirements against a finished trace."""

from __future__ import annotations

from dataclasses import dataclass

from scenekit.dsl.sampler import ConcreteScenario
from scenekit.sim.engine import Trace


@dataclass(frozen=True)
class RequirementResult:
    text: str
    passed: bool


def check_requirements(trace: Trace, scenario: ConcreteScenario) -> list[RequirementResult]:
    """One result per scripted requirement, in script order.

    `require collision [of T]` passes when any event matches; `require ego
    speed above V at collision` looks at ego's speed in the frame of the
    first event involving ego.
    """
    results = []
    for req in scenario.requirements:
        if req.kind == "collision":
            if req.coll_type is None:
                text = "require collision"
                passed = bool(trace.events)
            else:
                text = f"require collision of {req.coll_type}"
                passed = any(e.classification.value == req.coll_type for e in trace.events)
        elif req.kind == "ego_speed_above":
            text = f"require ego speed above {req.value} at collision"
            passed = False
            for event in trace.events:
                if "ego" in (event.agent_a, event.agent_b):
                    ego = next(s for s in trace.frames[event.frame] if s.name == "ego")
                    passed = ego.speed > req.value
                    break
        else:
            raise ValueError(f"unknown requirement kind {req.kind!r}")
        results.append(RequirementResult(text=text, passed=passed))
    return results
