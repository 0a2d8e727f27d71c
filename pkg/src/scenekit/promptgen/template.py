"""Prompt template and assembly for few-shot scenario generation.

The default template is frozen text; downstream golden tests compare the
assembled prompt byte for byte, so any change here is a contract change.
Example scripts are interpolated verbatim between the header and the closing
line, separated by single newlines, with one blank line before the closing.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class ScenarioType(enum.Enum):
    PEDESTRIAN_CROSSING_OCCLUDED = "pedestrian-crossing-occluded"
    VEHICLE_CUT_IN = "vehicle-cut-in"
    INTERSECTION_CONFLICT = "intersection-conflict"
    ADVERSE_WEATHER_LANE_CHANGE = "adverse-weather-lane-change"
    VEHICLE_CYCLIST_COLLISION = "vehicle-cyclist-collision"
    T_BONE_COLLISION = "t-bone-collision"
    REAR_END_COLLISION = "rear-end-collision"

    @staticmethod
    def from_name(name: str) -> "ScenarioType":
        for t in ScenarioType:
            if t.value == name:
                return t
        known = ", ".join(t.value for t in ScenarioType)
        raise ValueError(f"unknown scenario type {name!r}; expected one of {known}")


# Phrase used for each type inside the task's parenthetical example list.
COLLISION_PHRASES: dict[ScenarioType, str] = {
    ScenarioType.PEDESTRIAN_CROSSING_OCCLUDED: "pedestrian collision",
    ScenarioType.VEHICLE_CUT_IN: "vehicle cut-in collision",
    ScenarioType.INTERSECTION_CONFLICT: "intersection collision",
    ScenarioType.ADVERSE_WEATHER_LANE_CHANGE: "lane-change collision in adverse weather",
    ScenarioType.VEHICLE_CYCLIST_COLLISION: "vehicle-cyclist collision",
    ScenarioType.T_BONE_COLLISION: "T-bone collision",
    ScenarioType.REAR_END_COLLISION: "rear-end collision",
}


@dataclass(frozen=True)
class PromptTemplate:
    preamble: str = "You are a helpful assistant."
    task_instruction: str = (
        "Please review the backbone and syntax of the following Scenic scripts "
        "for general driving scenarios. Based on these examples, try to generate "
        "a script for a collision scenario (e.g., {kinds})."
    )
    example_header: str = "Examples of Scenic scripts for driving scenarios:"
    closing: str = "Your generated Scenic script:"
    default_kinds: tuple[str, ...] = (
        "pedestrian collision",
        "T-bone collision",
        "rear-end collision",
    )


DEFAULT_TEMPLATE = PromptTemplate()


def assemble_prompt(
    template: PromptTemplate,
    scenario_type: ScenarioType,
    example_scripts: list[str],
) -> str:
    """Build the full prompt text.

    The parenthetical kind list starts from the template's default trio; the
    requested type's phrase is appended when not already present, so the
    default types reproduce the stock prompt unchanged.  The result always
    ends with the closing line.
    """
    if not example_scripts:
        raise ValueError("need at least one example script")
    kinds = list(template.default_kinds)
    phrase = COLLISION_PHRASES[scenario_type]
    if phrase not in kinds:
        kinds.append(phrase)
    task = template.task_instruction.format(kinds=", ".join(kinds))
    blocks = "".join(s.rstrip("\n") + "\n" for s in example_scripts)
    return (
        f"{template.preamble} {task}\n"
        "\n"
        f"{template.example_header}\n"
        f"{blocks}"
        "\n"
        f"{template.closing}"
    )
