"""Registry of the bundled case-study scenarios."""

from __future__ import annotations

from importlib import resources

import yaml

from .scenario import Scenario, parse_scenario

DESCRIPTIONS = {
    "colregs_headon_overtaking": (
        "two rule-compliant target ships on the midline, one met head-on "
        "and one overtaken after it parks at its destination"),
    "colregs_crossing": (
        "one rule-compliant target ship crossing the own-ship diagonal"),
    "anticollision_headon": (
        "three constant-velocity drifters met head-on along the midline"),
    "anticollision_crossing": (
        "four constant-velocity drifters crossing the channel vertically"),
    "complex_1": "five drifters on mixed oblique courses",
    "complex_2": "six drifters on mixed courses, the densest roster",
}

BUNDLED = tuple(DESCRIPTIONS)


class UnknownScenarioError(KeyError):
    pass


def bundled_names() -> tuple:
    return BUNDLED


def scenario_text(name: str) -> str:
    if name not in DESCRIPTIONS:
        raise UnknownScenarioError(
            f"unknown scenario {name!r}; available: {', '.join(BUNDLED)}")
    return resources.files(__package__).joinpath("data", f"{name}.yaml").read_text(
        encoding="utf-8")


def load_bundled(name: str) -> Scenario:
    return parse_scenario(yaml.safe_load(scenario_text(name)), name=name)
