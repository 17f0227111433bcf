"""Built-in example systems, constructed by name."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

from ..action import ActionScenario
from ..errors import ScenarioError
from ._common import GOLDEN
from .circles import rational_rotation, rotation, varying_angle_cylinder
from .cone import triple_cone
from .dyadic import dyadic_product
from .spiral import spiral_identified, spiral_two_circles

BUILDERS: dict[str, Callable[..., ActionScenario]] = {
    "rotation": rotation,
    "rational_rotation": rational_rotation,
    "varying_angle_cylinder": varying_angle_cylinder,
    "spiral_two_circles": spiral_two_circles,
    "spiral_identified": spiral_identified,
    "triple_cone": triple_cone,
    "dyadic_product": dyadic_product,
}

SCENARIO_NAMES = tuple(BUILDERS)


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    params: Mapping[str, Any] = field(default_factory=dict)


def build(spec: ScenarioSpec | str, **params) -> ActionScenario:
    """Construct a scenario from a spec or from a name plus keyword parameters."""
    if isinstance(spec, str):
        spec = ScenarioSpec(spec, params)
    elif params:
        spec = ScenarioSpec(spec.name, {**spec.params, **params})
    try:
        builder = BUILDERS[spec.name]
    except KeyError:
        raise ScenarioError(
            f"unknown scenario {spec.name!r}; choose from {', '.join(SCENARIO_NAMES)}") from None
    try:
        return builder(**dict(spec.params))
    except TypeError as exc:
        raise ScenarioError(f"bad parameters for {spec.name}: {exc}") from None


__all__ = ["BUILDERS", "GOLDEN", "SCENARIO_NAMES", "ScenarioSpec", "build",
           "dyadic_product", "rational_rotation", "rotation", "spiral_identified",
           "spiral_two_circles", "triple_cone", "varying_angle_cylinder"]
