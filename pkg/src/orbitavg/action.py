"""Action scenarios: a space, a group, a vectorized action map and test functions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .errors import DomainError, UnsupportedError
from .groups import Group, GroupElement
from .space import MetricSpace, Point

ActFn = Callable[[str, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class Observable:
    """A continuous test function, vectorized over a batch of one stratum."""

    name: str
    fn: Callable[[str, np.ndarray], np.ndarray]
    description: str = ""

    def values(self, stratum: str, coords: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(stratum, np.asarray(coords, dtype=float)))

    def __call__(self, x: Point) -> complex:
        return complex(self.values(x.stratum, np.array([x.coords], dtype=float))[0])


def product_observable(phi: Observable, psi: Observable) -> Observable:
    """The pointwise product phi * conj(psi)."""
    if phi is psi:
        def fn(s, c):
            v = phi.values(s, c)
            return (v * np.conj(v)).real if np.iscomplexobj(v) else v * v
    else:
        def fn(s, c):
            return phi.values(s, c) * np.conj(psi.values(s, c))
    return Observable(f"{phi.name}*conj({psi.name})", fn)


@dataclass(frozen=True, eq=False)
class Quadrature:
    """Nodes and weights of the invariant probability measure on an orbit closure."""

    stratum: str
    coords: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True, eq=False)
class ActionScenario:
    """The universe every operation runs in.

    ``act_coords(stratum, coords, words)`` maps row ``i`` of ``coords`` by the
    group word in row ``i`` of ``words``; every built-in action keeps strata
    invariant. ``closure(x, size)`` returns a :class:`Quadrature` for the orbit
    closure of ``x``, returns ``None`` when the orbit is finite (counting
    measure), or raises :class:`UnsupportedError`.
    """

    name: str
    space: MetricSpace
    group: Group
    act_coords: ActFn
    functions: Mapping[str, Observable]
    metadata: Mapping[str, Any] = field(default_factory=dict)
    flags: Mapping[str, bool] = field(default_factory=dict)
    closure: Callable[[Point, int], Quadrature | None] | None = None
    effective_generators: Callable[[Point], list[GroupElement]] | None = None
    default_grid: Callable[[int], list[Point]] | None = None
    params: Mapping[str, Any] = field(default_factory=dict)

    @property
    def scenario_id(self) -> str:
        return self.space.scenario_id

    def function(self, name: str | Observable) -> Observable:
        if isinstance(name, Observable):
            return name
        try:
            return self.functions[name]
        except KeyError:
            raise DomainError(f"{self.name} has no function {name!r}") from None

    def _check_point(self, x: Point):
        if x.scenario_id != self.scenario_id:
            raise DomainError(f"point from {x.scenario_id!r} used in {self.scenario_id!r}")

    def orbit_coords(self, x: Point, words: np.ndarray) -> np.ndarray:
        """Coordinates of ``g x`` for every row ``g`` of ``words``."""
        self._check_point(x)
        words = np.asarray(words, dtype=np.int64).reshape(-1, self.group.width)
        base = np.broadcast_to(np.asarray(x.coords, dtype=float), (len(words), len(x.coords)))
        return self.act_coords(x.stratum, np.ascontiguousarray(base), words)

    def act_batch(self, stratum: str, coords: np.ndarray, word: np.ndarray) -> np.ndarray:
        """Apply one group word to a batch of points of a single stratum."""
        coords = np.asarray(coords, dtype=float)
        words = np.broadcast_to(np.asarray(word, dtype=np.int64).reshape(1, -1),
                                (len(coords), self.group.width))
        return self.act_coords(stratum, coords, np.ascontiguousarray(words))

    def apply(self, g: GroupElement, x: Point) -> Point:
        row = self.group.row(g)
        c = self.orbit_coords(x, row[None])[0]
        return Point(self.scenario_id, x.stratum, tuple(float(v) for v in c))

    def generators_at(self, x: Point) -> list[GroupElement]:
        if self.effective_generators is not None:
            return self.effective_generators(x)
        return self.group.generators()

    def closure_quadrature(self, x: Point, size: int) -> Quadrature | None:
        if self.closure is None:
            raise UnsupportedError(f"{self.name} declares no orbit-closure parametrization")
        return self.closure(x, size)

    def grid(self, size: int) -> list[Point]:
        if self.default_grid is None:
            raise UnsupportedError(f"{self.name} has no default grid")
        return self.default_grid(size)


def apply(scenario: ActionScenario, g: GroupElement, x: Point) -> Point:
    return scenario.apply(g, x)


def check_action_axioms(scenario: ActionScenario, points: Sequence[Point],
                        words_g: np.ndarray, words_h: np.ndarray) -> float:
    """Largest violation of the identity and compatibility axioms on the samples."""
    grp = scenario.group
    worst = 0.0
    e = grp.identity()
    for x, g, h in zip(points, words_g, words_h):
        ex = scenario.apply(e, x)
        worst = max(worst, scenario.space.distance(ex, x))
        gh = grp.from_row(grp.compose_words(g[None], h[None])[0])
        lhs = scenario.apply(gh, x)
        rhs = scenario.apply(grp.from_row(g), scenario.apply(grp.from_row(h), x))
        worst = max(worst, scenario.space.distance(lhs, rhs))
    return worst
