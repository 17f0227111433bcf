"""Finite-orbit detection, orbit-closure clustering and module classification."""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .action import ActionScenario
from .space import Point, farthest_point_net, points_from_coords, sample_points


class PointIndex:
    """Spatial hash for tolerance-based membership within one stratum.

    Coordinates are bucketed into cells of width ``4 * tol``; a lookup scans
    the neighboring cells (and the wrapped copies of periodic coordinates) and
    confirms candidates with the true metric.
    """

    def __init__(self, scenario: ActionScenario, stratum: str, tol: float):
        self.space = scenario.space
        self.stratum = stratum
        self.tol = tol
        self.h = 4.0 * tol
        kinds = scenario.space.strata[stratum].kinds
        self.periodic = [k == "periodic" for k in kinds]
        self.cells: dict[tuple, list[int]] = {}
        self.coords: list[np.ndarray] = []
        self.exact: dict[bytes, int] = {}
        shifts = [(-1.0, 0.0, 1.0) if p else (0.0,) for p in self.periodic]
        self._offsets = [np.array(s) for s in itertools.product(*shifts)]
        self._steps = list(itertools.product((-1, 0, 1), repeat=len(kinds)))

    def __len__(self):
        return len(self.coords)

    def _key(self, c: np.ndarray) -> tuple:
        return tuple(int(v) for v in np.floor(c / self.h))

    def find(self, c: np.ndarray) -> int | None:
        hit = self.exact.get(np.asarray(c, dtype=float).tobytes())
        if hit is not None:
            return hit
        cand = set()
        for off in self._offsets:
            base = np.floor((c + off) / self.h).astype(np.int64)
            for step in self._steps:
                cand.update(self.cells.get(tuple(int(b + s) for b, s in zip(base, step)), ()))
        if not cand:
            return None
        ids = sorted(cand)
        probe = Point(self.space.scenario_id, self.stratum, tuple(float(v) for v in c))
        d = self.space.distances_from(probe, self.stratum, np.array([self.coords[i] for i in ids]))
        hit = np.flatnonzero(d <= self.tol)
        return ids[int(hit[0])] if len(hit) else None

    def add(self, c: np.ndarray) -> bool:
        """Insert unless an equal point is present; True when inserted."""
        if self.find(c) is not None:
            return False
        c = np.asarray(c, dtype=float)
        self.cells.setdefault(self._key(c), []).append(len(self.coords))
        self.exact[c.tobytes()] = len(self.coords)
        self.coords.append(c)
        return True

    def array(self) -> np.ndarray:
        width = len(self.periodic)
        if not self.coords:
            return np.zeros((0, width))
        return np.stack(self.coords).reshape(len(self.coords), width)


@dataclass(frozen=True, eq=False)
class OrbitProbe:
    x: Point
    verdict: str  # "Finite" or "InfiniteLikely"
    cardinality: int | None
    visited: tuple[Point, ...]
    cutoff_used: int
    visited_coords: np.ndarray

    @property
    def finite(self) -> bool:
        return self.verdict == "Finite"

    def __repr__(self):
        v = f"Finite({self.cardinality})" if self.finite else "InfiniteLikely"
        return f"OrbitProbe({self.x!r}, {v}, cutoff={self.cutoff_used})"


def orbit_probe(scenario: ActionScenario, x: Point, cutoff: int = 256,
                tol: float | None = None) -> OrbitProbe:
    """Grow the orbit of ``x`` along the Følner schedule until it closes or reaches ``cutoff``.

    Orbit points are always computed from ``x`` by the group word (never by
    composing steps), so repeated probes give bit-identical coordinates. The
    orbit is declared finite once every effective generator maps the visited
    set into itself.
    """
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    tol = scenario.space.point_eq_tol if tol is None else tol
    group = scenario.group
    index = PointIndex(scenario, x.stratum, tol)
    gens = group.rows(scenario.generators_at(x))
    prev, k = -1, 0
    while True:
        for words in group.folner_chunks(prev, k, chunk=4096):
            for c in scenario.orbit_coords(x, words):
                index.add(c)
                if len(index) >= cutoff:
                    return _probe_result(scenario, x, index, cutoff, finite=_closed(scenario, index, gens))
        if _closed(scenario, index, gens):
            return _probe_result(scenario, x, index, cutoff, finite=True)
        if k >= group.max_index:
            return _probe_result(scenario, x, index, cutoff, finite=False)
        prev, k = k, group.next_index(k)


def _closed(scenario: ActionScenario, index: PointIndex, gens: np.ndarray) -> bool:
    # the newest points sit on the Følner boundary, where escapes happen
    pts = index.array()[::-1]
    for g in gens:
        for c in scenario.act_batch(index.stratum, pts, g):
            if index.find(c) is None:
                return False
    return True


def _probe_result(scenario, x, index, cutoff, finite):
    coords = index.array()
    visited = tuple(points_from_coords(scenario.space, x.stratum, coords))
    if finite:
        return OrbitProbe(x, "Finite", len(visited), visited, cutoff, coords)
    return OrbitProbe(x, "InfiniteLikely", None, visited, cutoff, coords)


@dataclass(frozen=True)
class OrbitCensus:
    scenario_id: str
    samples: int
    finite_cardinalities: tuple[int, ...]
    infinite_count: int
    infinite_closure_clusters: int
    cluster_sep: float
    # cluster counts at cluster_sep, cluster_sep/2, cluster_sep/4
    cluster_ladder: tuple[tuple[float, int], ...]

    @property
    def max_finite_card(self) -> int | None:
        return max(self.finite_cardinalities) if self.finite_cardinalities else None

    @property
    def cardinality_histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(self.finite_cardinalities).items()))


def hausdorff(scenario: ActionScenario, stratum_a: str, a: np.ndarray,
              stratum_b: str, b: np.ndarray) -> float:
    d = scenario.space.pairwise(stratum_a, a, stratum_b, b)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def _thin(scenario: ActionScenario, stratum: str, coords: np.ndarray, eps: float) -> np.ndarray:
    pairwise = scenario.space.pairwise

    def row(i):
        return pairwise(stratum, coords[i:i + 1], stratum, coords)[0]

    chosen, _ = farthest_point_net(len(coords), row, eps)
    return coords[chosen]


def _components(dist: np.ndarray, sep: float) -> int:
    n = len(dist)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in zip(*np.nonzero(np.triu(dist <= sep, 1))):
        parent[find(i)] = find(j)
    return len({find(i) for i in range(n)})


def cluster_closures(scenario: ActionScenario, probes: Sequence[OrbitProbe],
                     seps: Sequence[float]) -> list[int]:
    """Single-linkage cluster counts of orbit segments under sampled Hausdorff distance."""
    if not probes:
        return [0 for _ in seps]
    fine = min(seps) / 4.0
    nets = [(p.x.stratum, _thin(scenario, p.x.stratum, p.visited_coords, fine)) for p in probes]
    n = len(nets)
    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            dist[i, j] = dist[j, i] = hausdorff(scenario, *nets[i], *nets[j])
    return [_components(dist, s) for s in seps]


def census(scenario: ActionScenario, sample_size: int = 60, cutoff: int = 256,
           cluster_sep: float | None = None, seed: int = 0,
           points: Sequence[Point] | None = None) -> OrbitCensus:
    """Probe sampled points, tally finite cardinalities and cluster the infinite orbits."""
    if sample_size < 1:
        raise ValueError("sample_size must be >= 1")
    sep = float(0.05 * scenario.space.diameter if cluster_sep is None else cluster_sep)
    pts = list(points) if points is not None else sample_points(scenario.space, sample_size, seed)
    probes = [orbit_probe(scenario, x, cutoff) for x in pts]
    cards = tuple(p.cardinality for p in probes if p.finite)
    infinite = [p for p in probes if not p.finite]
    seps = (sep, sep / 2.0, sep / 4.0)
    counts = cluster_closures(scenario, infinite, seps)
    return OrbitCensus(scenario.scenario_id, len(pts), cards, len(infinite), counts[0], sep,
                       tuple(zip(seps, counts)))


RULES = {
    "uniform-cardinality": "all sampled finite orbits share one cardinality and the "
                           "infinite orbit closures are finitely many at resolution",
    "many-closures": "the number of infinite orbit closures keeps growing as the "
                     "resolution refines, so they do not form a finite family",
    "bounded-orbits": "the action is Lyapunov stable, finite orbit cardinalities are "
                      "uniformly bounded and the infinite orbit closures are finitely "
                      "many at resolution",
    "metric-stable": "the space is metric and the action is Lyapunov stable",
}

LABEL_PRIORITY = (("uniform-cardinality", "SelfDual"),
                  ("many-closures", "NotSelfDual-SelfDualFails"),
                  ("bounded-orbits", "Reflexive"),
                  ("metric-stable", "Reflexive"))


@dataclass(frozen=True)
class ModuleClassification:
    label: str
    rules: tuple[str, ...]
    reasons: tuple[str, ...]

    @property
    def summary(self) -> str:
        for rule, label in LABEL_PRIORITY:
            if label == self.label and rule in self.rules:
                return f"{self.label} ({rule} rule)"
        return self.label


def classify_module(census: OrbitCensus, flags: Mapping[str, bool],
                    card_bound: int = 16, cluster_bound: int = 4) -> ModuleClassification:
    """Apply the sufficient conditions for self-duality and reflexivity to a census.

    Every rule that fires is listed; the label comes from the first fired rule
    in :data:`LABEL_PRIORITY`, or Inconclusive when none fires.
    """
    ladder = [c for _, c in census.cluster_ladder] or [census.infinite_closure_clusters]
    growing = ladder[-1] > ladder[0] and ladder[-1] > cluster_bound
    few_closures = not growing and ladder[-1] <= cluster_bound
    cards = set(census.finite_cardinalities)
    fired = []
    if len(cards) <= 1 and few_closures:
        fired.append("uniform-cardinality")
    if growing:
        fired.append("many-closures")
    stable = bool(flags.get("lyapunov_stable"))
    if stable and (census.max_finite_card or 0) <= card_bound and few_closures:
        fired.append("bounded-orbits")
    if flags.get("metric") and stable:
        fired.append("metric-stable")
    label = "Inconclusive"
    for rule, lab in LABEL_PRIORITY:
        if rule in fired:
            label = lab
            break
    reasons = [f"{r}: {RULES[r]}" for r in fired]
    if not fired:
        reasons.append("no rule applies: finite cardinalities are unbounded or the "
                       "closure count is not settled at this resolution")
    reasons.append("cluster counts " + ", ".join(f"{c} at sep {s:.4g}" for s, c in census.cluster_ladder))
    return ModuleClassification(label, tuple(fired), tuple(reasons))
