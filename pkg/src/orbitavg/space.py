"""Compact metric spaces as stratified point types with a vectorized metric.

A space is a finite set of strata. Each stratum fixes the meaning of a point's
coordinate tuple. The metric is a broadcasting function of two coordinate
arrays (last axis = coordinates), so orbit segments of 10^6 points can be
measured row by row or as full matrices without Python loops.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError

POINT_EQ_TOL = 1e-9

MetricFn = Callable[[str, np.ndarray, str, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Point:
    """A location in a scenario space.

    Dataclass equality is exact (bitwise on coordinates). Use
    :meth:`MetricSpace.equal` for the tolerance-based notion.
    """

    scenario_id: str
    stratum: str
    coords: tuple[float, ...]

    def __repr__(self):
        inner = ", ".join(f"{c:.12g}" for c in self.coords)
        return f"{self.stratum}({inner})"


@dataclass(frozen=True)
class Stratum:
    name: str
    dims: tuple[str, ...]
    # per-coordinate kind: "real", "periodic" (period 1) or "int"
    kinds: tuple[str, ...]
    check: Callable[[np.ndarray], np.ndarray] | None = None

    def valid(self, coords: np.ndarray) -> np.ndarray:
        coords = as_batch(coords, len(self.dims))
        ok = np.all(np.isfinite(coords), axis=1)
        for k, kind in enumerate(self.kinds):
            if kind == "periodic":
                ok &= (coords[:, k] >= 0.0) & (coords[:, k] < 1.0)
            elif kind == "int":
                ok &= coords[:, k] == np.round(coords[:, k])
        if self.check is not None:
            ok &= self.check(coords)
        return ok


@dataclass(frozen=True, eq=False)
class MetricSpace:
    scenario_id: str
    strata: Mapping[str, Stratum]
    metric: MetricFn
    diameter: float
    sample_stratum: Callable[[str, np.random.Generator], Sequence[float]]
    sample_near: Callable[[Point, float, np.random.Generator], Point | None] | None = None
    point_eq_tol: float = POINT_EQ_TOL

    def pairwise(self, sa: str, ca: np.ndarray, sb: str, cb: np.ndarray) -> np.ndarray:
        """Distance matrix between two batches, shape (len(ca), len(cb))."""
        ca = as_batch(ca, len(self.strata[sa].dims))
        cb = as_batch(cb, len(self.strata[sb].dims))
        d = self.metric(sa, ca[:, None, :], sb, cb[None, :, :])
        return np.broadcast_to(d, (len(ca), len(cb)))

    def paired(self, sa: str, ca: np.ndarray, sb: str, cb: np.ndarray) -> np.ndarray:
        """Row-wise distances between equally long batches."""
        ca = as_batch(ca, len(self.strata[sa].dims))
        cb = as_batch(cb, len(self.strata[sb].dims))
        return np.broadcast_to(self.metric(sa, ca, sb, cb), (max(len(ca), len(cb)),))

    def point(self, stratum: str, *coords: float) -> Point:
        if stratum not in self.strata:
            raise DomainError(f"{self.scenario_id} has no stratum {stratum!r}")
        st = self.strata[stratum]
        if len(coords) != len(st.dims):
            raise DomainError(f"stratum {stratum} expects {len(st.dims)} coordinates")
        c = tuple(float(v) for v in coords)
        if not st.valid(np.array([c]).reshape(1, -1))[0]:
            raise DomainError(f"coordinates {c} violate the {stratum} constraint")
        return Point(self.scenario_id, stratum, c)

    def contains(self, x: Point) -> bool:
        if x.scenario_id != self.scenario_id or x.stratum not in self.strata:
            return False
        st = self.strata[x.stratum]
        return bool(st.valid(np.array(x.coords, dtype=float).reshape(1, len(st.dims)))[0])

    def _check(self, *points: Point):
        for p in points:
            if p.scenario_id != self.scenario_id:
                raise DomainError(
                    f"point from {p.scenario_id!r} used in space {self.scenario_id!r}")

    def distance(self, x: Point, y: Point) -> float:
        self._check(x, y)
        d = self.pairwise(x.stratum, _row(x), y.stratum, _row(y))
        return float(d[0, 0])

    def distances_from(self, x: Point, stratum: str, coords: np.ndarray) -> np.ndarray:
        """Distances from ``x`` to a batch of points sharing one stratum."""
        self._check(x)
        coords = as_batch(coords, len(self.strata[stratum].dims))
        return self.pairwise(x.stratum, _row(x), stratum, coords)[0]

    def matrix(self, xs: Sequence[Point], ys: Sequence[Point]) -> np.ndarray:
        """Full distance matrix between two point lists (strata may be mixed)."""
        self._check(*xs, *ys)
        out = np.empty((len(xs), len(ys)))
        gx = group_by_stratum(xs)
        gy = group_by_stratum(ys)
        for sa, (ia, ca) in gx.items():
            for sb, (ib, cb) in gy.items():
                out[np.ix_(ia, ib)] = self.pairwise(sa, ca, sb, cb)
        return out

    def equal(self, x: Point, y: Point) -> bool:
        return self.distance(x, y) <= self.point_eq_tol


def as_batch(coords, width: int) -> np.ndarray:
    """Coerce to shape (m, width); 2-d input with ``width == 0`` keeps its row count."""
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 2 and coords.shape[1] == width:
        return coords
    if width == 0:
        return np.zeros((len(coords) if coords.ndim else 1, 0))
    return coords.reshape(-1, width)


def _row(x: Point) -> np.ndarray:
    return np.asarray(x.coords, dtype=float).reshape(1, len(x.coords))


def group_by_stratum(points: Iterable[Point]) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Map stratum -> (indices into ``points``, coordinate array)."""
    idx: dict[str, list[int]] = {}
    rows: dict[str, list[tuple[float, ...]]] = {}
    width: dict[str, int] = {}
    for i, p in enumerate(points):
        idx.setdefault(p.stratum, []).append(i)
        rows.setdefault(p.stratum, []).append(p.coords)
        width[p.stratum] = len(p.coords)
    return {
        s: (np.array(idx[s]), np.array(rows[s], dtype=float).reshape(len(idx[s]), width[s]))
        for s in idx
    }


def points_from_coords(space: MetricSpace, stratum: str, coords: np.ndarray) -> list[Point]:
    coords = np.asarray(coords, dtype=float)
    return [Point(space.scenario_id, stratum, tuple(float(v) for v in row)) for row in coords]


def distance(space: MetricSpace, x: Point, y: Point) -> float:
    return space.distance(x, y)


def sample_points(space: MetricSpace, count: int, seed: int) -> list[Point]:
    """Stratified, seeded sample.

    Point ``i`` lives in stratum ``i mod S`` and is drawn from its own child
    generator, so a sample of size ``n`` is a prefix of the sample of size
    ``2n`` for the same seed.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    names = list(space.strata)
    out = []
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        name = names[i % len(names)]
        coords = space.sample_stratum(name, rng)
        out.append(Point(space.scenario_id, name, tuple(float(c) for c in coords)))
    return out


def farthest_point_net(n: int, row: Callable[[int], np.ndarray], eps: float,
                       start: int = 0, cap: int | None = None) -> tuple[list[int], float]:
    """Farthest-point traversal stopped once every item is within ``eps``.

    ``row(i)`` returns distances from item ``i`` to all ``n`` items. Returns the
    chosen indices (pairwise more than ``eps`` apart) and the final covering
    radius. The traversal order does not depend on ``eps``, so the net for a
    larger ``eps`` is a prefix of the net for a smaller one. With ``cap`` the
    traversal stops after ``cap + 1`` centers.
    """
    if n == 0:
        return [], 0.0
    chosen = [start]
    mind = np.asarray(row(start), dtype=float).copy()
    while True:
        far = int(np.argmax(mind))
        radius = float(mind[far])
        if radius <= eps:
            return chosen, radius
        if cap is not None and len(chosen) > cap:
            return chosen, radius
        chosen.append(far)
        np.minimum(mind, row(far), out=mind)


def greedy_epsilon_net(space: MetricSpace, points: Sequence[Point], eps: float) -> list[Point]:
    """Farthest-point ε-net: covers ``points`` and is pairwise ``> eps`` separated."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    points = list(points)
    if not points:
        return []
    groups = group_by_stratum(points)

    def row(i):
        out = np.empty(len(points))
        for s, (ids, coords) in groups.items():
            out[ids] = space.distances_from(points[i], s, coords)
        return out

    chosen, _ = farthest_point_net(len(points), row, eps)
    return [points[i] for i in chosen]


@dataclass(frozen=True, eq=False)
class CompactSubset:
    """A compact set known through a vectorized indicator and a dense witness sample.

    ``circular`` marks witness samples that are sorted along a single circle;
    covering code can then use an exact interval algorithm.
    """

    indicator: Callable[[str, np.ndarray], np.ndarray]
    witness_sample: tuple[Point, ...]
    label: str = ""
    circular: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.witness_sample:
            raise ValueError("witness_sample must be nonempty")
        for s, (_, coords) in group_by_stratum(self.witness_sample).items():
            if not np.all(self.indicator(s, coords)):
                raise ValueError(f"witness points of {self.label or 'subset'} fail its indicator")

    def contains(self, x: Point) -> bool:
        return bool(self.indicator(x.stratum, _row(x))[0])

    def witness_coords(self) -> tuple[str, np.ndarray]:
        groups = group_by_stratum(self.witness_sample)
        if len(groups) != 1:
            raise ValueError("witness sample spans several strata")
        (s, (_, coords)), = groups.items()
        return s, coords
