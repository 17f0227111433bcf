"""Lyapunov stability probes and the sampled almost-periodicity test.

"For every g" is truncated to a Følner set (the horizon), so a witness is
conclusive while a margin only holds at that horizon and sample.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .action import ActionScenario, Observable
from .groups import GroupElement
from .space import Point, farthest_point_net

DEFAULT_HORIZON = 2 ** 16
WORD_CHUNK = 1 << 17


@dataclass(frozen=True)
class Witness:
    y: Point
    g: GroupElement
    attained_distance: float


@dataclass(frozen=True)
class StabilityReport:
    x: Point
    eps: float
    probe_radius: float
    delta_estimate: float | None
    witness: Witness | None
    trials: int
    samples_drawn: int
    horizon: int
    tested_elements: int
    note: str = ""

    @property
    def verdict(self) -> str:
        if self.witness is not None:
            return "witness"
        return "margin" if self.delta_estimate is not None else "inconclusive"


def default_horizon(scenario: ActionScenario) -> int:
    return scenario.group.index_cap(DEFAULT_HORIZON)


def _draw_neighbors(scenario, x, radius, trials, rng):
    near = scenario.space.sample_near
    if near is None:
        return []
    ys = (near(x, radius, rng) for _ in range(trials))
    return [y for y in ys if y is not None]


def _first_violation(scenario, x, ys, words, gx, eps):
    """First y (in sampling order) and first word with d(gx, gy) >= eps."""
    space = scenario.space
    for y in ys:
        gy = scenario.orbit_coords(y, words)
        d = space.paired(x.stratum, gx, y.stratum, gy)
        bad = np.flatnonzero(d >= eps)
        if len(bad):
            i = int(bad[0])
            return Witness(y, scenario.group.from_row(words[i]), float(d[i]))
    return None


def _probe(scenario, x, eps, radius, horizon, trials, seed, select=None):
    if eps <= 0 or radius <= 0:
        raise ValueError("eps and probe_radius must be positive")
    rng = np.random.default_rng(seed)
    ys = _draw_neighbors(scenario, x, radius, trials, rng)
    tested = 0
    witness = None
    for words in scenario.group.folner_chunks(-1, horizon, WORD_CHUNK):
        gx = scenario.orbit_coords(x, words)
        if select is not None:
            keep = select(gx)
            words, gx = words[keep], gx[keep]
        tested += len(words)
        if not ys or not len(words):
            continue
        witness = _first_violation(scenario, x, ys, words, gx, eps)
        if witness is not None:
            break
    return ys, tested, witness


def stability_probe(scenario: ActionScenario, x: Point, eps: float,
                    probe_radius: float | None = None, horizon: int | None = None,
                    trials: int = 200, seed: int = 0) -> StabilityReport:
    """Look for y within ``probe_radius`` of x and g in F(horizon) with d(gx, gy) >= eps.

    Without a witness the margin estimate is ``probe_radius`` (every sampled
    pair survived); with no neighbor samples at all the report is inconclusive.
    """
    radius = eps if probe_radius is None else float(probe_radius)
    horizon = default_horizon(scenario) if horizon is None else int(horizon)
    ys, tested, witness = _probe(scenario, x, eps, radius, horizon, trials, seed)
    note = f"truncated to the Følner set of index {horizon}"
    if witness is not None:
        return StabilityReport(x, eps, radius, None, witness, trials, len(ys), horizon, tested, note)
    delta = radius if ys else None
    if not ys:
        note += "; no neighbors could be sampled"
    return StabilityReport(x, eps, radius, delta, None, trials, len(ys), horizon, tested, note)


def uniform_continuity_probe(scenario: ActionScenario, x: Point, eps: float,
                             probe_radius: float | None = None, horizon: int | None = None,
                             trials: int = 200, seed: int = 0) -> StabilityReport:
    """As :func:`stability_probe`, but g ranges over the detected stabilizer of x.

    The stabilizer is every g in F(horizon) with d(gx, x) within the point
    tolerance. A trivial stabilizer gives the full margin without sampling.
    """
    radius = eps if probe_radius is None else float(probe_radius)
    horizon = default_horizon(scenario) if horizon is None else int(horizon)
    space = scenario.space
    xc = np.asarray(x.coords, dtype=float).reshape(1, -1)

    def fixes_x(gx):
        return space.paired(x.stratum, gx, x.stratum, np.broadcast_to(xc, gx.shape)) <= space.point_eq_tol

    stab = 0
    for words in scenario.group.folner_chunks(-1, horizon, WORD_CHUNK):
        stab += int(np.count_nonzero(fixes_x(scenario.orbit_coords(x, words))))
    if stab <= 1:
        note = "trivial stabilizer detected; condition holds vacuously"
        return StabilityReport(x, eps, radius, radius, None, trials, 0, horizon, stab, note)
    ys, tested, witness = _probe(scenario, x, eps, radius, horizon, trials, seed, select=fixes_x)
    note = f"stabilizer of size {stab} within the Følner set of index {horizon}"
    if witness is not None:
        return StabilityReport(x, eps, radius, None, witness, trials, len(ys), horizon, tested, note)
    delta = radius if ys else None
    return StabilityReport(x, eps, radius, delta, None, trials, len(ys), horizon, tested, note)


@dataclass(frozen=True)
class AlmostPeriodicityReport:
    x: Point
    fname: str
    eps: float
    net_size: int | None
    separated_family_size: int
    covering_radius: float
    verdict: str  # "AP-at-resolution" or "Not-AP"
    net_cap: int

    @property
    def almost_periodic(self) -> bool:
        return self.verdict == "AP-at-resolution"


def translate_table(scenario: ActionScenario, fname: str | Observable, x: Point,
                    translate_count: int, probe_count: int, seed: int,
                    translate_radius: int = 2 ** 16, probe_radius: int = 2 ** 17) -> np.ndarray:
    """V[i, j] = φ((g_i h_j) x) for sampled translates g_i and shared probes h_j."""
    phi = scenario.function(fname)
    group = scenario.group
    rng = np.random.default_rng(seed)
    g = group.random_words(rng, translate_count, translate_radius)
    h = group.random_words(rng, probe_count, probe_radius)
    gh = group.compose_words(np.repeat(g, len(h), axis=0), np.tile(h, (len(g), 1)))
    vals = phi.values(x.stratum, scenario.orbit_coords(x, gh))
    return vals.reshape(len(g), len(h))


def almost_periodicity_test(scenario: ActionScenario, fname: str | Observable, x: Point,
                            eps: float, translate_count: int = 400, probe_count: int = 400,
                            net_cap: int = 64, seed: int = 0) -> AlmostPeriodicityReport:
    """Farthest-point ε-net of the translates L_g φ_x under the empirical sup-metric.

    Centers are pairwise more than ``eps`` apart, so a traversal that passes
    ``net_cap`` centers before covering exhibits a separated family larger
    than the cap (Not-AP). The traversal order does not depend on ``eps``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    table = translate_table(scenario, fname, x, translate_count, probe_count, seed)

    def row(i):
        return np.max(np.abs(table - table[i]), axis=1)

    chosen, radius = farthest_point_net(len(table), row, eps, cap=net_cap)
    name = fname if isinstance(fname, str) else fname.name
    if radius <= eps:
        return AlmostPeriodicityReport(x, name, eps, len(chosen), len(chosen), radius,
                                       "AP-at-resolution", net_cap)
    return AlmostPeriodicityReport(x, name, eps, None, len(chosen), radius, "Not-AP", net_cap)
