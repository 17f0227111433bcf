"""Invariant means by Følner averaging, orbit-closure quadrature and the expectation field."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .action import ActionScenario, Observable, product_observable
from .census import orbit_probe
from .space import Point

DEFAULT_TOL = 1e-3
DEFAULT_N_MAX = 2 ** 20
FINITE_ORBIT_CUTOFF = 1 << 16


@dataclass(frozen=True)
class AverageReport:
    """A Følner mean with its trace.

    ``stages`` holds ``(folner_index, partial_average)`` pairs. ``sup_norm`` is
    the largest |φ| met on the visited orbit points, so ``|value| <= sup_norm``.
    """

    value: complex
    stages: tuple[tuple[int, complex], ...]
    converged: bool
    tol_used: float
    sup_norm: float
    fast_path: bool = False
    orbit_size: int | None = None
    note: str = ""

    @property
    def real(self) -> float:
        return self.value.real


def finite_mean(values: np.ndarray) -> complex:
    """Order-independent mean: exactly rounded sums of the real and imaginary parts."""
    values = np.asarray(values)
    n = len(values)
    re = math.fsum(np.real(values).tolist())
    im = math.fsum(np.imag(values).tolist()) if np.iscomplexobj(values) else 0.0
    return complex(re / n, im / n)


def _sup(values: np.ndarray) -> float:
    return float(np.max(np.abs(values))) if len(values) else 0.0


def folner_average(scenario: ActionScenario, fname: str | Observable, x: Point,
                   tol: float = DEFAULT_TOL, n_max: int = DEFAULT_N_MAX,
                   n_start: int | None = None, probe_cutoff: int = 256) -> AverageReport:
    """Average φ(gx) over the Følner sets F(N), F(next N), ... until two stages agree within ``tol``.

    A finite orbit (detected with ``probe_cutoff``) is averaged exactly by
    counting. Otherwise stages run from ``n_start`` (the group's default start
    index when omitted) up to the cap implied by ``n_max``; the running sum is
    extended ring by ring so each orbit point is evaluated once.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    phi = scenario.function(fname)
    probe = orbit_probe(scenario, x, probe_cutoff)
    if probe.finite:
        vals = phi.values(x.stratum, probe.visited_coords)
        v = finite_mean(vals)
        return AverageReport(v, ((0, v),), True, tol, _sup(vals), fast_path=True,
                             orbit_size=probe.cardinality, note="finite orbit: exact counting mean")

    group = scenario.group
    cap = group.index_cap(n_max)
    k = group.start_index if n_start is None else int(n_start)
    k = min(k, cap)
    total, count, sup = 0j, 0, 0.0
    prev = -1
    stages: list[tuple[int, complex]] = []
    converged = False
    while True:
        for words in group.folner_chunks(prev, k):
            vals = phi.values(x.stratum, scenario.orbit_coords(x, words))
            total += complex(np.sum(vals))
            count += len(vals)
            sup = max(sup, _sup(vals))
        stages.append((k, total / count))
        if len(stages) >= 2 and abs(stages[-1][1] - stages[-2][1]) < tol:
            converged = True
            break
        nxt = group.next_index(k)
        if nxt > cap:
            break
        prev, k = k, nxt
    note = "" if converged else f"no two successive stages within {tol:g} up to index {k}"
    return AverageReport(stages[-1][1], tuple(stages), converged, tol, sup, note=note)


def orbit_closure_average(scenario: ActionScenario, fname: str | Observable, x: Point,
                          quadrature_size: int = 4096) -> complex:
    """Integrate φ against the invariant measure on the orbit closure of ``x``.

    Finite orbits use the counting measure and the same exact mean as the
    Følner fast path. Raises UnsupportedError where no closure measure is declared.
    """
    phi = scenario.function(fname)
    quad = scenario.closure_quadrature(x, quadrature_size)
    if quad is None:
        probe = orbit_probe(scenario, x, FINITE_ORBIT_CUTOFF)
        if not probe.finite:
            raise RuntimeError(f"closure of {x!r} declared finite but the orbit did not close")
        return finite_mean(phi.values(x.stratum, probe.visited_coords))
    vals = phi.values(quad.stratum, quad.coords)
    return complex(np.sum(vals * quad.weights))


def inner_product(scenario: ActionScenario, phi: str | Observable, psi: str | Observable,
                  x: Point, tol: float = DEFAULT_TOL, n_max: int = DEFAULT_N_MAX,
                  **kwargs) -> AverageReport:
    """⟨φ, ψ⟩(x): the Følner mean of φ(gx) conj(ψ(gx))."""
    f = scenario.function(phi)
    g = scenario.function(psi)
    return folner_average(scenario, product_observable(f, g), x, tol, n_max, **kwargs)


@dataclass(frozen=True)
class FieldReport:
    grid: tuple[Point, ...]
    values: tuple[complex, ...]
    converged: tuple[bool, ...]
    max_jump: float
    jump_window: float
    jump_threshold: float
    continuity_verdict: str  # "Continuous-at-resolution" or "Jump-detected"
    jump_location: tuple[Point, Point] | None = None
    jump_magnitude: float | None = None
    reports: tuple[AverageReport, ...] = ()

    @property
    def jump_detected(self) -> bool:
        return self.continuity_verdict == "Jump-detected"


def grid_mesh(scenario: ActionScenario, grid: Sequence[Point]) -> float:
    """Median nearest-neighbor distance of the grid."""
    if len(grid) < 2:
        return 0.0
    d = scenario.space.matrix(grid, grid)
    np.fill_diagonal(d, np.inf)
    return float(np.median(d.min(axis=1)))


def expectation_field(scenario: ActionScenario, fname: str | Observable, grid: Sequence[Point],
                      tol: float = DEFAULT_TOL, n_max: int = DEFAULT_N_MAX,
                      jump_window: float | None = None, jump_threshold: float = 0.1,
                      **kwargs) -> FieldReport:
    """Evaluate x -> M(φ_x) on a grid and look for jumps between nearby grid points.

    ``jump_window`` defaults to twice the median nearest-neighbor distance.
    Non-converged points stay in the field and are flagged in ``converged``.
    """
    grid = tuple(grid)
    if not grid:
        raise ValueError("grid must be nonempty")
    reports = tuple(folner_average(scenario, fname, x, tol, n_max, **kwargs) for x in grid)
    values = np.array([r.value for r in reports])
    window = 2.0 * grid_mesh(scenario, grid) if jump_window is None else float(jump_window)
    d = scenario.space.matrix(grid, grid)
    close = d < window
    np.fill_diagonal(close, False)
    jumps = np.where(close, np.abs(values[:, None] - values[None, :]), 0.0)
    i, j = np.unravel_index(int(np.argmax(jumps)), jumps.shape)
    max_jump = float(jumps[i, j])
    common = dict(grid=grid, values=tuple(complex(v) for v in values),
                  converged=tuple(r.converged for r in reports), max_jump=max_jump,
                  jump_window=window, jump_threshold=jump_threshold, reports=reports)
    if max_jump > jump_threshold:
        return FieldReport(continuity_verdict="Jump-detected", jump_location=(grid[i], grid[j]),
                           jump_magnitude=max_jump, **common)
    return FieldReport(continuity_verdict="Continuous-at-resolution", **common)
