"""Invariant measure from covering numbers by group translates.

Compact sets are indicators with dense witness samples, and covers are
decided on the witness sample only. (A : B) is the least number of translates
gB, g from a Følner pool, whose union contains A's witnesses. The ratio
(K_eps : U_eps(a)) / (A0 : U_eps(a)) along a shrinking schedule estimates the
invariant measure of K normalized by A0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .action import ActionScenario, Observable
from .averaging import DEFAULT_N_MAX, folner_average
from .errors import CoverageError, UnsupportedError
from .groups import GroupElement
from .space import CompactSubset, Point, points_from_coords

DEFAULT_POOL = 4096
ROW_CHUNK = 256


def default_eps_schedule() -> tuple[float, ...]:
    return tuple(2.0 ** -k for k in range(2, 11))


@dataclass(frozen=True)
class CoveringResult:
    index_value: int
    chosen_translates: tuple[GroupElement, ...]
    lower_bound: int
    exhaustive: bool
    pool_size: int


@dataclass(frozen=True)
class _Coverage:
    """Sparse incidence between pool translates (rows) and witness points (columns)."""

    n_rows: int
    n_cols: int
    row_ptr: np.ndarray
    row_cols: np.ndarray
    col_ptr: np.ndarray
    col_rows: np.ndarray

    def cols(self, r: int) -> np.ndarray:
        return self.row_cols[self.row_ptr[r]:self.row_ptr[r + 1]]

    def rows(self, c: int) -> np.ndarray:
        return self.col_rows[self.col_ptr[c]:self.col_ptr[c + 1]]

    @property
    def row_sizes(self) -> np.ndarray:
        return np.diff(self.row_ptr)


def translate_pool(scenario: ActionScenario, size: int, seed: int = 0) -> np.ndarray:
    """``size`` words from the smallest Følner set that is large enough.

    The identity always comes first; a larger Følner set is subsampled with
    ``seed`` and kept in Følner order.
    """
    group = scenario.group
    if size < 1:
        raise ValueError("translate pool must be nonempty")
    k = 0
    while group.folner_size(k) < size and k < group.max_index:
        k = group.next_index(k)
    words = group.folner_words(k)
    if len(words) > size:
        rng = np.random.default_rng(seed)
        pick = np.sort(rng.choice(np.arange(1, len(words)), size - 1, replace=False))
        words = np.concatenate([words[:1], words[pick]])
    return words


def _coverage(scenario: ActionScenario, stratum: str, coords: np.ndarray,
              B: CompactSubset, pool: np.ndarray) -> _Coverage:
    """Row g covers witness w when g^-1 w lies in B."""
    inv = scenario.group.invert_words(pool)
    m = len(coords)
    rows, cols = [], []
    for s in range(0, len(pool), ROW_CHUNK):
        w = inv[s:s + ROW_CHUNK]
        moved = scenario.act_coords(stratum, np.tile(coords, (len(w), 1)),
                                    np.repeat(w, m, axis=0))
        hit = np.asarray(B.indicator(stratum, moved), dtype=bool).reshape(len(w), m)
        r, c = np.nonzero(hit)
        rows.append(r + s)
        cols.append(c)
    rows = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    by_row = np.lexsort((cols, rows))
    by_col = np.lexsort((rows, cols))
    row_ptr = np.searchsorted(rows[by_row], np.arange(len(pool) + 1))
    col_ptr = np.searchsorted(cols[by_col], np.arange(m + 1))
    return _Coverage(len(pool), m, row_ptr, cols[by_row], col_ptr, rows[by_col])


def _cyclic_runs(cov: _Coverage):
    """(start, length) per row when every row is one cyclic run, else None."""
    n = cov.n_cols
    starts = np.zeros(cov.n_rows, dtype=np.int64)
    lengths = cov.row_sizes.astype(np.int64)
    for r in range(cov.n_rows):
        cols = cov.cols(r)
        if lengths[r] == 0 or lengths[r] == n:
            continue
        gaps = np.flatnonzero(np.diff(cols) > 1)
        if len(gaps) == 0:
            starts[r] = cols[0]
        elif len(gaps) == 1 and cols[0] == 0 and cols[-1] == n - 1:
            starts[r] = cols[gaps[0] + 1]
        else:
            return None
    return starts, lengths


def _circular_cover(starts: np.ndarray, lengths: np.ndarray, n: int) -> list[int] | None:
    """Minimum number of cyclic runs covering 0..n-1 (exact), as row indices."""
    if np.any(lengths >= n):
        return [int(np.argmax(lengths >= n))]
    live = np.flatnonzero(lengths > 0)
    # unrolled reach: best_end[p] = furthest end over runs starting at or before p
    ends = np.full(2 * n, -1, dtype=np.int64)
    arg = np.full(2 * n, -1, dtype=np.int64)
    for r in live:
        for s in (starts[r], starts[r] + n):
            e = s + lengths[r]
            if e > ends[s]:
                ends[s], arg[s] = e, r
        # the copy starting before 0 acts like a run starting at 0
        e = starts[r] + lengths[r] - n
        if e > ends[0]:
            ends[0], arg[0] = e, r
    reach = np.maximum.accumulate(ends)
    who = arg.copy()
    for p in range(1, 2 * n):
        if ends[p] < reach[p]:
            who[p] = who[p - 1]
    best = None
    for r in live:
        if not (starts[r] == 0 or starts[r] + lengths[r] > n):
            continue
        s, e = int(starts[r]), int((starts[r] + lengths[r]) % n or n)
        target = s if s > 0 else n
        chosen, p = [int(r)], e
        while p < target:
            if reach[p] <= p:
                chosen = None
                break
            chosen.append(int(who[p]))
            p = int(reach[p])
        if chosen is not None and (best is None or len(chosen) < len(best)):
            best = chosen
    return best


def _greedy_cover(cov: _Coverage) -> list[int]:
    """Greedy set cover with incremental counts; ties go to the earlier pool row."""
    gain = cov.row_sizes.astype(np.int64).copy()
    covered = np.zeros(cov.n_cols, dtype=bool)
    left = cov.n_cols
    chosen = []
    while left:
        r = int(np.argmax(gain))
        if gain[r] == 0:
            break
        chosen.append(r)
        for c in cov.cols(r):
            if not covered[c]:
                covered[c] = True
                left -= 1
                np.subtract.at(gain, cov.rows(c), 1)
    return chosen


def _packing_bound(cov: _Coverage) -> int:
    """Witness points no single pool row covers together; a lower bound on the cover."""
    blocked = np.zeros(cov.n_cols, dtype=bool)
    count = 0
    for c in range(cov.n_cols):
        if blocked[c]:
            continue
        count += 1
        for r in cov.rows(c):
            blocked[cov.cols(r)] = True
    return count


def covering_index(scenario: ActionScenario, A: CompactSubset, B: CompactSubset,
                   translate_pool_size: int = DEFAULT_POOL, seed: int = 0,
                   pool: np.ndarray | None = None) -> CoveringResult:
    """(A : B) on A's witness sample with translates gB from a Følner pool.

    When A is marked circular and every translate meets the witness list in a
    single cyclic run, the minimum is computed exactly (``exhaustive=True``).
    Otherwise a greedy cover is returned together with a packing lower bound;
    ``exhaustive`` is then set only when the two agree.
    """
    stratum, coords = A.witness_coords()
    words = translate_pool(scenario, translate_pool_size, seed) if pool is None else pool
    cov = _coverage(scenario, stratum, coords, B, words)
    uncovered = np.flatnonzero(np.diff(cov.col_ptr) == 0)
    if len(uncovered):
        raise CoverageError(
            f"{len(uncovered)} of {cov.n_cols} witness points of {A.label or 'A'} lie in no "
            f"translate of {B.label or 'B'} from a pool of {len(words)}", uncovered)
    lower = max(_packing_bound(cov), math.ceil(cov.n_cols / int(cov.row_sizes.max())))
    chosen = None
    if A.circular:
        runs = _cyclic_runs(cov)
        if runs is not None:
            chosen = _circular_cover(*runs, cov.n_cols)
    exhaustive = chosen is not None
    if chosen is None:
        chosen = _greedy_cover(cov)
        exhaustive = len(chosen) == lower
    group = scenario.group
    return CoveringResult(len(chosen), tuple(group.from_row(words[r]) for r in chosen),
                          min(lower, len(chosen)), exhaustive, len(words))


# subsets -----------------------------------------------------------------

def arc(scenario: ActionScenario, start: float, length: float, stratum: str = "circle",
        witness_count: int = 1000, fixed: Sequence[float] = (), open_arc: bool = False,
        label: str = "") -> CompactSubset:
    """The arc [start, start + length] (open when ``open_arc``) of a circle stratum.

    ``fixed`` holds the coordinates that precede the angle (e.g. a J level).
    Witnesses are listed in cyclic order.
    """
    sid = scenario.scenario_id
    fixed = tuple(float(v) for v in fixed)
    k = len(fixed)
    full = length >= 1.0
    if full:
        ts = np.arange(witness_count) / witness_count
    elif open_arc:
        ts = start + length * (np.arange(witness_count) + 0.5) / witness_count
    else:
        ts = start + length * np.arange(witness_count) / max(witness_count - 1, 1)
    ts = ts - np.floor(ts)
    ts[ts >= 1.0] = 0.0

    def indicator(s, c):
        c = np.asarray(c, dtype=float)
        ok = np.full(len(c), s == stratum)
        if k:
            ok &= np.all(c[:, :k] == np.asarray(fixed), axis=1)
        if full:
            return ok
        off = c[:, k] - start
        off = off - np.floor(off)
        # closed arcs tolerate the float error in start + length
        inside = (off > 0) & (off < length) if open_arc else (off <= length + 1e-12) | (off >= 1 - 1e-12)
        return ok & inside

    witness = tuple(Point(sid, stratum, fixed + (float(t),)) for t in ts)
    return CompactSubset(indicator, witness, label or f"arc({start:g}, {length:g})", circular=True,
                         meta={"length": min(float(length), 1.0), "start": float(start)})


def ball(scenario: ActionScenario, center: Point, radius: float,
         extra_witness: Sequence[Point] = ()) -> CompactSubset:
    """Open metric ball; the center is always a witness."""
    space = scenario.space

    def indicator(s, c):
        return space.distances_from(center, s, c) < radius

    inside = [p for p in extra_witness if space.distance(center, p) < radius]
    return CompactSubset(indicator, (center, *inside), f"ball({center!r}, {radius:g})")


def cylinder(scenario: ActionScenario, prefix: Sequence[int], stratum: str = "J0",
             witness_depth: int = 12) -> CompactSubset:
    """Dyadic sequences on one level whose first coordinates equal ``prefix``."""
    sid = scenario.scenario_id
    n = len(prefix)
    mask = (1 << n) - 1
    pattern = sum(int(b) << i for i, b in enumerate(prefix))
    j = 0.0 if stratum == "J0" else 1.0 / int(stratum[1:])

    def indicator(s, c):
        c = np.asarray(c, dtype=float)
        d = c[:, 1].astype(np.int64)
        return (s == stratum) & ((d & mask) == pattern)

    free = np.arange(1 << max(witness_depth - n, 0), dtype=np.int64)
    ds = (free << n) | pattern
    witness = tuple(Point(sid, stratum, (j, float(d))) for d in ds)
    return CompactSubset(indicator, witness, f"cylinder({''.join(map(str, prefix)) or 'all'})")


def translate_subset(scenario: ActionScenario, K: CompactSubset, g: GroupElement) -> CompactSubset:
    """gK: indicator pulled back by g^-1, witnesses pushed forward by g."""
    group = scenario.group
    row = group.row(g)
    inv = group.invert_words(row[None])[0]
    stratum, coords = K.witness_coords()

    def indicator(s, c):
        return K.indicator(s, scenario.act_batch(s, np.asarray(c, dtype=float), inv))

    moved = scenario.act_batch(stratum, coords, row)
    witness = tuple(points_from_coords(scenario.space, stratum, moved))
    return CompactSubset(indicator, witness, f"{g!r}·{K.label}", circular=K.circular, meta=dict(K.meta))


def indicator_observable(K: CompactSubset) -> Observable:
    return Observable(f"1[{K.label}]", lambda s, c: K.indicator(s, c).astype(float))


# measure -----------------------------------------------------------------

@dataclass(frozen=True)
class MeasureEstimate:
    K: CompactSubset
    A0: CompactSubset
    a: Point
    # (eps, lambda, (K_eps : U_eps), (A0 : U_eps))
    stages: tuple[tuple[float, float, int, int], ...]
    value: float
    converged: bool
    tol: float
    note: str = ("neighborhoods of K and the balls around a shrink together along one "
                 "schedule instead of as two nested limits")


def _universe(scenario: ActionScenario, a: Point, size: int) -> tuple[str, np.ndarray]:
    quad = scenario.closure_quadrature(a, size)
    if quad is None:
        raise UnsupportedError("the orbit of the base point is finite; no closure to measure")
    return quad.stratum, quad.coords


def _restrict(scenario, stratum, nodes, S: CompactSubset, eps: float | None) -> CompactSubset:
    """Universe nodes in S, or within ``eps`` of S's witnesses, as a witness sample."""
    inside = np.asarray(S.indicator(stratum, nodes), dtype=bool)
    if eps is not None:
        ws, wc = S.witness_coords()
        if ws == stratum:
            d = scenario.space.pairwise(stratum, nodes, ws, wc)
            inside |= d.min(axis=1) < eps
    if not inside.any():
        raise CoverageError(f"no universe node lies in {S.label}", [])
    pts = points_from_coords(scenario.space, stratum, nodes[inside])
    return CompactSubset(lambda s, c: np.ones(len(c), dtype=bool), tuple(pts), S.label,
                         circular=S.circular)


def _check_invariant_balls(scenario: ActionScenario):
    if not scenario.flags.get("invariant_balls"):
        raise UnsupportedError(
            f"{scenario.name}: metric balls are not invariant under this action, "
            "so covering ratios do not define the invariant measure")


def _ratio_stages(scenario, Ks, A0, a, schedule, pool_size, universe_size, seed):
    _check_invariant_balls(scenario)
    schedule = tuple(float(e) for e in schedule)
    if any(e2 >= e1 for e1, e2 in zip(schedule, schedule[1:])):
        raise ValueError("eps_schedule must be strictly decreasing")
    stratum, nodes = _universe(scenario, a, universe_size)
    pool = translate_pool(scenario, pool_size, seed)
    A0w = _restrict(scenario, stratum, nodes, A0, None)
    out = [[] for _ in Ks]
    for eps in schedule:
        U = ball(scenario, a, eps)
        a0 = covering_index(scenario, A0w, U, pool=pool).index_value
        for i, K in enumerate(Ks):
            Kw = _restrict(scenario, stratum, nodes, K, eps)
            kv = covering_index(scenario, Kw, U, pool=pool).index_value
            out[i].append((eps, kv / a0, kv, a0))
    return out


def _estimate(K, A0, a, stages, tol) -> MeasureEstimate:
    conv = len(stages) >= 2 and abs(stages[-1][1] - stages[-2][1]) < tol
    return MeasureEstimate(K, A0, a, tuple(stages), stages[-1][1], conv, tol)


def invariant_measure_estimate(scenario: ActionScenario, K: CompactSubset, A0: CompactSubset,
                               a: Point, eps_schedule: Sequence[float] | None = None,
                               tol: float = 2e-2, translate_pool_size: int = DEFAULT_POOL,
                               universe_size: int = 4096, seed: int = 0) -> MeasureEstimate:
    """λ'(K) normalized by A0, as the limit of (K_eps : U_eps(a)) / (A0 : U_eps(a)).

    Witnesses are the orbit-closure quadrature nodes of ``a``. Scenarios whose
    balls are not invariant are refused.
    """
    schedule = default_eps_schedule() if eps_schedule is None else eps_schedule
    (stages,) = _ratio_stages(scenario, [K], A0, a, schedule, translate_pool_size,
                              universe_size, seed)
    return _estimate(K, A0, a, stages, tol)


@dataclass(frozen=True)
class UniquenessCheck:
    lhs: float
    rhs: float
    passed: bool
    lambda1: MeasureEstimate
    lambda2: MeasureEstimate
    nu1: float
    nu2: float


def uniqueness_check(scenario: ActionScenario, K1: CompactSubset, K2: CompactSubset,
                     A0: CompactSubset, a: Point, eps_schedule: Sequence[float] | None = None,
                     tol: float = 3e-2, n_max: int = DEFAULT_N_MAX,
                     translate_pool_size: int = DEFAULT_POOL, universe_size: int = 4096,
                     seed: int = 0) -> UniquenessCheck:
    """Compare λ'(K1) ν(K2) with λ'(K2) ν(K1), ν being the Følner visit frequency from ``a``."""
    schedule = default_eps_schedule() if eps_schedule is None else eps_schedule
    s1, s2 = _ratio_stages(scenario, [K1, K2], A0, a, schedule, translate_pool_size,
                           universe_size, seed)
    l1, l2 = _estimate(K1, A0, a, s1, tol), _estimate(K2, A0, a, s2, tol)
    nu1 = folner_average(scenario, indicator_observable(K1), a, n_max=n_max).value.real
    nu2 = folner_average(scenario, indicator_observable(K2), a, n_max=n_max).value.real
    lhs, rhs = l1.value * nu2, l2.value * nu1
    return UniquenessCheck(lhs, rhs, abs(lhs - rhs) < tol * max(1.0, abs(lhs)), l1, l2, nu1, nu2)
