from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orbitavg import measure as M
from orbitavg.errors import CoverageError, UnsupportedError
from orbitavg.space import Point


def brute_min_cover(sets, n):
    for k in range(1, len(sets) + 1):
        for combo in combinations(range(len(sets)), k):
            if set().union(*(sets[i] for i in combo)) == set(range(n)):
                return k
    return None


@settings(max_examples=150, deadline=None)
@given(n=st.integers(3, 14), data=st.data())
def test_circular_cover_is_minimal(n, data):
    m = data.draw(st.integers(1, 7))
    starts = np.array(data.draw(st.lists(st.integers(0, n - 1), min_size=m, max_size=m)))
    lengths = np.array(data.draw(st.lists(st.integers(0, n), min_size=m, max_size=m)))
    sets = [{(s + j) % n for j in range(L)} for s, L in zip(starts, lengths)]
    got = M._circular_cover(starts, lengths, n)
    want = brute_min_cover(sets, n)
    if want is None:
        assert got is None
    else:
        assert got is not None and len(got) == want
        assert set().union(*(sets[i] for i in got)) == set(range(n))


def test_full_circle_by_tenth_arcs(rotation):
    full = M.arc(rotation, 0.0, 1.0)
    B = M.arc(rotation, 0.3, 0.1, open_arc=True)
    r = M.covering_index(rotation, full, B)
    # an open arc of length 0.1 holds at most 100 of the 1000 witnesses
    assert 10 <= r.index_value <= 12 and r.lower_bound == 10 and r.exhaustive
    assert len(r.chosen_translates) == r.index_value


def test_quarter_arc_by_tenth_arcs(rotation):
    r = M.covering_index(rotation, M.arc(rotation, 0.5, 0.25), M.arc(rotation, 0.3, 0.1, open_arc=True))
    assert 3 <= r.index_value <= 4 and r.lower_bound <= r.index_value


def test_greedy_path_and_lower_bound(dyadic):
    A = M.cylinder(dyadic, (), witness_depth=8)
    B = M.cylinder(dyadic, (1, 0, 1), witness_depth=8)
    r = M.covering_index(dyadic, A, B, translate_pool_size=256)
    # cylinders of depth 3 tile the level: exactly 8 are needed
    assert r.index_value == 8 and r.lower_bound == 8 and r.exhaustive


def test_uncoverable_witnesses_raise(rotation):
    full = M.arc(rotation, 0.0, 1.0)
    B = M.arc(rotation, 0.3, 0.1, open_arc=True)
    with pytest.raises(CoverageError) as info:
        M.covering_index(rotation, full, B, translate_pool_size=3)
    assert len(info.value.residue) > 0


def test_translate_pool_starts_at_identity(rotation, dyadic):
    for sc in (rotation, dyadic):
        pool = M.translate_pool(sc, 100, seed=3)
        assert len(pool) == 100 and not pool[0].any()
        assert len({tuple(r) for r in pool}) == 100


@settings(max_examples=8, deadline=None)
@given(a=st.floats(0.05, 0.5), b=st.floats(0.05, 0.5), c=st.floats(0.02, 0.2))
def test_submultiplicativity_on_arcs(rotation, a, b, c):
    A = M.arc(rotation, 0.1, a, witness_count=300)
    B = M.arc(rotation, 0.6, b, witness_count=300)
    C = M.arc(rotation, 0.2, c, open_arc=True, witness_count=300)
    ab = M.covering_index(rotation, A, B)
    bc = M.covering_index(rotation, B, C)
    ac = M.covering_index(rotation, A, C)
    assert ab.exhaustive and bc.exhaustive and ac.exhaustive
    assert ac.index_value <= ab.index_value * bc.index_value


def test_lebesgue_ratio_of_arcs(rotation):
    a = Point(rotation.scenario_id, "circle", (0.1,))
    e = M.invariant_measure_estimate(rotation, M.arc(rotation, 0.0, 0.25),
                                     M.arc(rotation, 0.0, 0.5), a)
    assert e.converged and e.value == pytest.approx(0.5, abs=2e-2)
    assert [s[0] for s in e.stages] == list(M.default_eps_schedule())


def test_dyadic_cylinder_measure(dyadic):
    a = Point(dyadic.scenario_id, "J0", (0.0, 5.0))
    e = M.invariant_measure_estimate(dyadic, M.cylinder(dyadic, (1, 1)), M.cylinder(dyadic, ()), a,
                                     eps_schedule=(2.0**-3, 2.0**-5, 2.0**-7))
    assert e.value == 0.25 and all(s[1] == 0.25 for s in e.stages)


def test_measure_needs_invariant_balls(spiral, cylinder):
    for sc, s in ((spiral, "S+"), (cylinder, "limit")):
        fixed = (0.0,) if sc is cylinder else ()
        K = M.arc(sc, 0.0, 0.25, stratum=s, fixed=fixed)
        a = Point(sc.scenario_id, s, fixed + (0.1,))
        with pytest.raises(UnsupportedError):
            M.invariant_measure_estimate(sc, K, K, a)


def test_schedule_must_decrease(rotation):
    a = Point(rotation.scenario_id, "circle", (0.1,))
    K = M.arc(rotation, 0.0, 0.25)
    with pytest.raises(ValueError):
        M.invariant_measure_estimate(rotation, K, K, a, eps_schedule=(0.1, 0.2))


def test_translation_invariance(rotation):
    a = Point(rotation.scenario_id, "circle", (0.1,))
    K = M.arc(rotation, 0.2, 0.25)
    gK = M.translate_subset(rotation, K, rotation.group.element([17]))
    sched = (2.0**-6, 2.0**-8)
    A0 = M.arc(rotation, 0.0, 0.5)
    v = M.invariant_measure_estimate(rotation, K, A0, a, eps_schedule=sched).value
    w = M.invariant_measure_estimate(rotation, gK, A0, a, eps_schedule=sched).value
    assert v == pytest.approx(w, abs=2e-2)


def test_arc_indicator(rotation):
    K = M.arc(rotation, 0.9, 0.2)
    sid = rotation.scenario_id
    assert K.contains(Point(sid, "circle", (0.05,)))
    assert not K.contains(Point(sid, "circle", (0.5,)))
    U = M.arc(rotation, 0.9, 0.2, open_arc=True)
    assert not U.contains(Point(sid, "circle", (0.9,)))


def test_uniqueness_identity(rotation):
    a = Point(rotation.scenario_id, "circle", (0.1,))
    chk = M.uniqueness_check(rotation, M.arc(rotation, 0.3, 0.1), M.arc(rotation, 0.6, 0.25),
                             M.arc(rotation, 0.0, 0.5), a, eps_schedule=(2.0**-7, 2.0**-9))
    assert chk.passed
    assert chk.nu1 == pytest.approx(0.1, abs=5e-3) and chk.nu2 == pytest.approx(0.25, abs=5e-3)
