import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orbitavg.scenarios import SCENARIO_NAMES, build
from orbitavg.space import (CompactSubset, Point, farthest_point_net, greedy_epsilon_net,
                            sample_points)

SCENARIOS = {name: build(name) for name in SCENARIO_NAMES}


@pytest.mark.parametrize("name", SCENARIO_NAMES)
@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_metric_axioms_on_samples(name, seed):
    space = SCENARIOS[name].space
    pts = sample_points(space, 24, seed)
    d = space.matrix(pts, pts)
    assert np.allclose(d, d.T, atol=1e-12)
    assert np.all(np.diag(d) <= 1e-12)
    assert np.all(d >= 0) and np.all(d <= space.diameter + 1e-9)
    # triangle inequality
    assert np.all(d[:, None, :] <= d[:, :, None] + d[None, :, :] + 1e-9)


@pytest.mark.parametrize("name", SCENARIO_NAMES)
def test_samples_are_valid_and_prefix_stable(name):
    space = SCENARIOS[name].space
    a = sample_points(space, 30, 7)
    b = sample_points(space, 10, 7)
    assert a[:10] == b
    assert all(space.contains(p) for p in a)
    assert len({p.stratum for p in a}) == len(space.strata)


@pytest.mark.parametrize("name", SCENARIO_NAMES)
def test_sample_near_lands_inside_the_ball(name):
    space = SCENARIOS[name].space
    rng = np.random.default_rng(3)
    for x in sample_points(space, 14, 1):
        for r in (0.5, 0.05):
            y = space.sample_near(x, r, rng)
            if y is not None:
                assert space.contains(y)
                assert space.distance(x, y) < r


def test_point_repr_and_validation(rotation):
    p = rotation.space.point("circle", 0.25)
    assert repr(p) == "circle(0.25)"
    with pytest.raises(ValueError):
        rotation.space.point("circle", 1.5)
    with pytest.raises(ValueError):
        rotation.space.point("nowhere", 0.1)


def test_greedy_net_on_circle_matches_minimal_size(rotation):
    # 100 equally spaced points, radius 0.3: one center covers an arc of 0.6 < 1,
    # two antipodal centers cover everything, so the minimum is 2
    pts = [Point(rotation.scenario_id, "circle", (i / 100,)) for i in range(100)]
    net = greedy_epsilon_net(rotation.space, pts, 0.3)
    assert len(net) == 2
    d = rotation.space.matrix(pts, net)
    assert d.min(axis=1).max() <= 0.3


def test_greedy_net_edge_cases(rotation):
    assert greedy_epsilon_net(rotation.space, [], 0.1) == []
    with pytest.raises(ValueError):
        greedy_epsilon_net(rotation.space, [rotation.space.point("circle", 0.0)], 0.0)


@settings(max_examples=40, deadline=None)
@given(xs=st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=60),
       eps=st.floats(0.01, 0.5))
def test_farthest_point_net_covers_with_separated_centers(xs, eps):
    a = np.array(xs)

    def row(i):
        return np.abs(a - a[i])

    centers, radius = farthest_point_net(len(a), row, eps)
    assert radius <= eps
    assert np.abs(a[:, None] - a[centers][None, :]).min(axis=1).max() == radius
    c = a[centers]
    gaps = np.abs(c[:, None] - c[None, :]) + np.eye(len(c)) * 10
    assert gaps.min() > eps


def test_farthest_point_net_cap_stops_early():
    a = np.linspace(0, 1, 101)
    centers, radius = farthest_point_net(len(a), lambda i: np.abs(a - a[i]), 0.001, cap=5)
    # cap + 1 centers pairwise > eps apart exhibit a family larger than the cap
    assert len(centers) == 6 and radius > 0.001


def test_compact_subset_checks_its_witnesses(rotation):
    sid = rotation.scenario_id

    def indicator(s, c):
        return c[:, 0] < 0.5

    with pytest.raises(ValueError):
        CompactSubset(indicator, (Point(sid, "circle", (0.7,)),))
    K = CompactSubset(indicator, (Point(sid, "circle", (0.2,)),))
    assert K.contains(Point(sid, "circle", (0.1,)))
    assert not K.contains(Point(sid, "circle", (0.9,)))
