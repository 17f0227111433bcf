import numpy as np
import pytest

from orbitavg.action import apply
from orbitavg.scenarios import build
from orbitavg.space import Point
from orbitavg.stability import (almost_periodicity_test, default_horizon, stability_probe,
                                translate_table, uniform_continuity_probe)


def check_witness(sc, x, report):
    w = report.witness
    assert w is not None
    assert sc.space.distance(x, w.y) < report.probe_radius
    d = sc.space.distance(apply(sc, w.g, x), apply(sc, w.g, w.y))
    assert d == pytest.approx(w.attained_distance, abs=1e-9)
    assert d >= report.eps


def test_rotation_is_stable(rotation):
    x = Point(rotation.scenario_id, "circle", (0.3,))
    r = stability_probe(rotation, x, 0.1, trials=100)
    assert r.verdict == "margin" and r.delta_estimate == 0.1
    assert r.horizon == 2**16 and r.tested_elements == 2**17 + 1
    assert r.samples_drawn == 100


def test_spiral_witness_is_genuine(spiral):
    x = Point(spiral.scenario_id, "S+", (0.25,))
    r = stability_probe(spiral, x, 1.0, trials=100)
    check_witness(spiral, x, r)


def test_cylinder_witness_is_genuine(cylinder):
    x = Point(cylinder.scenario_id, "limit", (0.0, 0.25))
    r = stability_probe(cylinder, x, 0.5, trials=100)
    check_witness(cylinder, x, r)


def test_probe_is_seeded(spiral):
    x = Point(spiral.scenario_id, "S+", (0.25,))
    a = stability_probe(spiral, x, 1.0, trials=50, seed=4)
    b = stability_probe(spiral, x, 1.0, trials=50, seed=4)
    assert a == b


def test_probe_rejects_bad_radii(rotation):
    x = Point(rotation.scenario_id, "circle", (0.3,))
    with pytest.raises(ValueError):
        stability_probe(rotation, x, 0.0)


def test_default_horizon_per_group(rotation, dyadic, cone):
    assert default_horizon(rotation) == 2**16
    assert default_horizon(dyadic) == 16
    assert default_horizon(cone) == 2**16


def test_uniform_continuity_trivial_stabilizer(spiral):
    x = Point(spiral.scenario_id, "Sigma", (0.0,))
    r = uniform_continuity_probe(spiral, x, 0.5, horizon=2**10)
    assert r.tested_elements == 1 and r.delta_estimate == 0.5 and "trivial" in r.note


def test_uniform_continuity_stabilizer_sizes(dyadic):
    third = build("rational_rotation", alpha="1/3")
    x = Point(third.scenario_id, "circle", (0.2,))
    r = uniform_continuity_probe(third, x, 0.1, horizon=8, trials=20)
    # multiples of 3 in [-8, 8]
    assert r.tested_elements == 5 and r.verdict == "margin"
    y = Point(dyadic.scenario_id, "J3", (1 / 3, 0.0))
    r = uniform_continuity_probe(dyadic, y, 0.1, horizon=16, trials=10)
    # elements of G_16 with no support on the first three coordinates
    assert r.tested_elements == 2**13


def test_translate_table_shape_and_values(rotation):
    x = Point(rotation.scenario_id, "circle", (0.1,))
    t = translate_table(rotation, "cos1", x, 5, 7, seed=1)
    assert t.shape == (5, 7)
    assert np.all(np.abs(t) <= 1)


def test_constant_function_has_a_one_point_net(rotation):
    x = Point(rotation.scenario_id, "circle", (0.1,))
    r = almost_periodicity_test(rotation, "one", x, 0.01, translate_count=50, probe_count=50)
    assert r.almost_periodic and r.net_size == 1 and r.covering_radius == 0


def test_net_sizes_shrink_with_eps(rotation):
    x = Point(rotation.scenario_id, "circle", (0.1,))
    sizes = [almost_periodicity_test(rotation, "cos1", x, e, translate_count=200,
                                     probe_count=100).net_size for e in (0.1, 0.2, 0.4)]
    assert sizes[0] >= sizes[1] >= sizes[2] >= 1


def test_spiral_height_is_not_almost_periodic(spiral):
    x = Point(spiral.scenario_id, "Sigma", (0.5,))
    r = almost_periodicity_test(spiral, "z", x, 0.4)
    assert r.verdict == "Not-AP" and r.net_size is None
    assert r.separated_family_size > r.net_cap
