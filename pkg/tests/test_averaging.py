import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orbitavg.averaging import (expectation_field, finite_mean, folner_average, grid_mesh,
                                inner_product, orbit_closure_average)
from orbitavg.census import orbit_probe
from orbitavg.errors import UnsupportedError
from orbitavg.scenarios import GOLDEN
from orbitavg.space import Point


def dirichlet_mean_cos(x, N, alpha=GOLDEN):
    """Mean of cos 2π(x + nα) over |n| <= N, in closed form."""
    with mpmath.workdps(40):
        a = mpmath.mpf(alpha)
        k = 2 * N + 1
        return float(mpmath.cos(2 * mpmath.pi * x) * mpmath.sin(k * mpmath.pi * a)
                     / (k * mpmath.sin(mpmath.pi * a)))


@settings(max_examples=15, deadline=None)
@given(x=st.floats(0, 1, exclude_max=True))
def test_every_stage_matches_the_dirichlet_kernel(rotation, x):
    r = folner_average(rotation, "cos1", Point(rotation.scenario_id, "circle", (x,)), tol=1e-9,
                       n_max=2**14)
    assert [k for k, _ in r.stages] == [1024, 2048, 4096, 8192, 16384]
    for k, v in r.stages:
        assert v.real == pytest.approx(dirichlet_mean_cos(x, k), abs=1e-12)
        assert v.imag == 0


def test_convergence_flag_and_tolerance(rotation):
    x = Point(rotation.scenario_id, "circle", (0.2,))
    r = folner_average(rotation, "cos1", x)
    assert r.converged and abs(r.value) < 1e-3
    assert abs(r.stages[-1][1] - r.stages[-2][1]) < 1e-3
    tight = folner_average(rotation, "cos1", x, tol=1e-12, n_max=2**12)
    assert not tight.converged and "no two successive stages" in tight.note
    with pytest.raises(ValueError):
        folner_average(rotation, "cos1", x, tol=0)


@settings(max_examples=20, deadline=None)
@given(x=st.floats(0, 1, exclude_max=True),
       fname=st.sampled_from(["one", "cos1", "sin1", "cos2", "sin2", "cos_sq", "exp1"]))
def test_mean_is_bounded_by_the_sup_norm(rotation, x, fname):
    r = folner_average(rotation, fname, Point(rotation.scenario_id, "circle", (x,)))
    assert abs(r.value) <= r.sup_norm + 1e-12


def test_closure_quadrature_is_exact_for_low_harmonics(rotation):
    x = Point(rotation.scenario_id, "circle", (0.3,))
    assert orbit_closure_average(rotation, "cos_sq", x) == pytest.approx(0.5, abs=1e-14)
    assert abs(orbit_closure_average(rotation, "cos1", x)) < 1e-14
    assert orbit_closure_average(rotation, "one", x) == pytest.approx(1.0, abs=1e-14)


def test_finite_orbit_fast_path(rational7):
    x = Point(rational7.scenario_id, "circle", (0.05,))
    r = folner_average(rational7, "cos1", x)
    assert r.fast_path and r.orbit_size == 7 and r.converged
    brute = math.fsum(math.cos(2 * math.pi * ((0.05 + k / 7) % 1)) for k in range(7)) / 7
    assert r.value.real == pytest.approx(brute, abs=1e-15)
    assert orbit_closure_average(rational7, "cos1", x) == r.value


def test_finite_mean_ignores_order():
    rng = np.random.default_rng(0)
    v = rng.normal(size=1000) * 10.0 ** rng.integers(-8, 8, 1000)
    assert finite_mean(v) == finite_mean(v[::-1]) == finite_mean(rng.permutation(v))


def test_dyadic_fast_path_and_infinite_level(dyadic):
    sid = dyadic.scenario_id
    r = folner_average(dyadic, "dyadic_value", Point(sid, "J2", (0.5, 1.0)))
    assert r.fast_path and r.orbit_size == 4
    # the level-2 orbit runs over all four patterns in the first two coordinates
    assert r.value.real == pytest.approx(np.mean([0, 0.5, 0.25, 0.75]) + 0.0, abs=1e-15)
    x0 = Point(sid, "J0", (0.0, 12345.0))
    a = folner_average(dyadic, "bit1", x0)
    assert not a.fast_path and a.value.real == 0.5
    assert orbit_closure_average(dyadic, "bit1", x0) == pytest.approx(0.5, abs=1e-15)
    assert folner_average(dyadic, "cyl11", x0).value.real == 0.25


def test_spiral_means(spiral):
    sid = spiral.scenario_id
    assert folner_average(spiral, "z", Point(sid, "S+", (0.3,))).value.real == 1.0
    assert folner_average(spiral, "z", Point(sid, "S-", (0.3,))).value.real == -1.0
    for tau in (-30.0, 0.0, 25.0):
        r = folner_average(spiral, "z", Point(sid, "Sigma", (tau,)))
        assert r.converged and abs(r.value) < 2e-3
    with pytest.raises(UnsupportedError):
        orbit_closure_average(spiral, "z", Point(sid, "Sigma", (0.0,)))


def test_identified_spiral_closure_lives_on_the_circle(identified):
    x = Point(identified.scenario_id, "Sigma", (0.0,))
    assert orbit_closure_average(identified, "abs_z", x) == pytest.approx(1.0, abs=1e-14)
    r = folner_average(identified, "abs_z", x)
    assert r.value.real == pytest.approx(1.0, abs=1e-2)


def test_inner_product_is_hermitian(rotation):
    x = Point(rotation.scenario_id, "circle", (0.4,))
    a = inner_product(rotation, "exp1", "cos1", x).value
    b = inner_product(rotation, "cos1", "exp1", x).value
    assert a == pytest.approx(b.conjugate(), abs=1e-12)
    # ⟨e^{2πit}, cos 2πt⟩ = 1/2 for Lebesgue measure
    assert a == pytest.approx(0.5, abs=1e-3)


def test_expectation_field_on_rotation_is_flat(rotation):
    grid = rotation.grid(40)
    f = expectation_field(rotation, "cos1", grid)
    assert f.continuity_verdict == "Continuous-at-resolution"
    assert f.jump_window == pytest.approx(2 * grid_mesh(rotation, grid))
    assert all(f.converged) and len(f.values) == 40


def test_expectation_field_needs_points(rotation):
    with pytest.raises(ValueError):
        expectation_field(rotation, "cos1", [])


def test_orbit_probe_verdicts(rotation, dyadic, cone):
    from orbitavg.scenarios import build
    third = build("rational_rotation", alpha="1/3")
    assert orbit_probe(third, Point(third.scenario_id, "circle", (0.2,))).cardinality == 3
    p = orbit_probe(rotation, Point(rotation.scenario_id, "circle", (0.2,)), cutoff=2000)
    assert not p.finite and len(p.visited) == 2000
    assert orbit_probe(dyadic, Point(dyadic.scenario_id, "J3", (1 / 3, 0.0))).cardinality == 8
    assert not orbit_probe(dyadic, Point(dyadic.scenario_id, "J0", (0.0, 0.0))).finite
    assert orbit_probe(cone, Point(cone.scenario_id, "apex", ())).cardinality == 1
