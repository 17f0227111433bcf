"""Acceptance suite: each test carries one criterion code; conftest prints PASS/FAIL per code."""
import filecmp
import math
import os

import numpy as np
import pytest

from orbitavg import measure as M
from orbitavg.action import apply
from orbitavg.averaging import (expectation_field, finite_mean, folner_average, inner_product,
                                orbit_closure_average)
from orbitavg.census import census, classify_module
from orbitavg.cli import main
from orbitavg.scenarios import SCENARIO_NAMES, build
from orbitavg.scenarios._common import rotation_offsets
from orbitavg.space import Point, sample_points
from orbitavg.stability import (almost_periodicity_test, stability_probe, translate_table)

criterion = pytest.mark.criterion


def report(code, ok, detail):
    print(f"{code} {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, detail


@criterion("AC1", "Følner average equals the orbit-closure integral on the rotation")
def test_ac1_two_averages_agree(rotation):
    pts = sample_points(rotation.space, 20, 2024)
    worst = 0.0
    for fname in ("cos1", "cos_sq", "sin2"):
        for x in pts:
            a = folner_average(rotation, fname, x, n_max=2**20)
            b = orbit_closure_average(rotation, fname, x)
            worst = max(worst, abs(a.value - b))
    report("AC1", worst < 1e-2, f"max |Følner - closure| = {worst:.2e} over 60 pairs")


def exhaustive_mean(sc, fname, x, words):
    """Apply every listed element, keep distinct points, take the exact mean."""
    seen = {}
    for w in words:
        y = apply(sc, sc.group.element(w), x)
        seen.setdefault(y.coords, y)
    coords = np.array(list(seen), dtype=float).reshape(len(seen), -1)
    return finite_mean(sc.function(fname).values(x.stratum, coords)), len(seen)


@criterion("AC2", "finite-orbit fast path is bit-identical to exhaustive orbit summation")
def test_ac2_finite_orbit_exactness(rational7, dyadic):
    cases = [(rational7, Point(rational7.scenario_id, "circle", (t,)), [[n] for n in range(7)])
             for t in (0.0, 0.05, 0.3141592653589793, 0.9)]
    for n in range(1, 6):
        for d in (0, 5, 1 << 19 | 3):
            x = Point(dyadic.scenario_id, f"J{n}", (1.0 / n, float(d)))
            words = [[(m >> k) & 1 for k in range(n)] for m in range(1 << n)]
            cases.append((dyadic, x, words))
    checked = 0
    for sc, x, words in cases:
        for fname in sc.functions:
            r = folner_average(sc, fname, x)
            exact, size = exhaustive_mean(sc, fname, x, words)
            assert r.fast_path and r.orbit_size == size
            assert r.value == exact, (sc.name, x, fname)
            checked += 1
    report("AC2", True, f"{checked} (point, function) pairs bit-identical")


@criterion("AC3", "spiral expectation field is ±1 on the circles, 0 on the spiral, with a jump")
def test_ac3_spiral_discontinuity(spiral):
    grid = spiral.grid(300)
    f = expectation_field(spiral, "z", grid, n_max=2**22)
    truth = {"S+": 1.0, "S-": -1.0, "Sigma": 0.0}
    dev = max(abs(v - truth[x.stratum]) for x, v in zip(f.grid, f.values))
    ok = dev < 5e-2 and f.jump_detected and f.jump_magnitude > 0.8
    report("AC3", ok, f"max deviation {dev:.2e}, {f.continuity_verdict}, "
                      f"magnitude {f.jump_magnitude}")


def verified_witness(sc, x, r):
    w = r.witness
    return (w is not None and sc.space.distance(x, w.y) < r.probe_radius
            and sc.space.distance(apply(sc, w.g, x), apply(sc, w.g, w.y)) >= r.eps
            and max(abs(v) for v in w.g.word) <= 2**16)


@criterion("AC4", "instability witnesses on spiral and cylinder, none on the rotation")
def test_ac4_stability_witnesses(spiral, cylinder, rotation):
    xs = Point(spiral.scenario_id, "S+", (0.25,))
    rs = stability_probe(spiral, xs, 1.0, horizon=2**16)
    xc = Point(cylinder.scenario_id, "limit", (0.0, 0.25))
    rc = stability_probe(cylinder, xc, 0.5, horizon=2**16)
    xr = Point(rotation.scenario_id, "circle", (0.3,))
    rot = [stability_probe(rotation, xr, eps, trials=1000) for eps in (0.01, 0.1, 0.5)]
    ok = (verified_witness(spiral, xs, rs) and verified_witness(cylinder, xc, rc)
          and all(r.witness is None and r.samples_drawn == 1000 for r in rot))
    report("AC4", ok, f"spiral g={rs.witness and rs.witness.g}, cylinder g={rc.witness and rc.witness.g}, "
                      f"rotation verdicts {[r.verdict for r in rot]}")


def minimal_net_on_circle(rotation, x, eps):
    """Exact minimum ε-net of the cos translates used by the AP test (default sizes and seed)."""
    table = translate_table(rotation, "cos1", x, 400, 400, 0)
    g = rotation.group.random_words(np.random.default_rng(0), 400, 2**16)
    order = np.argsort(rotation_offsets(g[:, 0], rotation.params["alpha"]))
    t = table[order]
    close = np.max(np.abs(t[:, None, :] - t[None, :, :]), axis=2) <= eps
    n = len(t)
    starts, lengths = np.zeros(n, dtype=np.int64), close.sum(axis=1)
    for i in range(n):
        cols = np.flatnonzero(close[i])
        gaps = np.flatnonzero(np.diff(cols) > 1)
        if len(gaps) == 0:
            starts[i] = cols[0]
        else:
            # balls of translates are arcs in angle order
            assert len(gaps) == 1 and cols[0] == 0 and cols[-1] == n - 1
            starts[i] = cols[gaps[0] + 1]
    return len(M._circular_cover(starts, lengths, n))


@criterion("AC5", "cos 2πt is almost periodic with a near-minimal net; the spiral height is not")
def test_ac5_almost_periodicity(rotation, spiral):
    x = Point(rotation.scenario_id, "circle", (0.1,))
    ap = almost_periodicity_test(rotation, "cos1", x, 0.2)
    best = minimal_net_on_circle(rotation, x, 0.2)
    xs = Point(spiral.scenario_id, "Sigma", (0.5,))
    nap = almost_periodicity_test(spiral, "z", xs, 0.4)
    ok = (ap.almost_periodic and ap.net_size <= 2 * best
          and nap.verdict == "Not-AP" and nap.separated_family_size > 20)
    report("AC5", ok, f"net {ap.net_size} vs minimal {best}; spiral separated family "
                      f"{nap.separated_family_size}")


STABLE = ("rotation", "rational_rotation", "triple_cone", "dyadic_product")


@criterion("AC6", "inner-product positivity, Cauchy-Schwarz and invariance")
def test_ac6_inner_product_axioms():
    tol = 1e-3
    draws = 0
    worst_pos, worst_im, worst_cs, worst_inv = 0.0, 0.0, 0.0, 0.0
    per = math.ceil(1000 / len(SCENARIO_NAMES))
    for k, name in enumerate(SCENARIO_NAMES):
        sc = build(name)
        rng = np.random.default_rng(100 + k)
        names = sorted(sc.functions)
        for x in sample_points(sc.space, per, 7 + k):
            a, b = rng.choice(names, 2)
            pp, qq, pq = (inner_product(sc, u, v, x, tol) for u, v in ((a, a), (b, b), (a, b)))
            if not (pp.converged and qq.converged and pq.converged):
                continue
            draws += 1
            worst_pos = min(worst_pos, pp.value.real, qq.value.real)
            worst_im = max(worst_im, abs(pp.value.imag), abs(qq.value.imag))
            worst_cs = max(worst_cs, abs(pq.value) - math.sqrt(max(pp.value.real, 0) * max(qq.value.real, 0)))
        if name in STABLE:
            for x in sample_points(sc.space, 5, 50 + k):
                a, b = rng.choice(names, 2)
                base = inner_product(sc, a, b, x, tol).value
                for w in sc.group.random_words(rng, 20, 1000):
                    gx = apply(sc, sc.group.from_row(w), x)
                    worst_inv = max(worst_inv, abs(inner_product(sc, a, b, gx, tol).value - base))
    ok = (draws >= 1000 and worst_pos >= -1e-6 and worst_im < 1e-3
          and worst_cs <= 10 * tol and worst_inv < 5e-3)
    report("AC6", ok, f"{draws} converged draws; min Re<f,f> {worst_pos:.1e}, max |Im| "
                      f"{worst_im:.1e}, CS excess {worst_cs:.1e}, invariance {worst_inv:.1e}")


@criterion("AC7", "covering-index measure reproduces arc lengths, uniqueness and submultiplicativity")
def test_ac7_measure_construction(rotation):
    a = Point(rotation.scenario_id, "circle", (0.1,))
    A0 = M.arc(rotation, 0.0, 0.5)
    errs = []
    for length in (0.1, 0.25, 0.5):
        e = M.invariant_measure_estimate(rotation, M.arc(rotation, 0.3, length), A0, a)
        errs.append(abs(e.value - length / 0.5))
    rng = np.random.default_rng(7)
    sched = (2.0**-6, 2.0**-8, 2.0**-10)
    unique = []
    for _ in range(10):
        s1, s2 = rng.random(2)
        l1, l2 = rng.uniform(0.05, 0.5, 2)
        chk = M.uniqueness_check(rotation, M.arc(rotation, s1, l1), M.arc(rotation, s2, l2), A0, a,
                                 eps_schedule=sched, tol=3e-2)
        unique.append(chk.passed)
    sub = []
    for _ in range(10):
        arcs = [M.arc(rotation, rng.random(), L, open_arc=True, witness_count=300)
                for L in sorted(rng.uniform(0.03, 0.6, 3), reverse=True)]
        A, B, C = arcs
        ab, bc, ac = (M.covering_index(rotation, P, Q) for P, Q in ((A, B), (B, C), (A, C)))
        sub.append(ab.exhaustive and bc.exhaustive and ac.exhaustive
                   and ac.index_value <= ab.index_value * bc.index_value)
    ok = max(errs) < 2e-2 and all(unique) and all(sub)
    report("AC7", ok, f"ratio errors {[round(e, 4) for e in errs]}, uniqueness "
                      f"{sum(unique)}/10, submultiplicative {sum(sub)}/10")


@criterion("AC8", "classification labels with the cited sufficient condition")
def test_ac8_classification(rational7, dyadic, cone):
    expected = [(rational7, "SelfDual", "uniform-cardinality"),
                (dyadic, "Reflexive", "metric-stable"),
                (cone, "NotSelfDual-SelfDualFails", "many-closures")]
    got = []
    for sc, label, rule in expected:
        c = classify_module(census(sc, 60), sc.flags)
        got.append(c.summary)
        assert c.label == label and c.rules[0] == rule
        assert any(r.startswith(rule + ":") for r in c.reasons)
    c = census(rational7, 60)
    assert set(c.finite_cardinalities) == {7} and c.infinite_count == 0
    report("AC8", True, "; ".join(got))


@criterion("AC9", "--verify-fixtures twice with one seed gives byte-identical CSVs")
def test_ac9_determinism(tmp_path, capsys):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(["--verify-fixtures", "--seed", "3", "--out", a]) == 0
    assert main(["--verify-fixtures", "--seed", "3", "--out", b]) == 0
    capsys.readouterr()
    files = sorted(os.path.relpath(os.path.join(d, f), a) for d, _, fs in os.walk(a) for f in fs)
    match, mismatch, errors = filecmp.cmpfiles(a, b, files, shallow=False)
    ok = len(files) > 0 and not mismatch and not errors
    report("AC9", ok, f"{len(match)} CSVs identical")
