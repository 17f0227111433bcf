"""Circle rotations and the cylinder of circles rotating at varying angles."""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from ..action import ActionScenario, Observable
from ..errors import ScenarioError
from ..groups import FreeAbelian
from ..space import MetricSpace, Point, Stratum
from ._common import (GOLDEN, TWO_PI, arc_distance, check_irrational, circle_functions,
                      circle_quadrature, near_by_rejection, rotation_offsets, wrap)

Z = FreeAbelian(1)


def _circle_space(scenario_id: str) -> MetricSpace:
    def metric(sa, ca, sb, cb):
        return arc_distance(ca[..., 0], cb[..., 0])

    def sample(name, rng):
        return (float(rng.random()),)

    def near(x, r, rng):
        delta = min(r, 0.5) * rng.uniform(0.0, 1.0) * rng.choice([-1.0, 1.0])
        t = wrap(np.array([x.coords[0] + delta]))[0]
        return Point(scenario_id, "circle", (float(t),))

    strata = {"circle": Stratum("circle", ("t",), ("periodic",))}
    return MetricSpace(scenario_id, strata, metric, 0.5, sample, near)


def _circle_grid(scenario_id):
    def grid(size):
        return [Point(scenario_id, "circle", (i / size,)) for i in range(size)]
    return grid


def rotation(alpha: float = GOLDEN) -> ActionScenario:
    """Z acting on the circle by t -> t + alpha (mod 1), alpha irrational."""
    alpha = check_irrational(alpha)
    sid = f"rotation(alpha={alpha!r})"
    space = _circle_space(sid)

    def act(stratum, coords, words):
        return wrap(coords[:, 0] + rotation_offsets(words[:, 0], alpha)).reshape(-1, 1)

    def closure(x, size):
        return circle_quadrature("circle", size)

    return ActionScenario(
        name="rotation", space=space, group=Z, act_coords=act,
        functions=circle_functions(0),
        metadata={
            "description": "irrational rotation of the unit-circumference circle",
            "alpha_continued_fraction": "[0; 1, 1, 1, ...]" if alpha == GOLDEN else "unknown",
            "ground_truth": {
                "expectation_field:cos1": "Continuous-at-resolution",
                "mean:cos1": 0.0, "mean:cos_sq": 0.5, "mean:one": 1.0,
                "stability": "no-witness",
                "almost_periodic:cos1:circle": "AP-at-resolution",
            },
        },
        flags={"metric": True, "lyapunov_stable": True, "isometric": True,
               "invariant_balls": True},
        closure=closure, default_grid=_circle_grid(sid), params={"alpha": alpha},
    )


def _parse_fraction(alpha) -> Fraction:
    if isinstance(alpha, str):
        return Fraction(alpha.strip())
    if isinstance(alpha, float):
        return Fraction(alpha).limit_denominator(10_000)
    return Fraction(alpha)


def rational_rotation(p: int | None = None, q: int | None = None, alpha=None) -> ActionScenario:
    """Rotation by p/q; every orbit has exactly q points.

    Offsets are computed from the exact residue (n p mod q) / q so that orbit
    points are bit-identical however they are reached.
    """
    if alpha is not None:
        frac = _parse_fraction(alpha)
    elif p is not None and q is not None:
        frac = Fraction(int(p), int(q))
    else:
        frac = Fraction(1, 7)
    if frac.denominator < 1 or frac <= 0:
        raise ScenarioError("rational_rotation needs a positive fraction p/q")
    p, q = frac.numerator, frac.denominator
    sid = f"rational_rotation(alpha={p}/{q})"
    space = _circle_space(sid)

    def act(stratum, coords, words):
        off = np.mod(words[:, 0] * p, q).astype(float) / q
        return wrap(coords[:, 0] + off).reshape(-1, 1)

    return ActionScenario(
        name="rational_rotation", space=space, group=Z, act_coords=act,
        functions=circle_functions(0),
        metadata={
            "description": f"rotation by {p}/{q}; all orbits have {q} points",
            "ground_truth": {"classification": "SelfDual", "orbit_cardinality": q},
        },
        flags={"metric": True, "lyapunov_stable": True, "isometric": True,
               "invariant_balls": True},
        closure=lambda x, size: None, default_grid=_circle_grid(sid),
        params={"p": p, "q": q, "alpha": p / q},
    )


def varying_angle_cylinder(alpha: float = GOLDEN, levels: int = 4096) -> ActionScenario:
    """J x S^1 with J = {0} u {1/i}; circle 1/i turns by alpha_i = alpha + 1/(i sqrt 2).

    The limit circle turns by alpha. The averages are continuous in x but
    nearby circles drift apart, so the action is not Lyapunov stable.
    ``levels`` bounds the circles drawn by the samplers.
    """
    alpha = check_irrational(alpha)
    if levels < 2:
        raise ScenarioError("levels must be >= 2")
    sid = f"varying_angle_cylinder(alpha={alpha!r})"

    def level_of(j):
        return np.round(1.0 / np.where(j > 0, j, 1.0))

    def level_check(c):
        j = c[:, 0]
        i = level_of(j)
        return (j > 0) & (j <= 1.0) & (np.abs(j * i - 1.0) < 1e-9)

    strata = {
        "limit": Stratum("limit", ("j", "t"), ("real", "periodic"), lambda c: c[:, 0] == 0.0),
        "level": Stratum("level", ("j", "t"), ("real", "periodic"), level_check),
    }

    def metric(sa, ca, sb, cb):
        return np.abs(ca[..., 0] - cb[..., 0]) + arc_distance(ca[..., 1], cb[..., 1])

    def sample(name, rng):
        if name == "limit":
            return (0.0, float(rng.random()))
        i = int(np.floor(np.exp(rng.random() * np.log(levels)))) or 1
        return (1.0 / i, float(rng.random()))

    def proposals_for(x, r):
        j0, t0 = x.coords

        def proposals(rng):
            out = []
            dt = rng.uniform(-1, 1, 16) * min(r, 0.5)
            out.append((x.stratum, np.column_stack([np.full(16, j0), wrap(t0 + dt)])))
            # other circles with |j - j0| < r
            lo_j, hi_j = max(j0 - r, 0.0), j0 + r
            i_lo = max(1, math.ceil(1.0 / hi_j)) if hi_j > 0 else levels
            i_hi = levels if lo_j <= 0 else min(levels, math.floor(1.0 / lo_j))
            if i_lo <= i_hi:
                i = rng.integers(i_lo, i_hi + 1, 16)
                out.append(("level", np.column_stack([1.0 / i, wrap(t0 + rng.uniform(-1, 1, 16) * r)])))
            if j0 > 0 and j0 < r:
                out.append(("limit", np.column_stack([np.zeros(4), wrap(t0 + rng.uniform(-1, 1, 4) * (r - j0))])))
            return out
        return proposals

    def near(x, r, rng):
        return near_by_rejection(space, x, r, rng, proposals_for(x, r))

    space = MetricSpace(sid, strata, metric, 1.5, sample, near)

    def angles(j):
        i = level_of(j)
        return np.where(j > 0, alpha + 1.0 / (i * math.sqrt(2.0)), alpha)

    def act(stratum, coords, words):
        off = rotation_offsets(words[:, 0], angles(coords[:, 0]))
        return np.column_stack([coords[:, 0], wrap(coords[:, 1] + off)])

    def closure(x, size):
        return circle_quadrature(x.stratum, size, (x.coords[0],))

    fns = circle_functions(1)
    fns["level"] = Observable("level", lambda s, c: c[:, 0].copy(), "the J coordinate")
    fns["j_cos"] = Observable("j_cos", lambda s, c: c[:, 0] * np.cos(TWO_PI * c[:, 1]),
                              "j cos 2πt")

    def grid(size):
        half = size // 2
        pts = [Point(sid, "limit", (0.0, k / half)) for k in range(half)]
        rest = size - half
        per = max(1, rest // 8)
        k = 0
        i = 1
        while len(pts) < size:
            pts.append(Point(sid, "level", (1.0 / i, (k % per) / per)))
            k += 1
            if k % per == 0:
                i = i * 2
        return pts

    return ActionScenario(
        name="varying_angle_cylinder", space=space, group=Z, act_coords=act,
        functions=fns,
        metadata={
            "description": "circles 1/i rotated by alpha + 1/(i sqrt 2); limit circle by alpha",
            "angle_rule": "alpha_i = alpha + 1/(i*sqrt(2))",
            "ground_truth": {
                "expectation_field:cos1": "Continuous-at-resolution",
                "stability": "witness",
            },
        },
        flags={"metric": True, "lyapunov_stable": False, "isometric": False,
               "invariant_balls": False},
        closure=closure, default_grid=grid, params={"alpha": alpha, "levels": levels},
    )
