"""Three double cones of circles glued at a common apex, acted on by Z + Z_3."""
from __future__ import annotations

import numpy as np

from ..action import ActionScenario, Observable, Quadrature
from ..errors import ScenarioError
from ..groups import DirectSum, FiniteCyclic, FreeAbelian
from ..space import MetricSpace, Point, Stratum
from ._common import GOLDEN, TWO_PI, check_irrational, near_by_rejection, rotation_offsets, wrap

GROUP = DirectSum([FreeAbelian(1), FiniteCyclic(3)])


def _embed(coords: np.ndarray) -> np.ndarray:
    """Circle k sits at height 1/k (sign of k) with radius 1/|k|."""
    h = 1.0 / coords[..., 1]
    r = np.abs(h)
    a = TWO_PI * coords[..., 2]
    return np.stack([r * np.cos(a), r * np.sin(a), h], axis=-1)


def triple_cone(alpha: float = GOLDEN, levels: int = 16) -> ActionScenario:
    """Copies c = 0, 1, 2 of the circles {|z| = 1/|k|}, all meeting at the apex.

    Z turns circle k of every copy by alpha/(|k|+1); Z_3 cycles the copies.
    Within a copy the metric is Euclidean on the cone, across copies it runs
    through the apex. Every orbit is infinite except the apex.
    ``levels`` bounds the |k| drawn by the samplers.
    """
    alpha = check_irrational(alpha)
    if levels < 1:
        raise ScenarioError("levels must be >= 1")
    sid = f"triple_cone(alpha={alpha!r})"

    def circle_check(c):
        return np.isin(c[:, 0], (0.0, 1.0, 2.0)) & (c[:, 1] != 0)

    strata = {
        "apex": Stratum("apex", (), ()),
        "circle": Stratum("circle", ("copy", "k", "t"), ("int", "int", "periodic"), circle_check),
    }

    def parts(s, c):
        if s == "apex":
            return np.full(c.shape[:-1], -1.0), np.zeros(c.shape[:-1] + (3,))
        return c[..., 0], _embed(c)

    def metric(sa, ca, sb, cb):
        copy_a, ea = parts(sa, ca)
        copy_b, eb = parts(sb, cb)
        na = np.linalg.norm(ea, axis=-1)
        nb = np.linalg.norm(eb, axis=-1)
        same = np.linalg.norm(ea - eb, axis=-1)
        # different copies meet only at the apex
        return np.where(copy_a == copy_b, same, na + nb)

    def sample(name, rng):
        if name == "apex":
            return ()
        k = int(rng.integers(1, levels + 1)) * int(rng.choice([-1, 1]))
        return (float(rng.integers(0, 3)), float(k), float(rng.random()))

    def proposals_for(x, r):
        def proposals(rng):
            out = []
            kmin = int(np.ceil(np.sqrt(2.0) / r))
            ks = rng.integers(kmin, kmin * 8 + 2, 8) * rng.choice([-1, 1], 8)
            if x.stratum == "apex":
                out.append(("circle", np.column_stack([rng.integers(0, 3, 8), ks, rng.random(8)])))
                return out
            c0, k0, t0 = x.coords
            out.append(("circle", np.column_stack(
                [np.full(16, c0), np.full(16, k0), wrap(t0 + rng.uniform(-1, 1, 16) * r / 8)])))
            nk = k0 + rng.integers(-2, 3, 8)
            nk[nk == 0] = k0
            out.append(("circle", np.column_stack([np.full(8, c0), nk, wrap(t0 + rng.uniform(-1, 1, 8) * r / 8)])))
            out.append(("circle", np.column_stack([rng.integers(0, 3, 8), ks, rng.random(8)])))
            out.append(("apex", np.zeros((1, 0))))
            return out
        return proposals

    def near(x, r, rng):
        return near_by_rejection(space, x, r, rng, proposals_for(x, r))

    space = MetricSpace(sid, strata, metric, 2.0 * np.sqrt(2.0), sample, near)

    def act(stratum, coords, words):
        if stratum == "apex":
            return coords.copy()
        step = alpha / (np.abs(coords[:, 1]) + 1.0)
        t = wrap(coords[:, 2] + rotation_offsets(words[:, 0], step))
        copy = np.mod(coords[:, 0] + words[:, 1], 3).astype(float)
        return np.column_stack([copy, coords[:, 1], t])

    def closure(x, size):
        if x.stratum == "apex":
            return None
        per = max(1, size // 3)
        t = (np.arange(per) + 0.5) / per
        coords = np.concatenate([np.column_stack([np.full(per, c), np.full(per, x.coords[1]), t])
                                 for c in (0.0, 1.0, 2.0)])
        return Quadrature("circle", coords, np.full(3 * per, 1.0 / (3 * per)))

    def on_circle(f):
        def fn(s, c):
            if s == "apex":
                return np.zeros(len(c))
            return f(c)
        return fn

    def radius(c):
        return 1.0 / np.abs(c[:, 1])

    fns = {
        "one": Observable("one", lambda s, c: np.ones(len(c)), "constant 1"),
        "height": Observable("height", on_circle(lambda c: 1.0 / c[:, 1]), "signed height 1/k"),
        "r": Observable("r", on_circle(radius), "circle radius"),
        "r_cos": Observable("r_cos", on_circle(lambda c: radius(c) * np.cos(TWO_PI * c[:, 2])),
                            "r cos 2πt"),
        "r_sin": Observable("r_sin", on_circle(lambda c: radius(c) * np.sin(TWO_PI * c[:, 2])),
                            "r sin 2πt"),
        "copy0_r": Observable("copy0_r", on_circle(lambda c: np.where(c[:, 0] == 0, radius(c), 0.0)),
                              "radius on copy 0, zero elsewhere"),
    }

    def grid(size):
        pts = [Point(sid, "apex", ())]
        n = 0
        while len(pts) < size:
            c, rest = n % 3, n // 3
            k = (rest % levels + 1) * (1 if (rest // levels) % 2 == 0 else -1)
            pts.append(Point(sid, "circle", (float(c), float(k), ((rest * 7) % 16) / 16)))
            n += 1
        return pts

    return ActionScenario(
        name="triple_cone", space=space, group=GROUP, act_coords=act, functions=fns,
        metadata={
            "description": "three double cones of circles glued at the apex; Z_3 permutes the cones",
            "angle_rule": "alpha_k = alpha/(|k|+1)",
            "ground_truth": {"classification": "NotSelfDual-SelfDualFails",
                             "apex_orbit_cardinality": 1},
        },
        flags={"metric": True, "lyapunov_stable": True, "isometric": True,
               "invariant_balls": False},
        closure=closure, default_grid=grid, params={"alpha": alpha, "levels": levels},
    )
