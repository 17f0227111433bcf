"""Two circles joined by a spiral, and the variant with the circles identified."""
from __future__ import annotations

import math

import numpy as np

from ..action import ActionScenario, Observable
from ..errors import UnsupportedError
from ..groups import FreeAbelian
from ..space import MetricSpace, Point, Stratum
from ._common import (GOLDEN, TWO_PI, check_irrational, circle_quadrature, near_by_rejection,
                      rotation_offsets, wrap)

Z = FreeAbelian(1)


def spiral_height(tau: np.ndarray) -> np.ndarray:
    return (2.0 / np.pi) * np.arctan(tau)


def _angle(tau: np.ndarray) -> np.ndarray:
    return TWO_PI * np.mod(tau, 1.0)


def _chord_metric(embed):
    def metric(sa, ca, sb, cb):
        diff = embed(sa, ca) - embed(sb, cb)
        return np.sqrt(np.sum(diff * diff, axis=-1))
    return metric


def _tau_grid(count: int, span: float) -> np.ndarray:
    if count == 1:
        return np.zeros(1)
    return -span + 2.0 * span * np.arange(count) / (count - 1)


def _far_tau(rng, size, r, sign, t0):
    """Spiral parameters whose height is within ``r`` of ``sign`` and angle near ``t0``."""
    m0 = math.ceil(2.0 / (np.pi * max(r, 1e-6)))
    m = np.floor(np.exp(rng.uniform(np.log(m0), np.log(m0 * 1000.0), size)))
    return sign * m + t0 + rng.uniform(-1, 1, size) * r / 8


def spiral_two_circles(alpha: float = GOLDEN, span: float = 30.0) -> ActionScenario:
    """S+ and S- at heights +1 and -1, and the spiral z = (2/pi) arctan(tau) between them.

    Z shifts t and tau by alpha. Distances are chordal in R^3. ``span`` sets the
    tau range of the default grid.
    """
    alpha = check_irrational(alpha)
    sid = f"spiral_two_circles(alpha={alpha!r})"
    heights = {"S+": 1.0, "S-": -1.0}

    def embed(s, c):
        if s == "Sigma":
            tau = c[..., 0]
            a = _angle(tau)
            return np.stack([np.cos(a), np.sin(a), spiral_height(tau)], axis=-1)
        a = TWO_PI * c[..., 0]
        return np.stack([np.cos(a), np.sin(a), np.full(a.shape, heights[s])], axis=-1)

    strata = {
        "S+": Stratum("S+", ("t",), ("periodic",)),
        "S-": Stratum("S-", ("t",), ("periodic",)),
        "Sigma": Stratum("Sigma", ("tau",), ("real",)),
    }

    def sample(name, rng):
        if name == "Sigma":
            return (float(np.tan(np.pi * rng.uniform(-0.99, 0.99) / 2.0)),)
        return (float(rng.random()),)

    def proposals_for(x, r):
        def proposals(rng):
            out = []
            if x.stratum == "Sigma":
                tau = x.coords[0]
                out.append(("Sigma", (tau + rng.uniform(-1, 1, 16) * r / 8).reshape(-1, 1)))
                for s, h in heights.items():
                    if abs(spiral_height(np.array([tau]))[0] - h) < r:
                        out.append((s, wrap(np.mod(tau, 1.0) + rng.uniform(-1, 1, 8) * r / 8).reshape(-1, 1)))
            else:
                t0 = x.coords[0]
                out.append((x.stratum, wrap(t0 + rng.uniform(-1, 1, 16) * r / 8).reshape(-1, 1)))
                out.append(("Sigma", _far_tau(rng, 16, r, heights[x.stratum], t0).reshape(-1, 1)))
            return out
        return proposals

    def near(x, r, rng):
        return near_by_rejection(space, x, r, rng, proposals_for(x, r))

    space = MetricSpace(sid, strata, _chord_metric(embed), 2.0 * math.sqrt(2.0), sample, near)

    def act(stratum, coords, words):
        if stratum == "Sigma":
            return (coords[:, 0] + words[:, 0].astype(float) * alpha).reshape(-1, 1)
        return wrap(coords[:, 0] + rotation_offsets(words[:, 0], alpha)).reshape(-1, 1)

    def closure(x, size):
        if x.stratum == "Sigma":
            raise UnsupportedError(
                "a spiral orbit accumulates on both circles; its closure has no unique invariant measure")
        return circle_quadrature(x.stratum, size)

    def xyz(k):
        return lambda s, c: embed(s, c)[:, k]

    fns = {
        "one": Observable("one", lambda s, c: np.ones(len(c)), "constant 1"),
        "x": Observable("x", xyz(0), "ambient x coordinate"),
        "y": Observable("y", xyz(1), "ambient y coordinate"),
        "z": Observable("z", xyz(2), "ambient height"),
    }

    def grid(size):
        k = size // 3
        pts = [Point(sid, "S+", (i / k,)) for i in range(k)]
        pts += [Point(sid, "S-", (i / k,)) for i in range(k)]
        pts += [Point(sid, "Sigma", (float(v),)) for v in _tau_grid(size - 2 * k, span)]
        return pts

    return ActionScenario(
        name="spiral_two_circles", space=space, group=Z, act_coords=act, functions=fns,
        metadata={
            "description": "two circles at z=±1 and a spiral z=(2/pi)arctan(tau) between them",
            "ground_truth": {
                "expectation_field:z": "Jump-detected",
                "mean:z:S+": 1.0, "mean:z:S-": -1.0, "mean:z:Sigma": 0.0,
                "stability": "witness",
                "almost_periodic:z:Sigma": "Not-AP",
            },
        },
        flags={"metric": True, "lyapunov_stable": False, "isometric": False,
               "invariant_balls": False, "trivial_stabilizers": True},
        closure=closure, default_grid=grid, params={"alpha": alpha, "span": span},
    )


def spiral_identified(alpha: float = GOLDEN, span: float = 30.0) -> ActionScenario:
    """The spiral with both circles glued to one circle S.

    Embedded in R^4 by (cos 2πτ, sin 2πτ, 1 - z², z(1 - z²)) on the spiral and
    (cos 2πt, sin 2πt, 0, 0) on S, so both ends of the spiral wind onto S.
    """
    alpha = check_irrational(alpha)
    sid = f"spiral_identified(alpha={alpha!r})"

    def embed(s, c):
        if s == "Sigma":
            tau = c[..., 0]
            a = _angle(tau)
            z = spiral_height(tau)
            w = 1.0 - z * z
            return np.stack([np.cos(a), np.sin(a), w, z * w], axis=-1)
        a = TWO_PI * c[..., 0]
        zero = np.zeros(a.shape)
        return np.stack([np.cos(a), np.sin(a), zero, zero], axis=-1)

    strata = {
        "S": Stratum("S", ("t",), ("periodic",)),
        "Sigma": Stratum("Sigma", ("tau",), ("real",)),
    }

    def sample(name, rng):
        if name == "Sigma":
            return (float(np.tan(np.pi * rng.uniform(-0.99, 0.99) / 2.0)),)
        return (float(rng.random()),)

    def proposals_for(x, r):
        def proposals(rng):
            if x.stratum == "Sigma":
                tau = x.coords[0]
                return [("Sigma", (tau + rng.uniform(-1, 1, 16) * r / 8).reshape(-1, 1)),
                        ("S", wrap(np.mod(tau, 1.0) + rng.uniform(-1, 1, 8) * r / 8).reshape(-1, 1))]
            t0 = x.coords[0]
            sign = np.where(rng.random(16) < 0.5, -1.0, 1.0)
            return [("S", wrap(t0 + rng.uniform(-1, 1, 16) * r / 8).reshape(-1, 1)),
                    ("Sigma", (sign * _far_tau(rng, 16, r, 1.0, 0.0) + t0).reshape(-1, 1))]
        return proposals

    def near(x, r, rng):
        return near_by_rejection(space, x, r, rng, proposals_for(x, r))

    # diameter: antipodal angles plus the largest bump (1 - z², z(1 - z²)) at z = 0
    space = MetricSpace(sid, strata, _chord_metric(embed), math.sqrt(5.0), sample, near)

    def act(stratum, coords, words):
        if stratum == "Sigma":
            return (coords[:, 0] + words[:, 0].astype(float) * alpha).reshape(-1, 1)
        return wrap(coords[:, 0] + rotation_offsets(words[:, 0], alpha)).reshape(-1, 1)

    def closure(x, size):
        # a spiral orbit winds onto S at both ends; the invariant measure lives on S
        return circle_quadrature("S", size)

    def coord(k):
        return lambda s, c: embed(s, c)[:, k]

    def abs_z(s, c):
        if s == "Sigma":
            return np.abs(spiral_height(c[:, 0]))
        return np.ones(len(c))

    fns = {
        "one": Observable("one", lambda s, c: np.ones(len(c)), "constant 1"),
        "x": Observable("x", coord(0), "first ambient coordinate"),
        "y": Observable("y", coord(1), "second ambient coordinate"),
        "w": Observable("w", coord(2), "1 - z² (zero on S)"),
        "abs_z": Observable("abs_z", abs_z, "|z|, equal to 1 on S"),
        "x_abs_z": Observable("x_abs_z", lambda s, c: coord(0)(s, c) * abs_z(s, c), "x |z|"),
    }

    def grid(size):
        k = size // 2
        pts = [Point(sid, "S", (i / k,)) for i in range(k)]
        pts += [Point(sid, "Sigma", (float(v),)) for v in _tau_grid(size - k, span)]
        return pts

    return ActionScenario(
        name="spiral_identified", space=space, group=Z, act_coords=act, functions=fns,
        metadata={
            "description": "spiral whose two ends wind onto a single circle",
            "ground_truth": {
                "expectation_field:abs_z": "Continuous-at-resolution",
                "mean:abs_z": 1.0,
            },
        },
        flags={"metric": True, "lyapunov_stable": False, "isometric": False,
               "invariant_balls": False, "trivial_stabilizers": True},
        closure=closure, default_grid=grid, params={"alpha": alpha, "span": span},
    )
