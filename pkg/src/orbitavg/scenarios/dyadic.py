"""J x D: dyadic sequences over the levels J = {0, 1, 1/2, ..., 1/levels}.

D is truncated to ``depth`` binary coordinates, stored as an integer bitmask
(bit k-1 holds coordinate k). An element g of the direct sum of Z_2 acts on
level 1/n through its projection onto the first n coordinates and on level 0
through all of them.
"""
from __future__ import annotations

import numpy as np

from ..action import ActionScenario, Observable, Quadrature
from ..errors import ScenarioError
from ..groups import InfiniteSumZ2
from ..space import MetricSpace, Point, Stratum
from ._common import near_by_rejection

GROUP = InfiniteSumZ2()


# weight of each byte: bit b contributes 2^-(b+1)
_BYTE_WEIGHT = np.array([sum(2.0 ** -(b + 1) for b in range(8) if v >> b & 1) for v in range(256)])


def bit_weight(x: np.ndarray, depth: int) -> np.ndarray:
    """Sum of 2^-k over the coordinates k <= depth where the bitmask ``x`` is set."""
    x = np.asarray(x, dtype=np.int64) & ((1 << depth) - 1)
    out = np.zeros(x.shape)
    for byte in range((depth + 7) // 8):
        out += _BYTE_WEIGHT[(x >> (8 * byte)) & 255] * 2.0 ** (-8 * byte)
    return out


def dyadic_product(levels: int = 6, depth: int = 20) -> ActionScenario:
    if not 1 <= levels <= depth:
        raise ScenarioError("need 1 <= levels <= depth")
    if not 1 <= depth <= 52:
        raise ScenarioError("depth must lie in 1..52")
    sid = f"dyadic_product(levels={levels}, depth={depth})"
    full = (1 << depth) - 1

    def level_n(stratum: str) -> int:
        return int(stratum[1:])

    def j_of(n: int) -> float:
        return 0.0 if n == 0 else 1.0 / n

    def mask_of(n: int) -> int:
        return full if n == 0 else (1 << n) - 1

    def make_check(n):
        def check(c):
            d = c[:, 1]
            return (c[:, 0] == j_of(n)) & (d >= 0) & (d <= full) & (d == np.round(d))
        return check

    strata = {f"J{n}": Stratum(f"J{n}", ("j", "d"), ("real", "int"), make_check(n))
              for n in range(levels + 1)}

    def metric(sa, ca, sb, cb):
        x = np.bitwise_xor(ca[..., 1].astype(np.int64), cb[..., 1].astype(np.int64))
        return np.abs(ca[..., 0] - cb[..., 0]) + bit_weight(x, depth)

    def sample(name, rng):
        return (j_of(level_n(name)), float(rng.integers(0, full + 1)))

    def proposals_for(x, r):
        def proposals(rng):
            k1 = int(np.ceil(-np.log2(r))) + 1 if r < 1 else 1
            d0 = int(x.coords[1])
            out = []
            if k1 <= depth:
                flips = rng.integers(1, 1 << (depth - k1 + 1), 16, dtype=np.int64) << (k1 - 1)
                ds = np.bitwise_xor(np.int64(d0), flips).astype(float)
                out.append((x.stratum, np.column_stack([np.full(16, x.coords[0]), ds])))
            for n in range(levels + 1):
                if f"J{n}" != x.stratum and abs(j_of(n) - x.coords[0]) < r:
                    out.append((f"J{n}", np.array([[j_of(n), float(d0)]])))
            return out
        return proposals

    def near(x, r, rng):
        return near_by_rejection(space, x, r, rng, proposals_for(x, r))

    space = MetricSpace(sid, strata, metric, 1.0 + 1.0 - 2.0 ** -depth, sample, near)

    def act(stratum, coords, words):
        d = coords[:, 1].astype(np.int64)
        g = words[:, 0] & mask_of(level_n(stratum))
        return np.column_stack([coords[:, 0], np.bitwise_xor(d, g).astype(float)])

    def effective_generators(x):
        n = level_n(x.stratum)
        return GROUP.generators(depth if n == 0 else n)

    def closure(x, size):
        n = level_n(x.stratum)
        if n > 0:
            return None
        q = min(depth, max(int(size).bit_length() - 1, 0))
        e = np.arange(1 << q, dtype=np.int64)
        tail = int(x.coords[1]) & ~((1 << q) - 1)
        d = np.bitwise_or(e, tail).astype(float)
        return Quadrature(x.stratum, np.column_stack([np.zeros(len(e)), d]),
                          np.full(len(e), 2.0 ** -q))

    def bit(k):
        return lambda s, c: ((c[:, 1].astype(np.int64) >> (k - 1)) & 1).astype(float)

    def value(s, c):
        return bit_weight(c[:, 1].astype(np.int64), depth)

    fns = {
        "one": Observable("one", lambda s, c: np.ones(len(c)), "constant 1"),
        "bit1": Observable("bit1", bit(1), "indicator of first coordinate = 1"),
        "bit2": Observable("bit2", bit(2), "indicator of second coordinate = 1"),
        "cyl11": Observable("cyl11", lambda s, c: bit(1)(s, c) * bit(2)(s, c),
                            "indicator of the cylinder d1 = d2 = 1"),
        "level": Observable("level", lambda s, c: c[:, 0].copy(), "the J coordinate"),
        "dyadic_value": Observable("dyadic_value", value, "sum of d_k 2^-k"),
        "phase": Observable("phase", lambda s, c: np.exp(1j * np.pi * value(s, c)),
                            "exp(i pi sum d_k 2^-k)"),
    }

    def grid(size):
        pts = []
        i = 0
        while len(pts) < size:
            n = i % (levels + 1)
            d = (i * 2654435761) % (full + 1)
            pts.append(Point(sid, f"J{n}", (j_of(n), float(d))))
            i += 1
        return pts

    return ActionScenario(
        name="dyadic_product", space=space, group=GROUP, act_coords=act, functions=fns,
        metadata={
            "description": "dyadic fibers over J; level 1/n sees only the first n coordinates of g",
            "ground_truth": {
                "classification": "Reflexive",
                "orbit_cardinality_by_level": {n: 2 ** n for n in range(1, levels + 1)},
                "mean:bit1:J0": 0.5, "mean:cyl11:J0": 0.25,
            },
        },
        flags={"metric": True, "lyapunov_stable": True, "isometric": False,
               "invariant_balls": True},
        closure=closure, effective_generators=effective_generators, default_grid=grid,
        params={"levels": levels, "depth": depth},
    )
