from __future__ import annotations

from fractions import Fraction

import numpy as np

from ..action import Observable, Quadrature
from ..errors import ScenarioError

TWO_PI = 2.0 * np.pi

# (sqrt(5) - 1) / 2, continued fraction [0; 1, 1, 1, ...]
GOLDEN = 0.618033988749894848204586834366


def frac(v: np.ndarray) -> np.ndarray:
    """v - floor(v); much faster than np.mod for floats."""
    return v - np.floor(v)


def wrap(t: np.ndarray) -> np.ndarray:
    """Reduce to [0, 1); tiny negative inputs would otherwise round up to 1.0."""
    t = frac(np.asarray(t, dtype=float))
    t[t >= 1.0] = 0.0
    return t


def rotation_offsets(n: np.ndarray, alpha) -> np.ndarray:
    """frac(n * alpha) for int64 ``n`` without the O(n * ulp) drift.

    alpha is split into a 26-bit head (so n * head is exact for |n| < 2^27)
    and a small tail.
    """
    alpha = np.asarray(alpha, dtype=float)
    head = np.round(alpha * 2.0 ** 26) / 2.0 ** 26
    tail = alpha - head
    n = np.asarray(n, dtype=np.int64)
    nf = n.astype(float)
    if n.size == 0 or np.abs(n).max() < (1 << 26):
        return frac(frac(nf * head) + nf * tail)
    lo = np.mod(n, 1 << 26).astype(float)
    hi = nf - lo
    return frac(frac(hi * head) + frac(lo * head) + nf * tail)


def arc_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = frac(a - b)
    return np.minimum(d, 1.0 - d)


def check_irrational(alpha: float, name: str = "alpha") -> float:
    alpha = float(alpha)
    if not np.isfinite(alpha) or alpha <= 0:
        raise ScenarioError(f"{name} must be a positive finite number")
    approx = Fraction(alpha).limit_denominator(10_000)
    if abs(alpha - float(approx)) < 1e-10:
        raise ScenarioError(f"{name}={alpha!r} is rational ({approx}) at float precision")
    return alpha


def circle_functions(col: int = -1) -> dict[str, Observable]:
    """Constants and low circle harmonics of the coordinate in column ``col``."""

    def t(c):
        return c[:, col]

    fns = {
        "one": Observable("one", lambda s, c: np.ones(len(c)), "constant 1"),
        "cos1": Observable("cos1", lambda s, c: np.cos(TWO_PI * t(c)), "cos 2πt"),
        "sin1": Observable("sin1", lambda s, c: np.sin(TWO_PI * t(c)), "sin 2πt"),
        "cos2": Observable("cos2", lambda s, c: np.cos(2 * TWO_PI * t(c)), "cos 4πt"),
        "sin2": Observable("sin2", lambda s, c: np.sin(2 * TWO_PI * t(c)), "sin 4πt"),
        "cos_sq": Observable("cos_sq", lambda s, c: np.cos(TWO_PI * t(c)) ** 2, "cos² 2πt"),
        "exp1": Observable("exp1", lambda s, c: np.exp(1j * TWO_PI * t(c)), "e^{2πit}"),
    }
    return fns


def circle_quadrature(stratum: str, size: int, fixed: tuple[float, ...] = ()) -> Quadrature:
    """Uniform measure on one circle: midpoint nodes, equal weights."""
    t = (np.arange(size) + 0.5) / size
    coords = np.column_stack([np.tile(np.asarray(fixed, dtype=float), (size, 1)), t])
    return Quadrature(stratum, coords, np.full(size, 1.0 / size))


def near_by_rejection(space, x, radius, rng, proposals, tries: int = 8):
    """Draw proposals (list of (stratum, coords array)) until one lands within ``radius``."""
    from ..space import Point

    for _ in range(tries):
        cands = []
        for stratum, coords in proposals(rng):
            if len(coords) == 0:
                continue
            d = space.distances_from(x, stratum, coords)
            ok = np.flatnonzero((d < radius) & (d > 0))
            cands.extend((stratum, coords[i]) for i in ok)
        if cands:
            stratum, row = cands[int(rng.integers(len(cands)))]
            return Point(space.scenario_id, stratum, tuple(float(v) for v in row))
    return None
