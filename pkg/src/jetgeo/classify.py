"""Hill intervals, equilibria and the five geodesic types."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import InvalidInterval, NoHillInterval, ZeroGradient
from .poly import VecPoly, _trim, real_roots

TOUCH_TOL = 1e-10


class GeodesicType(str, enum.Enum):
    LINE = "Line"
    PERIODIC = "Periodic"
    HOMOCLINIC = "Homoclinic"
    DIRECT = "Direct"
    TURNBACK = "TurnBack"


@dataclass(frozen=True)
class HillInterval:
    """Connected component of {V <= 1}; infinite ends carry multiplicity 0."""

    x0: float
    x1: float
    mult0: int
    mult1: int

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.x0) and math.isfinite(self.x1)

    @property
    def is_point(self) -> bool:
        return self.x0 == self.x1

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.x0 - tol <= x <= self.x1 + tol


def one_minus(v: np.ndarray, level: float = 1.0) -> np.ndarray:
    q = -np.asarray(v, dtype=float)
    q[0] += level
    return _trim(q)


def hill_intervals(v, level: float = 1.0) -> list[HillInterval]:
    """Components of {V <= level}, ordered left to right.

    Components meeting at a double root are reported as separate intervals,
    and an isolated double root with V > level around it is a one-point
    interval.
    """
    v = _trim(v)
    q = one_minus(v, level)
    if q.size == 1:
        if q[0] < 0:
            raise NoHillInterval("V > 1 everywhere")
        return [HillInterval(-math.inf, math.inf, 0, 0)]
    roots = real_roots(q)
    cuts = [-math.inf] + [r for r, _ in roots] + [math.inf]
    mults = [0] + [m for _, m in roots] + [0]
    out: list[HillInterval] = []

    def sample(lo, hi):
        if math.isinf(lo) and math.isinf(hi):
            return 0.0
        if math.isinf(lo):
            return hi - 1.0
        if math.isinf(hi):
            return lo + 1.0
        return 0.5 * (lo + hi)

    for i in range(len(cuts) - 1):
        lo, hi = cuts[i], cuts[i + 1]
        if npoly.polyval(sample(lo, hi), q) > 0:
            out.append(HillInterval(lo, hi, mults[i], mults[i + 1]))
    # isolated touching points
    for r, m in roots:
        if m % 2 == 0 and not any(h.contains(r) for h in out):
            out.append(HillInterval(r, r, m, m))
    if not out:
        raise NoHillInterval("V > 1 everywhere")
    out.sort(key=lambda h: (h.x0, h.x1))
    return out


def equilibria(p: VecPoly, level: float = 1.0) -> list[float]:
    """Points with |P| = 1 and P . P' = 0, the double roots of 1 - |P|^2."""
    q = one_minus(p.potential(), level)
    if q.size == 1:
        return []
    return [r for r, m in real_roots(q) if m >= 2]


def classify_geodesic(p: VecPoly, h: HillInterval) -> GeodesicType:
    """Type of the geodesic with momentum ``p`` living in the Hill interval ``h``."""
    if p.degree == 0:
        return GeodesicType.LINE
    v = p.potential()
    xs = np.linspace(h.x0, h.x1, 22)[1:-1] if h.bounded and not h.is_point else []
    if any(npoly.polyval(x, v) > 1 + TOUCH_TOL for x in xs):
        raise InvalidInterval(f"V > 1 inside [{h.x0}, {h.x1}]")
    if h.is_point:
        return GeodesicType.LINE
    eq = [h.mult0 >= 2, h.mult1 >= 2]
    if not any(eq):
        return GeodesicType.PERIODIC
    if not all(eq):
        return GeodesicType.HOMOCLINIC
    diff = p(h.x0) - p(h.x1)
    if np.max(np.abs(diff)) <= TOUCH_TOL:
        return GeodesicType.DIRECT
    return GeodesicType.TURNBACK


def abnormal_directions(a: float, b: float, x: float) -> np.ndarray:
    """Unit covector annihilating the derivative of (1 - x^2, b x + a x^2).

    Sign normalised so the first nonzero component is positive.
    """
    grad = np.array([-2.0 * x, b + 2.0 * a * x])
    n = np.hypot(*grad)
    if n == 0:
        raise ZeroGradient(f"P'(x) vanishes at x={x} for (a,b)=({a},{b})")
    d = np.array([-grad[1], grad[0]]) / n
    if d[0] < 0 or (d[0] == 0 and d[1] < 0):
        d = -d
    return d
