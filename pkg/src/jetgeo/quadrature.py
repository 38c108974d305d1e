"""Integrals against d(phi) = dx / sqrt(1 - V) over legs of a Hill interval.

Endpoint singularities are removed analytically before any numerics:

* homoclinic potentials (1 - V = x^2 (C - B x - A x^2)) use the theta
  coordinates, w = v1 x + v2 = sin(psi), after which the integrand is the
  smooth function N(x) / |x| / (v1 sqrt(v3)); the factor x is divided out
  of N exactly when x = 0 is an endpoint;
* other potentials are deflated at their endpoint roots and the remaining
  inverse square roots are absorbed by x = lo + L s^2 (or the cosine map
  when both ends are simple roots).
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .classify import one_minus
from .errors import InvalidInterval, NonIntegrable
from .kronrod import gk15
from .poly import PencilMomentum, ThetaCoords, _trim, base_poly, pencil, theta_coords

DEFAULT_TOL = 1e-10
_ROOT_TOL = 1e-9


def default_tol() -> float:
    """Quadrature tolerance, overridable through JETGEO_TOL."""
    raw = os.environ.get("JETGEO_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise ValueError(f"JETGEO_TOL must be a positive float, got {raw!r}") from None
    if not tol > 0:
        raise ValueError(f"JETGEO_TOL must be a positive float, got {raw!r}")
    return tol


@dataclass(frozen=True, eq=False)
class PhiIntegrand:
    """Numerators N_j integrated as int N_j(x) dphi over [x0, x1].

    ``numerator`` may be one coefficient vector or a list of them; they share
    quadrature nodes.
    """

    numerator: object
    potential: object
    x0: float
    x1: float

    def __post_init__(self):
        nums = self.numerator
        if isinstance(nums, np.ndarray) and nums.ndim == 1 or (
                isinstance(nums, (list, tuple)) and all(np.isscalar(v) for v in nums)):
            nums = [nums]
        object.__setattr__(self, "numerator", [_trim(n) for n in nums])
        object.__setattr__(self, "potential", _trim(self.potential))
        if not self.x0 <= self.x1:
            raise InvalidInterval(f"need x0 <= x1, got [{self.x0}, {self.x1}]")

    @property
    def q(self) -> np.ndarray:
        return one_minus(self.potential)

    def endpoint_orders(self) -> tuple[int, int]:
        return _root_order(self.q, self.x0), _root_order(self.q, self.x1)

    def integrable(self) -> list[bool]:
        """Per numerator: finite iff it vanishes enough at every double root."""
        m0, m1 = self.endpoint_orders()
        return [_vanishing_order(n, self.x0) >= m0 // 2 and _vanishing_order(n, self.x1) >= m1 // 2
                for n in self.numerator]


def _scale(c) -> float:
    return max(1.0, float(np.max(np.abs(c))))


def _root_order(q, x) -> int:
    """Multiplicity of ``x`` as a root of ``q`` (0 if not a root)."""
    if not math.isfinite(x):
        raise InvalidInterval("legs must be bounded")
    s = _scale(q) * max(1.0, abs(x)) ** (q.size - 1)
    m = 0
    d = q
    while m < q.size - 1:
        if abs(npoly.polyval(x, d)) > _ROOT_TOL * s:
            break
        m += 1
        d = npoly.polyder(d)
    return m


def _vanishing_order(n, x) -> int:
    """Order of vanishing of the numerator ``n`` at ``x``, relative to its size."""
    if not np.any(n):
        return 10**6
    s = float(np.max(np.abs(n))) * max(1.0, abs(x)) ** (n.size - 1)
    m, d = 0, n
    while m < n.size and abs(npoly.polyval(x, d)) <= 1e-12 * s:
        m += 1
        d = npoly.polyder(d)
    return m


def _deflate(c, root, times):
    for _ in range(times):
        c, _ = npoly.polydiv(c, [-root, 1.0])
    return _trim(c)


def _homoclinic_theta(q) -> ThetaCoords | None:
    q = np.pad(q, (0, max(0, 5 - q.size)))
    if q.size != 5:
        return None
    s = _scale(q)
    if abs(q[0]) > 1e-14 * s or abs(q[1]) > 1e-14 * s:
        return None
    A, B, C = -q[4], -q[3], q[2]
    if not (A > 0 and B * B + 4 * A * C > 0):
        return None
    return ThetaCoords.from_quadratic(A, B, C)


def integrate_phi(f: PhiIntegrand, tol: float | None = None,
                  theta: ThetaCoords | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Values and error estimates of int N_j dphi over [f.x0, f.x1].

    Raises NonIntegrable when any numerator fails the integrability test.
    """
    tol = default_tol() if tol is None else tol
    bad = [i for i, ok in enumerate(f.integrable()) if not ok]
    if bad:
        raise NonIntegrable(f"numerators {bad} do not vanish at a double root of 1 - V")
    if f.x0 == f.x1:
        k = len(f.numerator)
        return np.zeros(k), np.zeros(k)
    q = f.q
    if theta is None:
        theta = _homoclinic_theta(q)
    if theta is not None and (f.x0 >= 0 or f.x1 <= 0):
        return _integrate_theta(f, theta, tol)
    return _integrate_generic(f, tol)


def _integrate_theta(f: PhiIntegrand, th: ThetaCoords, tol: float):
    lo, hi = f.x0, f.x1
    sgn = 1.0 if hi > 0 else -1.0
    w = np.clip([th.v1 * lo + th.v2, th.v1 * hi + th.v2], -1.0, 1.0)
    if np.any(th.one_minus_v(np.array([lo, hi])) < -1e-9 * max(1.0, th.v3)):
        raise InvalidInterval(f"[{lo}, {hi}] leaves the Hill region")
    psi0, psi1 = np.arcsin(w)
    touches_zero = lo == 0.0 or hi == 0.0
    nums = []
    for n in f.numerator:
        if touches_zero:
            # exact division by x; the remainder is N(0) = 0 up to round-off
            nums.append((_trim(n[1:]) if n.size > 1 else np.zeros(1), True))
        else:
            nums.append((n, False))
    pref = sgn / (th.v1 * math.sqrt(th.v3))

    def g(psi):
        x = (np.sin(psi) - th.v2) / th.v1
        rows = []
        for c, divided in nums:
            val = npoly.polyval(x, c)
            rows.append(val if divided else val / x)
        return pref * np.vstack(rows)

    return gk15(g, psi0, psi1, atol=tol, rtol=tol)


def _integrate_generic(f: PhiIntegrand, tol: float):
    lo, hi = f.x0, f.x1
    q = f.q
    m0, m1 = f.endpoint_orders()
    # q = (x - lo)^m0 (hi - x)^m1 r(x)
    r = _deflate(q, lo, m0)
    r = _deflate(r, hi, m1)
    if m1 % 2:
        r = -r
    L = hi - lo
    xs = lo + L * np.linspace(0, 1, 41)[1:-1]
    if np.any(npoly.polyval(xs, r) <= 0):
        raise InvalidInterval(f"1 - V is not positive inside [{lo}, {hi}]")
    nums = []
    for n in f.numerator:
        c = _deflate(n, lo, m0 // 2)
        c = _deflate(c, hi, m1 // 2)
        # |x - hi| = hi - x flips the sign for each cancelled factor
        nums.append(c * (-1.0) ** (m1 // 2))
    e0, e1 = m0 % 2, m1 % 2

    def rows(x):
        den = np.sqrt(npoly.polyval(x, r))
        return np.vstack([npoly.polyval(x, c) / den for c in nums])

    if e0 and e1:
        # x = lo + L (1 - cos t) / 2, sqrt((x-lo)(hi-x)) = (L/2) sin t
        return gk15(lambda t: rows(lo + 0.5 * L * (1 - np.cos(t))), 0.0, math.pi, atol=tol, rtol=tol)
    if e0:
        return gk15(lambda s: 2 * math.sqrt(L) * rows(lo + L * s * s), 0.0, 1.0, atol=tol, rtol=tol)
    if e1:
        return gk15(lambda s: 2 * math.sqrt(L) * rows(hi - L * s * s), 0.0, 1.0, atol=tol, rtol=tol)
    return gk15(rows, lo, hi, atol=tol, rtol=tol)


@dataclass(frozen=True)
class DeltaResult:
    """Increments along one monotone leg; divergent increments are +-inf."""

    dt: float
    dy1: float
    dy2: float
    dz1: float
    dz2: float
    cost_t: float
    cost_y: float
    error_estimate: float


def delta_map(a: float, b: float, nu: PencilMomentum, x_path: tuple[float, float],
              tol: float | None = None) -> DeltaResult:
    """Increments of (t, y, z) and the two costs along the leg ``x_path``.

    Cost_t = dt - dy1 and Cost_y = dy1 - dz1 are integrated from their own
    numerators, so they stay finite on legs that end at the equilibrium
    x = 0 where dt, dy1 and dz1 diverge.
    """
    lo, hi = sorted(float(v) for v in x_path)
    G = pencil(a, b, nu.nu).coeffs
    P = base_poly(a, b).coeffs
    V = pencil(a, b, nu.nu).potential()
    g1, g2 = _trim(G[0]), _trim(G[1])
    p1, p2 = _trim(P[0]), _trim(P[1])
    g1p1 = npoly.polymul(g1, p1)
    nums = {
        "dt": np.ones(1),
        "dy1": g1,
        "dy2": g2,
        "dz1": g1p1,
        "dz2": npoly.polymul(g2, p2),
        "cost_t": npoly.polysub(np.ones(1), g1),
        "cost_y": npoly.polysub(g1, g1p1),
    }
    keys = list(nums)
    probe = PhiIntegrand([nums[k] for k in keys], V, lo, hi)
    ok = dict(zip(keys, probe.integrable()))
    if not (ok["cost_t"] and ok["cost_y"]):
        raise NonIntegrable("cost integrals diverge on this leg")
    finite = [k for k in keys if ok[k]]
    th = None
    if nu.nu[1] == 0 and nu.nu[0] == 1 - nu.nu[2]:
        try:
            th = theta_coords(a, b, nu.tau, nu.eta)
        except ValueError:
            th = None
    vals, errs = integrate_phi(PhiIntegrand([nums[k] for k in finite], V, lo, hi), tol, theta=th)
    out = {k: float(v) for k, v in zip(finite, vals)}
    m0, m1 = probe.endpoint_orders()
    for k in keys:
        if k not in out:
            e = lo if _vanishing_order(nums[k], lo) < m0 // 2 else hi
            out[k] = math.copysign(math.inf, npoly.polyval(e, nums[k]))
    return DeltaResult(out["dt"], out["dy1"], out["dy2"], out["dz1"], out["dz2"],
                       out["cost_t"], out["cost_y"], float(np.max(errs)))
