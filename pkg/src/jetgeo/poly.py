"""Vector polynomials, momenta, pencils and real root isolation.

Coefficient arrays are stored in ascending degree order throughout, matching
``numpy.polynomial.polynomial``.
"""
from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DegenerateDiscriminant, DomainError, InvalidInput, NonConvergence

MULT_THRESHOLD = 1e-9
RESIDUAL_TOL = 1e-12


def _trim(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    nz = np.nonzero(c)[0]
    if nz.size == 0:
        return np.zeros(1)
    return c[: nz[-1] + 1].copy()


@dataclass(frozen=True, eq=False)
class VecPoly:
    """A polynomial map R -> R^n, one coefficient row per component."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coeffs, dtype=float)).copy()
        if c.ndim != 2 or c.shape[1] == 0:
            raise InvalidInput("coefficients must form an (n, d+1) array")
        if not np.all(np.isfinite(c)):
            raise InvalidInput("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def dim(self) -> int:
        return self.coeffs.shape[0]

    @property
    def degree(self) -> int:
        nz = np.nonzero(np.any(self.coeffs != 0, axis=0))[0]
        return int(nz[-1]) if nz.size else 0

    def component(self, i: int) -> np.ndarray:
        return _trim(self.coeffs[i])

    def __call__(self, x):
        return eval_vecpoly(self, x)

    def derivative(self, m: int = 1) -> "VecPoly":
        rows = [npoly.polyder(r, m) if r.size > m else np.zeros(1) for r in self.coeffs]
        width = max(r.size for r in rows)
        return VecPoly(np.array([np.pad(r, (0, width - r.size)) for r in rows]))

    def potential(self) -> np.ndarray:
        """Coefficients of V = |P|^2."""
        return potential(self)

    def __eq__(self, other):
        if not isinstance(other, VecPoly) or other.dim != self.dim:
            return NotImplemented
        w = max(self.coeffs.shape[1], other.coeffs.shape[1])
        a = np.pad(self.coeffs, ((0, 0), (0, w - self.coeffs.shape[1])))
        b = np.pad(other.coeffs, ((0, 0), (0, w - other.coeffs.shape[1])))
        return bool(np.array_equal(a, b))

    __hash__ = None


def eval_vecpoly(p: VecPoly, x):
    """Evaluate every component at ``x``; returns shape (n,) or (n, len(x))."""
    return np.array([npoly.polyval(x, row) for row in p.coeffs])


def potential(p: VecPoly) -> np.ndarray:
    v = np.zeros(1)
    for row in p.coeffs:
        v = npoly.polyadd(v, npoly.polymul(row, row))
    return _trim(v)


def from_mu(mu) -> VecPoly:
    """Build P from the 6-tuple (a0_1, a0_2, a1_1, a1_2, a2_1, a2_2)."""
    mu = tuple(float(m) for m in mu)
    if len(mu) != 6:
        raise InvalidInput(f"momentum needs 6 entries, got {len(mu)}")
    return VecPoly([[mu[0], mu[2], mu[4]], [mu[1], mu[3], mu[5]]])


def base_poly(a: float, b: float) -> VecPoly:
    """P = (1 - x^2, b x + a x^2) for the magnetic space R^5(a, b)."""
    return VecPoly([[1.0, 0.0, -1.0], [0.0, b, a]])


@dataclass(frozen=True)
class Momentum:
    """Normalised momentum mu(lambda, a, b) on the cylinder."""

    lam: float
    a: float
    b: float

    @property
    def mu(self) -> tuple:
        lam = self.lam
        return (1.0, 0.0, 0.0, self.b / lam, -1.0 / lam**2, self.a / lam**2)

    @property
    def poly(self) -> VecPoly:
        return from_mu(self.mu)

    def in_admissible_set(self) -> bool:
        """Membership of the homoclinic set A."""
        if not self.lam > 0:
            return False
        return 2 - self.b**2 > 0 or (
            math.isclose(abs(self.b), math.sqrt(2)) and self.a * self.b < 0
        )


def pencil(a: float, b: float, nu) -> VecPoly:
    """G_nu = (alpha1 + beta1 P1, alpha2 + beta2 P2) over base_poly(a, b)."""
    al1, al2, be1, be2 = (float(v) for v in nu)
    p = base_poly(a, b).coeffs
    return VecPoly([[al1 + be1 * p[0, 0], be1 * p[0, 1], be1 * p[0, 2]],
                    [al2 + be2 * p[1, 0], be2 * p[1, 1], be2 * p[1, 2]]])


def _quadratic_part(a, b, tau, eta):
    A = a * a * eta * eta + tau * tau
    B = 2 * a * b * eta * eta
    C = 2 * tau - b * b * eta * eta
    return A, B, C


@dataclass(frozen=True)
class PencilMomentum:
    """Pencil parameters nu(tau, eta) = (1 - tau, 0, tau, eta) on a branch."""

    tau: float
    eta: float
    branch: int = 1

    def __post_init__(self):
        if self.branch not in (1, -1):
            raise InvalidInput("branch must be +1 or -1")

    @property
    def nu(self) -> tuple:
        return (1.0 - self.tau, 0.0, self.tau, self.eta)

    def poly(self, a: float, b: float) -> VecPoly:
        return pencil(a, b, self.nu)

    def in_domain(self, a: float, b: float, margin: float = 0.0) -> bool:
        return in_domain(a, b, self.tau, self.eta, self.branch, margin)


def in_domain(a, b, tau, eta, branch=1, margin=0.0) -> bool:
    """Membership of A^{+} or A^{-} for the magnetic space (a, b).

    ``margin`` shrinks the domain by requiring C > margin.
    """
    if not tau > 0:
        return False
    C = 2 * tau - b * b * eta * eta
    ab = a * b
    strict = ab >= 0 if branch == 1 else ab <= 0
    if margin > 0:
        return C > margin
    return C > 0 if strict else C >= 0


@dataclass(frozen=True)
class ThetaCoords:
    """Coordinates with 1 - V = v3 x^2 (1 - (v1 x + v2)^2).

    The quadratic data (A, B, C, delta) are carried when known, where
    1 - V = x^2 (C - B x - A x^2) and delta = B^2 + 4 A C.
    """

    v1: float
    v2: float
    v3: float
    A: float = math.nan
    B: float = math.nan
    C: float = math.nan
    delta: float = math.nan

    @classmethod
    def from_quadratic(cls, A: float, B: float, C: float) -> "ThetaCoords":
        delta = B * B + 4 * A * C
        if not (A > 0 and delta > 0):
            raise DegenerateDiscriminant(f"need A > 0 and B^2 + 4AC > 0 (A={A}, disc={delta})")
        sd = math.sqrt(delta)
        return cls(2 * A / sd, B / sd, delta / (4 * A), A, B, C, delta)

    @property
    def roots(self) -> tuple[float, float]:
        """(x_minus, x_plus), the nonzero roots of 1 - V."""
        return ((-1 - self.v2) / self.v1, (1 - self.v2) / self.v1)

    def one_minus_v(self, x):
        w = self.v1 * x + self.v2
        return self.v3 * x * x * (1 - w * w)


def theta_coords(a: float, b: float, tau: float, eta: float) -> ThetaCoords:
    return ThetaCoords.from_quadratic(*_quadratic_part(a, b, tau, eta))


def theta_inverse(th: ThetaCoords, a: float, b: float) -> PencilMomentum:
    """Recover (tau, eta) with eta > 0 from theta coordinates (needs ab != 0)."""
    if a * b == 0:
        raise DomainError("inverse needs ab != 0")
    r = th.v1 * th.v2 * th.v3 / (a * b)
    if r <= 0:
        raise DomainError("theta coordinates not in the image for this (a, b)")
    tau = 0.5 * th.v3 * (1 + (b / a) * th.v1 * th.v2 - th.v2**2)
    return PencilMomentum(tau, math.sqrt(r), 1)


def x_plus_formula(a, b, tau, eta) -> float:
    """Closed form of the positive root of 1 - V_nu."""
    A, _, _ = _quadratic_part(a, b, tau, eta)
    disc = tau * tau * (2 * tau - b * b * eta * eta) + 2 * a * a * eta * eta * tau
    return (-a * b * eta * eta + math.sqrt(disc)) / A


# -- real roots --------------------------------------------------------------

def _exact_chain(c) -> list[list[int]]:
    """Sturm sequence of ``c`` over the rationals.

    Floats are dyadic rationals, so the chain is exact; each member is kept
    as a primitive integer polynomial (positive rescaling keeps signs).
    """
    def primitive(p):
        den = 1
        for v in p:
            den = den * v.denominator // math.gcd(den, v.denominator)
        ints = [int(v * den) for v in p]
        g = 0
        for v in ints:
            g = math.gcd(g, v)
        return [v // g for v in ints]

    def rem(a, b):
        a = [Fraction(v) for v in a]
        while len(a) >= len(b) and any(a):
            f = a[-1] / b[-1]
            k = len(a) - len(b)
            for i, v in enumerate(b):
                a[k + i] -= f * v
            a.pop()
            while a and a[-1] == 0:
                a.pop()
        return a

    p0 = primitive([Fraction(v) for v in c])
    chain = [p0, primitive([Fraction(i * v) for i, v in enumerate(p0)][1:])]
    while len(chain[-1]) > 1:
        r = rem(chain[-2], chain[-1])
        if not r:
            break
        chain.append(primitive([-v for v in r]))
    return chain


def _exact_sign(p: list[int], x: float) -> int:
    """Sign of p(x) computed exactly for a float x."""
    n, d = x.as_integer_ratio()
    acc, dp = p[-1], 1
    for c in reversed(p[:-1]):
        dp *= d
        acc = acc * n + c * dp
    return (acc > 0) - (acc < 0)


def _variations(chain, x: float) -> int:
    count, prev = 0, 0
    for p in chain:
        s = _exact_sign(p, x)
        if s:
            if prev and s != prev:
                count += 1
            prev = s
    return count


def _bisect_sign(f, lo: float, hi: float) -> float:
    flo = f(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def real_roots(q, interval: tuple[float, float] | None = None) -> list[tuple[float, int]]:
    """Distinct real roots of ``q`` with multiplicities, in increasing order.

    Roots of q and of q' are isolated by Sturm sequences evaluated in exact
    rational arithmetic, refined by bisection and polished by Newton steps
    on the derivative of order (m - 1).  Candidates that polish to the same
    point are one multiple root.
    """
    q = _trim(q)
    if q.size == 1:
        if q[0] == 0:
            raise InvalidInput("zero polynomial has no isolated roots")
        return []
    qn = max(1.0, float(np.max(np.abs(q))))
    bound = 1 + float(np.max(np.abs(q[:-1] / q[-1])))
    lo, hi = -bound, bound
    if interval is not None:
        lo, hi = max(lo, interval[0]), min(hi, interval[1])
        if lo > hi:
            return []
    dq = _trim(npoly.polyder(q))
    cands = []
    ip, brackets = _isolate(q, lo, hi, interval is not None)
    for a, b in brackets:
        cands.append((_locate(ip, a, b), a, b))
    # coefficient noise can turn a double root into a complex pair; q' keeps
    # a real root there, so its roots where q is negligible are candidates
    if dq.size > 1:
        ip, brackets = _isolate(dq, lo, hi, interval is not None)
        for a, b in brackets:
            r = _locate(ip, a, b)
            if abs(npoly.polyval(r, q)) <= RESIDUAL_TOL * qn * max(1.0, abs(r)) ** (q.size - 1):
                cands.append((r, a, b))

    found = []
    for r, a, b in cands:
        # a noisy m-fold root spreads over ~eps^(1/m); 1e-4 covers m = 3
        r, m = _refine(q, r, qn, max(b - a, 1e-4 * max(1.0, abs(r))), a, b)
        if abs(npoly.polyval(r, q)) > RESIDUAL_TOL * qn * max(1.0, abs(r)) ** (q.size - 1):
            raise NonConvergence(f"root refinement failed near {r}")
        if interval is None or interval[0] <= r <= interval[1]:
            found.append((float(r), m))
    found.sort()
    # candidates from one cluster polish to (nearly) the same point; a
    # multiple root is only resolved to ~sqrt(eps)
    out: list[tuple[float, int]] = []
    for r, m in found:
        near = 1e-6 if max(m, out[-1][1] if out else 1) > 1 else 1e-9
        if out and abs(r - out[-1][0]) <= near * max(1.0, abs(r)):
            out[-1] = (out[-1][0], max(m, out[-1][1]))
        else:
            out.append((r, m))
    if sum(m for _, m in out) > q.size - 1:
        raise NonConvergence("root cluster too ill-conditioned to resolve multiplicities")
    return out


def _isolate(p, lo: float, hi: float, closed: bool):
    """Exact integer form of ``p`` and brackets around each of its distinct
    real roots in (lo, hi], or [lo, hi] when ``closed``."""
    chain = _exact_chain(p)
    width_floor = 1e-7 * max(1.0, abs(lo), abs(hi))
    brackets = []
    if closed and _exact_sign(chain[0], lo) == 0:
        brackets.append((lo, lo))
    stack = [(lo, hi, _variations(chain, lo), _variations(chain, hi))]
    while stack:
        a, b, va, vb = stack.pop()
        n = va - vb
        if n <= 0:
            continue
        if (n == 1 and b - a < width_floor) or b - a < 1e-14 * max(1.0, abs(a), abs(b)):
            brackets.append((a, b))
            continue
        # off-centre split so that exact roots at dyadic points are rare
        m = a + 0.4999637 * (b - a)
        vm = _variations(chain, m)
        stack.append((m, b, vm, vb))
        stack.append((a, m, va, vm))
    return chain[0], brackets


def _locate(ip: list[int], a: float, b: float) -> float:
    """Bisection on the exact sign of ``ip``; midpoint if it does not change."""
    sa, sb = _exact_sign(ip, a), _exact_sign(ip, b)
    if sb == 0:
        return b
    if sa * sb < 0:
        return _bisect_sign(lambda t: _exact_sign(ip, t), a, b)
    return 0.5 * (a + b)


def _refine(q, r, qn, pad, a, b):
    """Largest m such that Newton on q^(m-1) converges near ``r`` and the
    lower derivatives vanish there; returns (root, m)."""
    scale = qn * max(1.0, abs(r)) ** (q.size - 1)
    for m in range(q.size - 1, 1, -1):
        d = npoly.polyder(q, m - 1)
        rm = _newton(d, r, a - pad, b + pad)
        if abs(npoly.polyval(rm, d)) > 1e-10 * scale:
            continue
        if all(abs(npoly.polyval(rm, npoly.polyder(q, j))) <= MULT_THRESHOLD * scale for j in range(m - 1)):
            return rm, m
    return _newton(q, r, a - pad, b + pad), 1


def _newton(d, r, lo, hi, steps=60):
    dd = npoly.polyder(d)
    for _ in range(steps):
        g = npoly.polyval(r, dd)
        if g == 0:
            break
        step = npoly.polyval(r, d) / g
        if not lo <= r - step <= hi:
            break
        r -= step
        if abs(step) <= 1e-16 * max(1.0, abs(r)):
            break
    return r
