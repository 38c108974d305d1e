"""The period map, its closed forms, Jacobian checks and injectivity probes.

Values are single-leg integrals over I^{+-} = [0, x+] or [x-, 0].  A full
homoclinic loop traverses its leg twice, so asymptotic displacements are
``PeriodVector.full_loop``.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateJacobian, DomainError
from .kronrod import gk15
from .poly import ThetaCoords, in_domain, theta_coords
from .quadrature import default_tol

COLLISION_TOL = 1e-7
GRID_MARGIN = 1e-3


@dataclass(frozen=True)
class PeriodVector:
    theta1: float
    theta2: float
    theta3: float
    error_estimate: float
    branch: int

    def as_array(self) -> np.ndarray:
        return np.array([self.theta1, self.theta2, self.theta3])

    @property
    def full_loop(self) -> np.ndarray:
        """Increments of (y2, y1 - z1, z2) over the whole homoclinic orbit."""
        return 2.0 * self.as_array()


def period_map(a: float, b: float, tau: float, eta: float, branch: int = 1,
               tol: float | None = None) -> PeriodVector:
    """Theta^{branch}_{(a,b)}(tau, eta) by quadrature in theta coordinates.

    After x = (sin psi - v2) / v1 the three integrands are polynomials in x
    divided once by x, which is done exactly.
    """
    if branch not in (1, -1):
        raise DomainError("branch must be +1 or -1")
    if not in_domain(a, b, tau, eta, branch):
        raise DomainError(f"(tau, eta) = ({tau}, {eta}) is outside A^{'+' if branch > 0 else '-'}({a}, {b})")
    tol = default_tol() if tol is None else tol
    th = theta_coords(a, b, tau, eta)
    v1, v2, v3 = th.v1, th.v2, th.v3
    if branch == 1:
        lo, hi = math.asin(max(-1.0, min(1.0, v2))), 0.5 * math.pi
    else:
        lo, hi = -0.5 * math.pi, math.asin(max(-1.0, min(1.0, v2)))
    pref = branch / (v1 * math.sqrt(v3))

    def f(psi):
        x = (np.sin(psi) - v2) / v1
        g2 = b + a * x
        return pref * np.vstack([eta * g2, x * (1 - tau * x * x), eta * x * g2 * g2])

    val, err = gk15(f, lo, hi, atol=tol, rtol=tol)
    return PeriodVector(float(val[0]), float(val[1]), float(val[2]), float(np.max(err)), branch)


def theta2_eta_zero(tau: float) -> float:
    """Closed form of Theta^2(tau, 0), the same for every (a, b)."""
    return -math.sqrt(2.0) / (3.0 * tau**1.5)


def period_map_closed_form(a: float, b: float, tau: float, eta: float) -> tuple[float, float]:
    """(Theta^2, Theta^3) for the families (a, 0) and (0, b)."""
    if (a == 0) == (b == 0):
        raise DomainError("closed forms exist only when exactly one of a, b vanishes")
    if not in_domain(a, b, tau, eta, 1):
        raise DomainError("(tau, eta) outside the open domain")
    if b == 0:
        A = a * a * eta * eta + tau * tau
        s = math.sqrt(2 * tau)
        return (s * (3 * a * a * eta * eta - tau * tau) / (3 * A * A),
                2 * a * a * eta * (2 * tau) ** 1.5 / (3 * A * A))
    C = 2 * tau - b * b * eta * eta
    return (math.sqrt(C) * (2 * b * b * eta * eta - tau) / (3 * tau**3),
            b * b * eta * math.sqrt(C) / tau**2)


# -- theta-coordinate forms --------------------------------------------------

@dataclass(frozen=True)
class RhoTable:
    v2: float
    rho1: float
    rho2: float
    rho3: float
    rho4: float
    rho5: float
    rho6: float
    disc: float


def rho_suite(v2):
    """The auxiliary functions rho_1..rho_6 and 6 rho_5^2 - 4 rho_4 rho_6.

    Accepts a scalar or an array; arrays give a table of arrays.
    """
    c = np.asarray(v2, dtype=float)
    if np.any(np.abs(c) > 1):
        raise DomainError("v2 must lie in [-1, 1]")
    s = np.sqrt(np.maximum(0.0, 1 - c * c))
    al = np.arccos(c)
    r1 = s - c * al
    r2 = (11 * c * c + 4) * s - (6 * c**3 + 9 * c) * al
    r3 = (2 * c * c + 1) * al - 3 * c * s
    r4 = (42 * c**3 + 27 * c) * al - (65 * c * c + 4) * s
    r5 = (10 * c * c + 1) * al - 11 * c * s
    r6 = 3 * c * al - s
    vals = [c, r1, r2, r3, r4, r5, r6, 6 * r5 * r5 - 4 * r4 * r6]
    if np.ndim(c) == 0:
        vals = [float(v) for v in vals]
    return RhoTable(*vals)


def _check_appendix(a, b, th: ThetaCoords):
    if a * b == 0:
        raise DomainError("needs ab != 0")
    if not -1 < th.v2 < 1 or a * b * th.v2 <= 0:
        raise DomainError("needs ab * v2 > 0 and v2 in (-1, 1)")


def period_map_appendix(a: float, b: float, th: ThetaCoords) -> tuple[float, float]:
    """(Theta~_2, Theta~_3) from the sigma_1..sigma_4 closed forms.

    The coefficients are the ones obtained by integrating (u - v2)^k /
    sqrt(1 - u^2) exactly; see ``period_map_trig`` for the same values in
    rho notation.
    """
    _check_appendix(a, b, th)
    v1, v2, v3 = th.v1, th.v2, th.v3
    s, al = math.sqrt(1 - v2 * v2), math.acos(v2)
    K = a * v2 * v2 - b * v1 * v2 - a
    sig1 = 11 / 12 * (v2 * v2 + 4 / 11) * K * v3 + a * v1 * v1
    sig2 = 0.5 * v2 * ((v2 * v2 + 1.5) * K * v3 + 2 * a * v1 * v1)
    sig3 = 3 * a * b * v1 * v2 - b * b * v1 * v1 - a * a * (11 * v2 * v2 / 6 + 2 / 3)
    sig4 = b * b * v1 * v1 * v2 + a * a * (v2**3 + 1.5 * v2) - 2 * a * b * v1 * (v2 * v2 + 0.5)
    t2 = (sig1 * s - sig2 * al) / (a * math.sqrt(v3) * v1**4)
    t3 = -math.sqrt(v1 * v2 / (a * b)) / v1**4 * (sig3 * s + sig4 * al)
    return t2, t3


def period_map_appendix_printed(a: float, b: float, th: ThetaCoords) -> tuple[float, float]:
    """Variant with 3/11, v3**2 and no a**2 in sigma_4.

    These are known misprints; kept only so tests can show they disagree
    with quadrature.
    """
    _check_appendix(a, b, th)
    v1, v2, v3 = th.v1, th.v2, th.v3
    s, al = math.sqrt(1 - v2 * v2), math.acos(v2)
    K = a * v2 * v2 - b * v1 * v2 - a
    sig1 = 11 / 12 * (v2 * v2 + 3 / 11) * K * v3**2 + a * v1 * v1
    sig2 = 0.5 * v2 * ((v2 * v2 + 1.5) * K * v3**2 + 2 * a * v1 * v1)
    sig3 = 3 * a * b * v1 * v2 - b * b * v1 * v1 - a * a * (11 * v2 * v2 / 6 + 2 / 3)
    sig4 = b * b * v1 * v1 * v2 + (v2**3 + 1.5 * v2) - 2 * a * b * v1 * (v2 * v2 + 0.5)
    t2 = (sig1 * s - sig2 * al) / (a * math.sqrt(v3) * v1**4)
    t3 = -math.sqrt(v1 * v2 / (a * b)) / v1**4 * (sig3 * s + sig4 * al)
    return t2, t3


def _tau_of(a, b, v1, v2, v3):
    return 0.5 * v3 * (1 + (b / a) * v1 * v2 - v2 * v2)


def period_map_trig(a: float, b: float, th: ThetaCoords) -> tuple[float, float]:
    """(Theta~_2, Theta~_3) written with rho_1, rho_2, rho_3."""
    _check_appendix(a, b, th)
    v1, v2, v3 = th.v1, th.v2, th.v3
    r = rho_suite(v2)
    tau = _tau_of(a, b, v1, v2, v3)
    t2 = (v1 * v1 * r.rho1 - tau * r.rho2 / 6) / (math.sqrt(v3) * v1**4)
    t3 = math.sqrt(v1 * v2 / (a * b)) * (
        b * b * r.rho1 / v1**2 + a * b * r.rho3 / v1**3 + a * a * r.rho2 / (6 * v1**4))
    return t2, t3


def dtheta2_dv3(a: float, b: float, th: ThetaCoords) -> float:
    """Partial derivative of Theta~_2 in v3 (tau depends on v3 too)."""
    v1, v2, v3 = th.v1, th.v2, th.v3
    r = rho_suite(v2)
    tau = _tau_of(a, b, v1, v2, v3)
    return -(2 * v1 * v1 * r.rho1 + tau * r.rho2 / 3) / (4 * v1**4 * v3**1.5)


def dtheta3_dv1(a: float, b: float, th: ThetaCoords) -> float:
    """Partial derivative of Theta~_3 in v1.

    The factor sign(ab) comes from sqrt(v1 v2 / (ab)) = |v1 v2| / sqrt(ab v1 v2).
    """
    v1, v2 = th.v1, th.v2
    r = rho_suite(v2)
    num = v2 * (7 * a * a * r.rho2 + 30 * a * b * v1 * r.rho3 + 18 * b * b * v1 * v1 * r.rho1)
    return -math.copysign(1.0, a * b) * num / (12 * v1**4 * math.sqrt(a * b * v1 * v2))


def dtheta3_dv2(a: float, b: float, th: ThetaCoords) -> float:
    v1, v2 = th.v1, th.v2
    r = rho_suite(v2)
    num = a * a * r.rho4 - 6 * a * b * r.rho5 * v1 + 6 * b * b * r.rho6 * v1 * v1
    return -math.copysign(1.0, a * b) * num / (12 * v1**3 * math.sqrt(a * b * v1 * v2))


def det_f1_block(a: float, b: float, tau: float, eta: float) -> float:
    """det of the (v1, v2)-rows of DF_1 in closed form."""
    return 2 * a * b * eta * (a * a * eta * eta + tau * tau) / (
        2 * tau * tau - b * b * eta * eta * tau + 2 * a * a * eta * eta) ** 2


# -- Jacobian ----------------------------------------------------------------

@dataclass(frozen=True)
class JacobianCertificate:
    """Nondegeneracy evidence for (tau, eta) -> (Theta^2, Theta^3) when ab != 0."""

    det_f1: float
    dtheta2_dv3: float
    dtheta3_dvk: float
    k: int
    composite_det: float

    @property
    def nonzero(self) -> bool:
        return self.det_f1 != 0 and self.dtheta2_dv3 < 0 and self.dtheta3_dvk != 0


def _fd_jacobian(a, b, tau, eta, h=None):
    h = 1e-5 * max(1.0, abs(tau), abs(eta)) if h is None else h

    def F(t, e):
        pv = period_map(a, b, t, e, 1, tol=1e-14)
        return np.array([pv.theta2, pv.theta3])

    d_tau = (F(tau + h, eta) - F(tau - h, eta)) / (2 * h)
    d_eta = (F(tau, eta + h) - F(tau, eta - h)) / (2 * h)
    return np.column_stack([d_tau, d_eta])


def jacobian_det(a: float, b: float, tau: float, eta: float, mode: str = "analytic"):
    """Determinant of D(Theta^2, Theta^3) with respect to (tau, eta).

    ``analytic`` returns the closed-form value for the families and a
    ``JacobianCertificate`` when ab != 0.  ``finite_difference`` uses central
    differences with step 1e-5 max(1, |tau|, |eta|).
    """
    if mode == "finite_difference":
        if not in_domain(a, b, tau, eta, 1):
            raise DomainError("(tau, eta) outside A+")
        det = float(np.linalg.det(_fd_jacobian(a, b, tau, eta)))
        if abs(det) < 1e-10:
            raise DegenerateJacobian(f"|det| = {abs(det):.3g} at ({tau}, {eta})")
        return det
    if mode != "analytic":
        raise ValueError(f"unknown mode {mode!r}")
    if not in_domain(a, b, tau, eta, 1):
        raise DomainError("(tau, eta) outside A+")
    if b == 0 and a != 0:
        A = a * a * eta * eta + tau * tau
        return 4 * a * a * tau * (3 * a * a * eta * eta + tau * tau) / (3 * A**4)
    if a == 0 and b != 0:
        return b * b / tau**4
    if a == 0 and b == 0:
        raise DomainError("(a, b) = (0, 0) is excluded")
    if eta <= 0:
        raise DomainError("the general certificate needs eta > 0")
    th = theta_coords(a, b, tau, eta)
    d2 = dtheta2_dv3(a, b, th)
    if a * b > 0:
        k, d3 = 1, dtheta3_dv1(a, b, th)
    else:
        k, d3 = 2, dtheta3_dv2(a, b, th)
    comp = float(np.linalg.det(_fd_jacobian(a, b, tau, eta)))
    return JacobianCertificate(det_f1_block(a, b, tau, eta), d2, d3, k, comp)


# -- symmetries and sweeps ---------------------------------------------------

def switch_symmetry_check(a: float, b: float, tau: float, eta: float, tol: float = 1e-8) -> bool:
    """Theta^-_(a,b)(tau, eta) == Theta^+_(a,-b)(tau, eta)."""
    lhs = period_map(a, b, tau, eta, -1).as_array()
    rhs = period_map(a, -b, tau, eta, 1).as_array()
    return bool(np.max(np.abs(lhs - rhs)) <= tol * max(1.0, np.max(np.abs(rhs))))


@dataclass(frozen=True)
class GridSpec:
    tau_range: tuple = (0.2, 3.0)
    eta_range: tuple = (-2.0, 2.0)
    n_tau: int = 40
    n_eta: int = 40
    margin: float = GRID_MARGIN

    def nodes(self):
        return (np.linspace(*self.tau_range, self.n_tau), np.linspace(*self.eta_range, self.n_eta))

    def points(self, a: float, b: float, branch: int = 1) -> list[tuple[float, float]]:
        """Feasible grid nodes in enumeration order (tau outer, eta inner)."""
        taus, etas = self.nodes()
        out = []
        for t in taus:
            for e in etas:
                if in_domain(a, b, t, e, branch) and 2 * t - b * b * e * e > self.margin:
                    out.append((float(t), float(e)))
        return out


def _eval_point(args):
    a, b, t, e, br = args
    pv = period_map(a, b, t, e, br)
    return (a, b, t, e, br, pv.theta1, pv.theta2, pv.theta3, pv.error_estimate)


SWEEP_COLUMNS = ("a", "b", "tau", "eta", "branch", "theta1", "theta2", "theta3", "err")


def sweep(a: float, b: float, grid: GridSpec = GridSpec(), branches=(1,), workers: int = 1) -> list[tuple]:
    """Period map on every feasible grid node; row order is fixed by the grid."""
    jobs = [(a, b, t, e, br) for br in branches for t, e in grid.points(a, b, br)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(_eval_point, jobs, chunksize=32))
    return [_eval_point(j) for j in jobs]


@dataclass
class InjectivityReport:
    collisions: list
    min_image_distance: float
    grid_spec: dict
    n_points: int
    cloud: list = field(default_factory=list, repr=False)

    def to_json_dict(self) -> dict:
        return {"collisions": self.collisions, "min_image_distance": self.min_image_distance,
                "grid_spec": self.grid_spec, "n_points": self.n_points}


def _pairs_within(pts: np.ndarray, tol: float) -> list[tuple[int, int]]:
    tree = cKDTree(pts)
    return sorted(tree.query_pairs(tol, p=np.inf))


def _min_distance(pts: np.ndarray) -> float:
    if len(pts) < 2:
        return math.inf
    d, _ = cKDTree(pts).query(pts, k=2, p=np.inf)
    return float(np.min(d[:, 1]))


def injectivity_probe(a: float, b: float, grid: GridSpec = GridSpec(), branch: int = 1,
                      tol: float = COLLISION_TOL, workers: int = 1) -> InjectivityReport:
    """Look for distinct grid parameters whose Theta values coincide.

    Pairs (tau, eta) / (tau, -eta) with eta = 0 are the same point and never
    occur; any other pair closer than ``tol`` in sup norm is a collision.
    """
    rows = sweep(a, b, grid, (branch,), workers)
    pts = np.array([r[5:8] for r in rows]) if rows else np.zeros((0, 3))
    coll = [{"p": [rows[i][2], rows[i][3]], "q": [rows[j][2], rows[j][3]],
             "distance": float(np.max(np.abs(pts[i] - pts[j])))}
            for i, j in _pairs_within(pts, tol)]
    spec = asdict(grid)
    spec.update(a=a, b=b, branch=branch)
    return InjectivityReport(coll, _min_distance(pts), spec, len(rows), rows)


@dataclass
class OverlayReport:
    """Coincidences between the Theta^+ and Theta^- images on a shared grid."""

    matches: list
    all_at_eta_zero: bool
    min_offaxis_distance: float
    plus: list = field(default_factory=list, repr=False)
    minus: list = field(default_factory=list, repr=False)


def overlay(a: float, b: float, grid: GridSpec = GridSpec(), tol: float = COLLISION_TOL,
            workers: int = 1) -> OverlayReport:
    plus = sweep(a, b, grid, (1,), workers)
    minus = sweep(a, b, grid, (-1,), workers)
    P = np.array([r[5:8] for r in plus])
    M = np.array([r[5:8] for r in minus])
    tree = cKDTree(M)
    matches = []
    off = math.inf
    for i, row in enumerate(plus):
        d, j = tree.query(P[i], p=np.inf)
        if d <= tol:
            matches.append({"plus": [row[2], row[3]], "minus": [minus[j][2], minus[j][3]],
                            "distance": float(d)})
        # distance to the minus image excluding its eta = 0 points
        if row[3] != 0:
            off = min(off, float(d))
    ok = all(m["plus"][1] == 0 and m["minus"][1] == 0 for m in matches)
    return OverlayReport(matches, ok, off, plus, minus)
