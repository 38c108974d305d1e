"""Reduced flow, horizontal lifts to J^2 and geodesics of the magnetic space."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import InvalidInput
from .ode import dopri5
from .poly import PencilMomentum, VecPoly, _trim, base_poly, pencil

ENERGY_TOL = 1e-10
STOP_TOL = 1e-12


@dataclass(frozen=True)
class ReducedState:
    p_x: float
    x: float
    t: float = 0.0


@dataclass(frozen=True, eq=False)
class JetPoint:
    """Point of J^k(R, R^n); row i of ``u`` holds u^i."""

    x: float
    u: np.ndarray

    def __post_init__(self):
        u = np.atleast_2d(np.asarray(self.u, dtype=float)).copy()
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @classmethod
    def origin(cls, k: int = 2, n: int = 2, x: float = 0.0) -> "JetPoint":
        return cls(x, np.zeros((k + 1, n)))


@dataclass(frozen=True)
class MagneticPoint:
    x: float
    y1: float
    y2: float
    z1: float
    z2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y1, self.y2, self.z1, self.z2])


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples (t, state) with named state columns."""

    t: np.ndarray
    states: np.ndarray
    kind: str
    fields: tuple
    momentum: object = None
    truncated: bool = False
    origin_index: int = 0
    potential: np.ndarray = field(default=None, repr=False)

    def column(self, name: str) -> np.ndarray:
        return self.states[:, self.fields.index(name)]

    def energy(self) -> np.ndarray:
        p, x = self.column("p_x"), self.column("x")
        return 0.5 * p * p + 0.5 * npoly.polyval(x, self.potential)

    def arc_length(self, names) -> float:
        """Polygonal length of the samples projected onto ``names``."""
        pts = np.column_stack([self.column(n) for n in names])
        return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("t",) + tuple(self.fields))
        for t, row in zip(self.t, self.states):
            w.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in row])


def _check_start(v, s0: ReducedState):
    h = 0.5 * s0.p_x**2 + 0.5 * npoly.polyval(s0.x, v)
    if abs(h - 0.5) > ENERGY_TOL:
        raise InvalidInput(f"start has H = {h!r}; geodesics need H = 1/2")
    dv = npoly.polyder(v) if v.size > 1 else np.zeros(1)
    if s0.p_x == 0 and abs(npoly.polyval(s0.x, dv)) <= ENERGY_TOL:
        raise InvalidInput(f"x = {s0.x} is an equilibrium; the geodesic stays there")


def _flow(v, extra, y0, t0, t_span, tol, max_step, t_eval, truncate):
    """Integrate (p, x, extra...) on both sides of t0 and stitch the pieces."""
    v = _trim(v)
    dv = npoly.polyder(v) if v.size > 1 else np.zeros(1)

    def rhs(t, y):
        p, x = y[0], y[1]
        head = [-0.5 * npoly.polyval(x, dv), p]
        return np.concatenate([head, extra(x, p, y)]) if extra else np.array(head)

    def stop(t, y):
        return abs(y[0]) < STOP_TOL and abs(0.5 * npoly.polyval(y[1], dv)) < STOP_TOL

    ta, tb = t_span
    if not ta <= t0 <= tb:
        raise InvalidInput(f"start time {t0} outside window [{ta}, {tb}]")
    kw = dict(rtol=tol, atol=tol, max_step=max_step, stop=stop if truncate else None)
    te_f = te_b = None
    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=float)
        te_f = t_eval[t_eval > t0]
        te_b = t_eval[t_eval < t0][::-1]
    fwd = dopri5(rhs, t0, y0, tb, t_eval=te_f, **kw)
    bwd = dopri5(rhs, t0, y0, ta, t_eval=te_b, **kw)
    t = np.concatenate([bwd.t[:0:-1], fwd.t])
    y = np.concatenate([bwd.y[:0:-1], fwd.y])
    return t, y, fwd.stopped or bwd.stopped, len(bwd.t) - 1


def integrate_reduced(v, s0: ReducedState, t_span=(0.0, 1.0), tol: float = 1e-10,
                      max_step: float = math.inf, t_eval=None, truncate: bool = True) -> Trajectory:
    """Solve p' = -V'(x)/2, x' = p on ``t_span`` through the state ``s0``.

    With ``truncate`` the run stops once both |p| and |V'/2| drop below
    1e-12 (the asymptotic approach to an equilibrium).
    """
    v = _trim(v)
    _check_start(v, s0)
    t, y, cut, i0 = _flow(v, None, np.array([s0.p_x, s0.x]), s0.t, t_span, tol, max_step, t_eval, truncate)
    return Trajectory(t, y, "Reduced", ("p_x", "x"), None, cut, i0, v)


def _jet_fields(k: int, n: int) -> tuple:
    return tuple(f"u{i}_{l + 1}" for i in range(k, -1, -1) for l in range(n))


def lift_jet(p: VecPoly, reduced: Trajectory, start: JetPoint, tol: float = 1e-10) -> Trajectory:
    """Horizontal lift through the left-invariant frame.

    dx/dt = p_x, du^k/dt = P(x), du^i/dt = p_x u^{i+1} for i < k, integrated
    together with the reduced flow and sampled at the reduced trajectory's
    times.
    """
    k, n = start.u.shape[0] - 1, start.u.shape[1]
    if p.dim != n:
        raise InvalidInput(f"momentum has {p.dim} components, jet point has {n}")
    s = reduced.states[reduced.origin_index]
    if abs(s[1] - start.x) > 1e-12 * max(1.0, abs(s[1])):
        raise InvalidInput("jet start x differs from the reduced trajectory's start")
    coeffs = [_trim(c) for c in p.coeffs]

    def extra(x, px, y):
        u = y[2:].reshape(k + 1, n)  # rows u^k ... u^0
        out = np.empty_like(u)
        out[0] = [npoly.polyval(x, c) for c in coeffs]
        out[1:] = px * u[:-1]
        return out.ravel()

    y0 = np.concatenate([[s[0], s[1]], start.u[::-1].ravel()])
    t0 = reduced.t[reduced.origin_index]
    t, y, cut, i0 = _flow(reduced.potential, extra, y0, t0, (reduced.t[0], reduced.t[-1]),
                          tol, math.inf, reduced.t, False)
    return Trajectory(t, y, "Jet", ("p_x", "x") + _jet_fields(k, n), p, cut or reduced.truncated,
                      i0, reduced.potential)


def geodesic_magnetic(a: float, b: float, nu: PencilMomentum, reduced: Trajectory,
                      start: MagneticPoint, tol: float = 1e-10) -> Trajectory:
    """y_i' = G_i(x), z_i' = G_i(x) P_i(x) along the reduced flow of V_nu."""
    g = pencil(a, b, nu.nu)
    base = base_poly(a, b)
    gc = [_trim(c) for c in g.coeffs]
    gp = [_trim(npoly.polymul(gc[i], base.coeffs[i])) for i in range(2)]
    s = reduced.states[reduced.origin_index]
    if abs(s[1] - start.x) > 1e-12 * max(1.0, abs(s[1])):
        raise InvalidInput("magnetic start x differs from the reduced trajectory's start")

    def extra(x, px, y):
        return np.array([npoly.polyval(x, gc[0]), npoly.polyval(x, gc[1]),
                         npoly.polyval(x, gp[0]), npoly.polyval(x, gp[1])])

    y0 = np.array([s[0], s[1], start.y1, start.y2, start.z1, start.z2])
    t0 = reduced.t[reduced.origin_index]
    t, y, cut, i0 = _flow(reduced.potential, extra, y0, t0, (reduced.t[0], reduced.t[-1]),
                          tol, math.inf, reduced.t, False)
    return Trajectory(t, y, "Magnetic", ("p_x", "x", "y1", "y2", "z1", "z2"), nu,
                      cut or reduced.truncated, i0, reduced.potential)


def project_magnetic(a: float, b: float, pt: JetPoint) -> MagneticPoint:
    """pi_(a,b): z_l = u^2_l P_l - u^1_l P_l' + u^0_l P_l''."""
    if pt.u.shape != (3, 2):
        raise InvalidInput("projection is defined on J^2(R, R^2)")
    base = base_poly(a, b)
    d = [base(pt.x), base.derivative(1)(pt.x), base.derivative(2)(pt.x)]
    u0, u1, u2 = pt.u
    z = u2 * d[0] - u1 * d[1] + u0 * d[2]
    return MagneticPoint(pt.x, u2[0], u2[1], z[0], z[1])


def project_trajectory(a: float, b: float, jet: Trajectory) -> np.ndarray:
    """Rows (x, y1, y2, z1, z2) for every sample of a J^2(R, R^2) trajectory."""
    rows = []
    for s in jet.states:
        u = np.array([s[6:8], s[4:6], s[2:4]])  # u^0, u^1, u^2
        rows.append(project_magnetic(a, b, JetPoint(s[1], u)).as_array())
    return np.array(rows)


def translate(pt: MagneticPoint, y0, z0) -> MagneticPoint:
    return MagneticPoint(pt.x, pt.y1 + y0[0], pt.y2 + y0[1], pt.z1 + z0[0], pt.z2 + z0[1])
