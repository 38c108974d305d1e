"""Invariant suite: every acceptance check with its measured error."""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from importlib import resources

import numpy as np
import yaml

from . import classify as cl
from . import dynamics as dy
from . import periodmap as pm
from . import poly as pc
from .quadrature import delta_map


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    module: str
    status: str
    measured: float
    tolerance: float
    runtime: float = 0.0
    detail: str = ""

    def to_dict(self, timings: bool = False) -> dict:
        d = asdict(self)
        if not timings:
            d.pop("runtime")
        return d


@dataclass
class SuiteConfig:
    modules: list | None = None
    checks: list | None = None
    tolerance_override: float | None = None
    family_n: int = 10
    symmetry_n: int = 20
    inject_n: int = 40
    workers: int = 1

    @classmethod
    def from_mapping(cls, data: dict | None) -> "SuiteConfig":
        data = data or {}
        if not isinstance(data, dict):
            raise ConfigError("config must be a mapping")
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        cfg = cls(**data)
        for name in ("family_n", "symmetry_n", "inject_n", "workers"):
            v = getattr(cfg, name)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if cfg.tolerance_override is not None:
            try:
                cfg.tolerance_override = float(cfg.tolerance_override)
            except (TypeError, ValueError):
                raise ConfigError("tolerance_override must be a number") from None
        for name in ("modules", "checks"):
            v = getattr(cfg, name)
            if v is not None and not (isinstance(v, list) and all(isinstance(s, str) for s in v)):
                raise ConfigError(f"{name} must be a list of strings")
        if cfg.modules is not None:
            bad = set(cfg.modules) - MODULES
            if bad:
                raise ConfigError(f"unknown modules: {sorted(bad)}")
        if cfg.checks is not None:
            bad = set(cfg.checks) - set(CHECKS)
            if bad:
                raise ConfigError(f"unknown checks: {sorted(bad)}")
        return cfg

    @classmethod
    def load(cls, path) -> "SuiteConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = yaml.safe_load(fh)
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_mapping(data)


def load_reference() -> dict:
    text = resources.files("jetgeo").joinpath("data/reference.yaml").read_text(encoding="utf-8")
    return yaml.safe_load(text)


def _rel(x, ref, floor=1e-300):
    x, ref = np.asarray(x, float), np.asarray(ref, float)
    return float(np.max(np.abs(x - ref) / np.maximum(np.abs(ref), floor)))


def _grid(n, eta_range=(-2.0, 2.0)):
    return pm.GridSpec(n_tau=n, n_eta=n, eta_range=eta_range)


# -- checks: each returns (measured, tolerance[, detail]) ---------------------

def c_reconstruction(cfg):
    err = 0.0
    xs = np.linspace(-1.5, 1.5, 31)
    for a, b, t, e in [(1, 1, 1, 1), (1, -1, 1.3, 0.7), (0, 1, 1, 1), (2, 0.5, 0.8, 0.4)]:
        th = pc.theta_coords(a, b, t, e)
        v = pc.pencil(a, b, (1 - t, 0, t, e)).potential()
        direct = 1 - np.polynomial.polynomial.polyval(xs, v)
        err = max(err, float(np.max(np.abs(th.one_minus_v(xs) - direct) / np.maximum(1, np.abs(direct)))))
    return err, 1e-12


def c_theta2_eta0(cfg):
    err = max(_rel(pm.period_map(1, 0, t, 0).theta2, pm.theta2_eta_zero(t)) for t in (0.5, 1.0, 2.0))
    return err, 1e-8


def c_family_closed_forms(cfg):
    err = 0.0
    for a, b in ((1, 0), (0, 1)):
        for t, e in _grid(cfg.family_n).points(a, b):
            pv = pm.period_map(a, b, t, e)
            err = max(err, _rel([pv.theta2, pv.theta3], pm.period_map_closed_form(a, b, t, e), 1e-12))
    return err, 1e-6


def c_appendix(cfg):
    err = 0.0
    for t, e in _grid(cfg.family_n, (0.1, 2.0)).points(1, 1):
        pv = pm.period_map(1, 1, t, e)
        app = pm.period_map_appendix(1, 1, pc.theta_coords(1, 1, t, e))
        err = max(err, _rel(app, [pv.theta2, pv.theta3], 1e-12))
    return err, 1e-6


def c_jacobian_values(cfg):
    errs = []
    for a, b in ((1, 0), (0, 1)):
        for t, e in [(1.0, 1.0)] + _grid(cfg.family_n).points(a, b):
            an = pm.jacobian_det(a, b, t, e, "analytic")
            fd = pm.jacobian_det(a, b, t, e, "finite_difference")
            errs.append(_rel(fd, an))
    return max(errs), 1e-4


def c_jacobian_nondegenerate(cfg):
    bad = 0
    for a, b in ((1, 0), (0, 1)):
        for t, e in _grid(cfg.family_n).points(a, b):
            try:
                if abs(pm.jacobian_det(a, b, t, e, "finite_difference")) <= 1e-6:
                    bad += 1
            except pm.DegenerateJacobian:
                bad += 1
    return float(bad), 0.0, "grid points with |det| <= 1e-6"


def c_sign_certificates(cfg):
    c = np.linspace(-1, 1, 1002)[1:-1]
    r = pm.rho_suite(c)
    neg = np.linspace(-1, 0, 1002)[1:-1]
    d = pm.rho_suite(neg).disc
    bad = int(np.sum(r.rho1 <= 0) + np.sum(r.rho2 <= 0) + np.sum(r.rho3 <= 0) + np.sum(d >= 0))
    return float(bad), 0.0, "sign violations"


SYM_PARAMS = [(1, 1), (1, -1), (0, 1), (1, 0), (2, 0.5), (-1, 2)]


def c_eta_reflection(cfg):
    err = 0.0
    for a, b in SYM_PARAMS:
        for br in (1, -1):
            for t, e in _grid(cfg.symmetry_n).points(a, b, br):
                p = pm.period_map(a, b, t, e, br).as_array()
                m = pm.period_map(a, b, t, -e, br).as_array()
                err = max(err, float(np.max(np.abs(p * [-1, 1, -1] - m)) / max(1.0, np.max(np.abs(p)))))
    return err, 1e-8


def c_switch(cfg):
    err = 0.0
    for a, b in SYM_PARAMS:
        for t, e in _grid(cfg.symmetry_n).points(a, b, -1):
            lhs = pm.period_map(a, b, t, e, -1).as_array()
            rhs = pm.period_map(a, -b, t, e, 1).as_array()
            err = max(err, float(np.max(np.abs(lhs - rhs)) / max(1.0, np.max(np.abs(rhs)))))
    return err, 1e-8


def c_even_case(cfg):
    """b = 0 gives Theta+ = Theta- everywhere; b != 0 only on eta = 0."""
    err = 0.0
    taus = np.linspace(0.2, 3.0, cfg.symmetry_n)
    for a, b in SYM_PARAMS:
        pts = [(t, 0.0) for t in taus] if b else _grid(cfg.symmetry_n).points(a, b, 1)
        for t, e in pts:
            d = pm.period_map(a, b, t, e, 1).as_array() - pm.period_map(a, b, t, e, -1).as_array()
            err = max(err, float(np.max(np.abs(d))))
    return err, 1e-8


def c_even_case_strict(cfg):
    """For b != 0 and eta != 0 the branches must differ."""
    bad = 0
    for a, b in SYM_PARAMS:
        if b == 0:
            continue
        g = _grid(cfg.symmetry_n)
        both = set(g.points(a, b, 1)) & set(g.points(a, b, -1))
        for t, e in sorted(both):
            if e == 0:
                continue
            d = pm.period_map(a, b, t, e, 1).as_array() - pm.period_map(a, b, t, e, -1).as_array()
            if np.max(np.abs(d)) <= 1e-8:
                bad += 1
    return float(bad), 0.0, "eta != 0 points with Theta+ = Theta-"


def _candidate(span, step):
    a, b, nu = 1.0, 1.0, pc.PencilMomentum(1.0, 1.0)
    xp = pc.x_plus_formula(a, b, 1, 1)
    v = nu.poly(a, b).potential()
    te = np.round(np.arange(-span, span + step / 2, step), 12)
    red = dy.integrate_reduced(v, dy.ReducedState(0.0, xp), (-span, span), t_eval=te, truncate=False)
    return a, b, nu, xp, red


def c_energy(cfg):
    worst = 0.0
    nu = pc.PencilMomentum(1.0, 1.0)
    v = nu.poly(1, 1).potential()
    red = dy.integrate_reduced(v, dy.ReducedState(0.0, pc.x_plus_formula(1, 1, 1, 1)), (-25, 25), truncate=False)
    worst = max(worst, float(np.max(np.abs(red.energy() - 0.5))))
    # a periodic geodesic: P = (x^2 - 1/2, x) has V < 1 on a bounded interval with simple roots
    vp = pc.VecPoly([[-0.5, 0, 1], [0, 1, 0]]).potential()
    x0 = max(r for r, _ in pc.real_roots(cl.one_minus(vp)))
    per = dy.integrate_reduced(vp, dy.ReducedState(0.0, x0), (0, 50))
    worst = max(worst, float(np.max(np.abs(per.energy() - 0.5))))
    return worst, 1e-8


LEGS = [(0.0, 1.0), (0.5, 3.0), (1.0, 4.0), (-3.0, -0.2), (2.0, 6.0)]


def c_delta_legs(cfg):
    a, b, nu, xp, red = _candidate(6.0, 0.01)
    mag = dy.geodesic_magnetic(a, b, nu, red, dy.MagneticPoint(xp, 0, 0, 0, 0))
    err = 0.0
    for ta, tb in LEGS:
        ia, ib = (int(np.argmin(np.abs(mag.t - s))) for s in (ta, tb))
        x = mag.column("x")
        d = delta_map(a, b, nu, (x[ia], x[ib]))
        got = [mag.t[ib] - mag.t[ia]] + [mag.column(c)[ib] - mag.column(c)[ia] for c in ("y1", "y2", "z1", "z2")]
        err = max(err, float(np.max(np.abs(np.array(got) - [d.dt, d.dy1, d.dy2, d.dz1, d.dz2]))))
    return err, 1e-6


def c_commuting_square(cfg):
    a, b, nu, xp, red = _candidate(5.0, 0.01)
    mag = dy.geodesic_magnetic(a, b, nu, red, dy.MagneticPoint(xp, 0, 0, 0, 0))
    jet = dy.lift_jet(nu.poly(a, b), red, dy.JetPoint(xp, np.zeros((3, 2))))
    proj = dy.project_trajectory(a, b, jet)
    return float(np.max(np.abs(proj - mag.states[:, 1:]))), 1e-6


def c_injectivity(cfg):
    g = pm.GridSpec(n_tau=cfg.inject_n, n_eta=cfg.inject_n)
    n = 0
    for a, b in ((1, 0), (0, 1)):
        n += len(pm.injectivity_probe(a, b, g, workers=cfg.workers).collisions)
    return float(n), 0.0, "collisions"


def c_overlay(cfg):
    g = pm.GridSpec(n_tau=cfg.inject_n, n_eta=cfg.inject_n + 1)
    o = pm.overlay(1, 1, g, workers=cfg.workers)
    off = sum(1 for m in o.matches if m["plus"][1] != 0 or m["minus"][1] != 0)
    on = sum(1 for m in o.matches if m["plus"][1] == 0)
    return float(off), 0.0, f"{on} coincidences at eta = 0, {off} elsewhere"


def c_classification(cfg):
    bad = 0
    for a, b in SYM_PARAMS:
        for br in (1, -1):
            for t, e in _grid(8).points(a, b, br):
                p = pc.pencil(a, b, (1 - t, 0, t, e))
                xm, xp = pc.theta_coords(a, b, t, e).roots
                lo, hi = (0.0, xp) if br == 1 else (xm, 0.0)
                hs = [h for h in cl.hill_intervals(p.potential())
                      if abs(h.x0 - lo) < 1e-9 and abs(h.x1 - hi) < 1e-9]
                if len(hs) != 1 or cl.classify_geodesic(p, hs[0]) is not cl.GeodesicType.HOMOCLINIC:
                    bad += 1
    for c in ((0.3, 0.4), (1.0, 0.0), (0.0, 0.0)):
        p = pc.VecPoly([[c[0]], [c[1]]])
        if cl.classify_geodesic(p, cl.hill_intervals(p.potential())[0]) is not cl.GeodesicType.LINE:
            bad += 1
    return float(bad), 0.0, "misclassified momenta"


def c_xplus(cfg):
    err = 0.0
    for a, b in SYM_PARAMS:
        for t, e in _grid(8).points(a, b, 1):
            q = cl.one_minus(pc.pencil(a, b, (1 - t, 0, t, e)).potential())
            r = max(x for x, _ in pc.real_roots(q))
            err = max(err, abs(r - pc.x_plus_formula(a, b, t, e)))
    return err, 1e-10


def c_regression(cfg):
    err = 0.0
    for row in load_reference()["period_map"]:
        pv = pm.period_map(row["a"], row["b"], row["tau"], row["eta"], row["branch"])
        err = max(err, float(np.max(np.abs(pv.as_array() - row["theta"]))))
        xm, xp = pc.theta_coords(row["a"], row["b"], row["tau"], row["eta"]).roots
        err = max(err, abs((xp if row["branch"] == 1 else xm) - row["root"]))
    return err, 1e-9


def c_quadrature_additivity(cfg):
    a, b, nu = 1, 1, pc.PencilMomentum(1.0, 1.0)
    xp = pc.x_plus_formula(a, b, 1, 1)
    pts = [0.05, 0.15, xp]
    d01, d12, d02 = (delta_map(a, b, nu, s) for s in ((pts[0], pts[1]), (pts[1], pts[2]), (pts[0], pts[2])))
    err = max(abs(getattr(d01, k) + getattr(d12, k) - getattr(d02, k))
              for k in ("dt", "dy1", "dy2", "dz1", "dz2"))
    return err, 2e-10


def c_half_loop(cfg):
    """cost_y on [0, x+] is the single-leg Theta^2."""
    d = delta_map(1, 1, pc.PencilMomentum(1.0, 1.0), (0.0, pc.x_plus_formula(1, 1, 1, 1)))
    return abs(d.cost_y - pm.period_map(1, 1, 1, 1).theta2), 1e-8


# id -> (module, criterion number or None, function)
CHECKS = {
    "poly_core.reconstruction": ("poly_core", None, c_reconstruction),
    "classify.homoclinic_and_line": ("classify", 9, c_classification),
    "classify.xplus_closed_form": ("classify", 9, c_xplus),
    "quadrature.theta2_eta_zero": ("quadrature", 1, c_theta2_eta0),
    "quadrature.additivity": ("quadrature", None, c_quadrature_additivity),
    "quadrature.half_loop_cost": ("quadrature", None, c_half_loop),
    "periodmap.family_closed_forms": ("periodmap", 2, c_family_closed_forms),
    "periodmap.appendix": ("periodmap", 3, c_appendix),
    "periodmap.jacobian_values": ("periodmap", 4, c_jacobian_values),
    "periodmap.jacobian_nondegenerate": ("periodmap", 4, c_jacobian_nondegenerate),
    "periodmap.sign_certificates": ("periodmap", 5, c_sign_certificates),
    "periodmap.eta_reflection": ("periodmap", 6, c_eta_reflection),
    "periodmap.switch": ("periodmap", 6, c_switch),
    "periodmap.even_case": ("periodmap", 6, c_even_case),
    "periodmap.even_case_strict": ("periodmap", 6, c_even_case_strict),
    "periodmap.injectivity": ("periodmap", 8, c_injectivity),
    "periodmap.overlay": ("periodmap", 8, c_overlay),
    "periodmap.regression": ("periodmap", None, c_regression),
    "dynamics.energy": ("dynamics", 7, c_energy),
    "dynamics.delta_legs": ("dynamics", 7, c_delta_legs),
    "dynamics.commuting_square": ("dynamics", 7, c_commuting_square),
}
MODULES = {m for m, _, _ in CHECKS.values()}


def criterion_checks(number: int) -> list[str]:
    return sorted(k for k, (_, n, _) in CHECKS.items() if n == number)


def run_check(check_id: str, cfg: SuiteConfig) -> CheckResult:
    module, _, fn = CHECKS[check_id]
    t0 = time.perf_counter()
    detail = ""
    try:
        out = fn(cfg)
        measured, tol = float(out[0]), float(out[1])
        if len(out) > 2:
            detail = out[2]
    except Exception as exc:  # a crashing check is a failed check
        measured, tol, detail = math.inf, 0.0, f"{type(exc).__name__}: {exc}"
    if cfg.tolerance_override is not None:
        tol = cfg.tolerance_override
    status = "pass" if measured <= tol else "fail"
    return CheckResult(check_id, module, status, measured, tol, time.perf_counter() - t0, detail)


def selected(cfg: SuiteConfig) -> list[str]:
    ids = sorted(CHECKS)
    if cfg.modules is not None:
        ids = [i for i in ids if CHECKS[i][0] in cfg.modules]
    if cfg.checks is not None:
        ids = [i for i in ids if i in cfg.checks]
    return ids


def run_suite(cfg: SuiteConfig | None = None) -> list[CheckResult]:
    cfg = cfg or SuiteConfig()
    ids = selected(cfg)
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as ex:
            res = list(ex.map(lambda i: run_check(i, cfg), ids))
    else:
        res = [run_check(i, cfg) for i in ids]
    return sorted(res, key=lambda r: r.check_id)


def report(results: list[CheckResult], timings: bool = False) -> dict:
    return {
        "schema": "jetgeo/1",
        "passed": all(r.status == "pass" for r in results),
        "checks": [r.to_dict(timings) for r in results],
    }
