"""Command line front end: ``jetgeo {classify,geodesic,periodmap,verify}``.

Exit codes: 0 success, 1 failed verification, 2 invalid input or config,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from . import classify as cl
from . import dynamics as dy
from . import periodmap as pm
from . import poly as pc
from . import verify as vf
from .errors import InvalidInput, NumericalFailure
from .quadrature import default_tol

SCHEMA = "jetgeo/1"


# -- output helpers ----------------------------------------------------------

def fmt(v: float) -> str:
    return format(float(v), ".17g")


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float printed to 17 significant digits."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else json.dumps(str(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(to_json(v) for v in obj) + "]"
        items = [f"{inner}{to_json(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


@contextmanager
def _open_out(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _emit(text: str, path=None):
    with _open_out(path) as fh:
        fh.write(text + "\n")


# -- argument parsing --------------------------------------------------------

def _branch(s: str) -> int:
    table = {"+": 1, "plus": 1, "1": 1, "+1": 1, "-": -1, "minus": -1, "-1": -1}
    if s not in table:
        raise argparse.ArgumentTypeError(f"branch must be + or -, got {s!r}")
    return table[s]


def _pair(s: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in s.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {s!r}") from None
    if not lo < hi:
        raise argparse.ArgumentTypeError(f"need lo < hi, got {s!r}")
    return lo, hi


def _mu(s: str) -> tuple:
    try:
        vals = tuple(float(v) for v in s.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--mu needs 6 comma-separated numbers, got {s!r}") from None
    if len(vals) != 6:
        raise argparse.ArgumentTypeError(f"--mu needs 6 numbers, got {len(vals)}")
    return vals


def _pos_int(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s!r}")
    return v


def _pos_float(s: str) -> float:
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s!r}")
    return v


def _add_pencil(p, defaults=True):
    d = 1.0 if defaults else None
    p.add_argument("--a", type=float, default=d)
    p.add_argument("--b", type=float, default=d)
    p.add_argument("--tau", type=float, default=d)
    p.add_argument("--eta", type=float, default=d)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jetgeo", description="Geodesics of J^2(R,R^2) and the period map.")
    ap.add_argument("--tol", type=_pos_float, default=None,
                    help="quadrature tolerance (default 1e-10, or JETGEO_TOL)")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="classify the geodesic of a momentum")
    _add_pencil(c, defaults=False)
    c.add_argument("--mu", type=_mu, help="a0_1,a0_2,a1_1,a1_2,a2_1,a2_2")
    c.add_argument("--json", action="store_true")

    g = sub.add_parser("geodesic", help="integrate a geodesic and write CSV")
    g.add_argument("--space", choices=("reduced", "jet", "magnetic"), default="magnetic")
    g.add_argument("--window", type=_pair, default=(-5.0, 5.0), help="t0,t1 around the start time 0")
    g.add_argument("--step", type=_pos_float, default=0.005, help="output spacing")
    _add_pencil(g)
    g.add_argument("--mu", type=_mu, help="jet-space momentum instead of a pencil")
    g.add_argument("--x0", type=float, default=None, help="start position (default: a Hill endpoint)")
    g.add_argument("--no-truncate", action="store_true", help="do not stop near equilibria")
    g.add_argument("--out", default="-")

    pmp = sub.add_parser("periodmap", help="period map evaluation, sweeps, Jacobians, injectivity")
    psub = pmp.add_subparsers(dest="action", required=True)
    e = psub.add_parser("eval")
    _add_pencil(e)
    e.add_argument("--branch", type=_branch, default=1)
    e.add_argument("--out", default="-")

    s = psub.add_parser("sweep")
    s.add_argument("--a", type=float, default=1.0)
    s.add_argument("--b", type=float, default=1.0)
    s.add_argument("--branch", choices=("plus", "minus", "both"), default="both")
    s.add_argument("--tau-range", type=_pair, default=(0.2, 3.0))
    s.add_argument("--eta-range", type=_pair, default=(-2.0, 2.0))
    s.add_argument("--n-tau", type=_pos_int, default=40)
    s.add_argument("--n-eta", type=_pos_int, default=40)
    s.add_argument("--workers", type=_pos_int, default=1)
    s.add_argument("--out", default="-")

    j = psub.add_parser("jacobian")
    _add_pencil(j)
    j.add_argument("--mode", choices=("analytic", "finite_difference", "both"), default="both")
    j.add_argument("--out", default="-")

    i = psub.add_parser("inject")
    i.add_argument("--a", type=float, default=1.0)
    i.add_argument("--b", type=float, default=1.0)
    i.add_argument("--branch", type=_branch, default=1)
    i.add_argument("--n-tau", type=_pos_int, default=40)
    i.add_argument("--n-eta", type=_pos_int, default=40)
    i.add_argument("--overlay", action="store_true", help="also compare the Theta+ and Theta- images")
    i.add_argument("--cloud", default=None, help="write the image point cloud as CSV")
    i.add_argument("--workers", type=_pos_int, default=1)
    i.add_argument("--out", default="-")

    v = sub.add_parser("verify", help="run the invariant suite")
    v.add_argument("--config", default=None, help="YAML or JSON suite config")
    v.add_argument("--module", action="append", dest="modules", default=None)
    v.add_argument("--tolerance-override", type=float, default=None)
    v.add_argument("--timings", action="store_true")
    v.add_argument("--out", default="-")
    return ap


@dataclass
class RunConfig:
    """Validated flags of one invocation."""

    command: str
    args: dict = field(default_factory=dict)


def _need_pencil(args):
    missing = [k for k in ("a", "b", "tau", "eta") if getattr(args, k) is None]
    if missing:
        raise InvalidInput(f"missing flags: {', '.join('--' + m for m in missing)}")
    if args.a == 0 and args.b == 0:
        raise InvalidInput("--a/--b: (a, b) = (0, 0) is excluded from the magnetic pipeline")


# -- commands ----------------------------------------------------------------

def _interval_dict(h: cl.HillInterval) -> dict:
    return {"x0": h.x0, "x1": h.x1, "mult0": h.mult0, "mult1": h.mult1}


def cmd_classify(args) -> int:
    if args.mu is not None:
        if any(getattr(args, k) is not None for k in ("a", "b", "tau", "eta")):
            raise InvalidInput("--mu cannot be combined with --a/--b/--tau/--eta")
        p = pc.from_mu(args.mu)
        labels = None
        head = {"momentum": list(args.mu)}
    else:
        _need_pencil(args)
        p = pc.pencil(args.a, args.b, (1 - args.tau, 0.0, args.tau, args.eta))
        head = {"a": args.a, "b": args.b, "tau": args.tau, "eta": args.eta,
                "in_A_plus": pc.in_domain(args.a, args.b, args.tau, args.eta, 1),
                "in_A_minus": pc.in_domain(args.a, args.b, args.tau, args.eta, -1)}
        labels = True
    hs = cl.hill_intervals(p.potential())
    rows = []
    for h in hs:
        row = {"type": cl.classify_geodesic(p, h).value, "interval": _interval_dict(h)}
        if labels and h.bounded and not h.is_point:
            if h.x0 == 0 or abs(h.x0) < 1e-12:
                row["label"] = "I+"
            elif h.x1 == 0 or abs(h.x1) < 1e-12:
                row["label"] = "I-"
        rows.append(row)
    out = {"schema": SCHEMA, **head, "intervals": rows, "equilibria": cl.equilibria(p)}
    if args.json:
        _emit(to_json(out))
        return 0
    for r in rows:
        iv = r["interval"]
        tag = f"{r['label']}=" if "label" in r else ""
        print(f"{r['type']}, {tag}[{fmt(iv['x0'])}, {fmt(iv['x1'])}]")
    print("equilibria: " + (", ".join(fmt(x) for x in out["equilibria"]) or "none"))
    return 0


def _start_for(p: pc.VecPoly, x0):
    v = p.potential()
    if x0 is not None:
        rest = 1 - np.polynomial.polynomial.polyval(x0, v)
        if rest < -1e-12:
            raise InvalidInput(f"--x0 {x0} is outside the Hill region")
        return dy.ReducedState(math.sqrt(max(rest, 0.0)), x0)
    h = cl.hill_intervals(v)[-1]
    if not h.bounded:
        return dy.ReducedState(math.sqrt(max(0.0, 1 - v[0])), 0.0)
    for x, m in ((h.x1, h.mult1), (h.x0, h.mult0)):
        if m == 1:
            return dy.ReducedState(0.0, x)
    raise InvalidInput("no simple Hill endpoint to start from; pass --x0")


def cmd_geodesic(args) -> int:
    t0, t1 = args.window
    if not t0 <= 0 <= t1:
        raise InvalidInput("--window must contain the start time 0")
    te = np.unique(np.concatenate([np.arange(0.0, t1, args.step), [t1],
                                   -np.arange(0.0, -t0, args.step), [t0]]))
    if args.mu is not None:
        if args.space == "magnetic":
            raise InvalidInput("--space magnetic needs pencil flags, not --mu")
        p = pc.from_mu(args.mu)
    else:
        _need_pencil(args)
        p = pc.pencil(args.a, args.b, (1 - args.tau, 0.0, args.tau, args.eta))
    s0 = _start_for(p, args.x0)
    red = dy.integrate_reduced(p.potential(), s0, (t0, t1), t_eval=te, truncate=not args.no_truncate)
    if red.truncated:
        print(f"warning: run truncated near an equilibrium; samples cover "
              f"[{fmt(red.t[0])}, {fmt(red.t[-1])}]", file=sys.stderr)
    if args.space == "reduced":
        traj, cols = red, None
    elif args.space == "jet":
        traj = dy.lift_jet(p, red, dy.JetPoint(s0.x, np.zeros((3, p.dim))))
        cols = ("x", "u2_1", "u2_2")
    else:
        nu = pc.PencilMomentum(args.tau, args.eta)
        traj = dy.geodesic_magnetic(args.a, args.b, nu, red, dy.MagneticPoint(s0.x, 0, 0, 0, 0))
        cols = ("x", "y1", "y2")
    with _open_out(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        extra = ("speed_defect",) if cols else ()
        w.writerow(("t",) + traj.fields + extra)
        if cols:
            pts = np.column_stack([traj.column(c) for c in cols])
            arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
            defect = arc - (traj.t - traj.t[0])
        for k, (t, row) in enumerate(zip(traj.t, traj.states)):
            tail = [fmt(defect[k])] if cols else []
            w.writerow([fmt(t)] + [fmt(v) for v in row] + tail)
    return 0


def _pm_eval(args) -> int:
    _need_pencil(args)
    pv = pm.period_map(args.a, args.b, args.tau, args.eta, args.branch, tol=args.tol)
    out = {"schema": SCHEMA, "a": args.a, "b": args.b, "tau": args.tau, "eta": args.eta,
           "branch": args.branch, "theta": [pv.theta1, pv.theta2, pv.theta3],
           "error_estimate": pv.error_estimate}
    _emit(to_json(out), args.out)
    return 0


def _write_rows(fh, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(pm.SWEEP_COLUMNS)
    for r in rows:
        w.writerow([fmt(r[0]), fmt(r[1]), fmt(r[2]), fmt(r[3]), str(r[4])] + [fmt(v) for v in r[5:]])


def _pm_sweep(args) -> int:
    if args.a == 0 and args.b == 0:
        raise InvalidInput("--a/--b: (a, b) = (0, 0) is excluded")
    grid = pm.GridSpec(args.tau_range, args.eta_range, args.n_tau, args.n_eta)
    br = {"plus": (1,), "minus": (-1,), "both": (1, -1)}[args.branch]
    rows = pm.sweep(args.a, args.b, grid, br, args.workers)
    with _open_out(args.out) as fh:
        _write_rows(fh, rows)
    return 0


def _pm_jacobian(args) -> int:
    _need_pencil(args)
    out = {"schema": SCHEMA, "a": args.a, "b": args.b, "tau": args.tau, "eta": args.eta}
    if args.mode in ("analytic", "both"):
        an = pm.jacobian_det(args.a, args.b, args.tau, args.eta, "analytic")
        if isinstance(an, pm.JacobianCertificate):
            out["analytic"] = {"certificate": {"det_f1": an.det_f1, "dtheta2_dv3": an.dtheta2_dv3,
                                               f"dtheta3_dv{an.k}": an.dtheta3_dvk,
                                               "composite_det": an.composite_det,
                                               "nonzero": an.nonzero}}
        else:
            out["analytic"] = an
    if args.mode in ("finite_difference", "both"):
        out["finite_difference"] = pm.jacobian_det(args.a, args.b, args.tau, args.eta, "finite_difference")
    _emit(to_json(out), args.out)
    return 0


def _pm_inject(args) -> int:
    if args.a == 0 and args.b == 0:
        raise InvalidInput("--a/--b: (a, b) = (0, 0) is excluded")
    grid = pm.GridSpec(n_tau=args.n_tau, n_eta=args.n_eta)
    rep = pm.injectivity_probe(args.a, args.b, grid, args.branch, workers=args.workers)
    out = {"schema": SCHEMA, **rep.to_json_dict()}
    cloud = rep.cloud
    if args.overlay:
        o = pm.overlay(args.a, args.b, grid, workers=args.workers)
        out["overlay"] = {"matches": o.matches, "all_at_eta_zero": o.all_at_eta_zero,
                          "min_offaxis_distance": o.min_offaxis_distance}
        cloud = o.plus + o.minus
    if args.cloud:
        with _open_out(args.cloud) as fh:
            _write_rows(fh, cloud)
    _emit(to_json(out), args.out)
    return 0


def cmd_verify(args) -> int:
    try:
        cfg = vf.SuiteConfig.load(args.config) if args.config else vf.SuiteConfig()
        if args.modules:
            cfg = vf.SuiteConfig.from_mapping({**cfg.__dict__, "modules": args.modules})
        if args.tolerance_override is not None:
            cfg.tolerance_override = args.tolerance_override
    except vf.ConfigError as exc:
        print(f"jetgeo: bad config: {exc}", file=sys.stderr)
        return 2
    results = vf.run_suite(cfg)
    _emit(to_json(vf.report(results, args.timings)), args.out)
    for r in results:
        print(f"{r.status.upper():4s} {r.check_id}: {r.measured:.3g} <= {r.tolerance:.3g}", file=sys.stderr)
    return 0 if all(r.status == "pass" for r in results) else 1


_VALUE_FLAGS = {"--window", "--tau-range", "--eta-range", "--mu"}


def _glue_negative_values(argv: list[str]) -> list[str]:
    """Let ``--window -5,5`` through; argparse would read -5,5 as a flag."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") \
                and argv[i + 1][1:2].replace(".", "").isdigit():
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    ap = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = ap.parse_args(_glue_negative_values(argv))
    try:
        if args.tol is None:
            args.tol = default_tol()
    except ValueError as exc:
        print(f"jetgeo: {exc}", file=sys.stderr)
        return 2
    handlers = {
        "classify": cmd_classify,
        "geodesic": cmd_geodesic,
        "verify": cmd_verify,
        "periodmap": lambda a: {"eval": _pm_eval, "sweep": _pm_sweep,
                                "jacobian": _pm_jacobian, "inject": _pm_inject}[a.action](a),
    }
    try:
        return handlers[args.command](args)
    except (InvalidInput, ValueError) as exc:
        print(f"jetgeo: {exc}", file=sys.stderr)
        return 2
    except (NumericalFailure, ArithmeticError) as exc:
        print(f"jetgeo: numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
