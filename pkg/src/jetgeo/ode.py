"""Adaptive Dormand-Prince 5(4) integrator.

Written out rather than taken from scipy so that steps can land exactly on
requested output times and so that the stopping rule near equilibria is
evaluated after every accepted step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import StepUnderflow

_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass
class OdeResult:
    t: np.ndarray
    y: np.ndarray
    stopped: bool
    n_steps: int


def dopri5(f, t0: float, y0, t1: float, rtol: float = 1e-10, atol: float = 1e-10,
           max_step: float = math.inf, t_eval=None, stop=None,
           max_steps: int = 2_000_000) -> OdeResult:
    """Integrate y' = f(t, y) from t0 to t1 (either direction).

    Output is every accepted step, or exactly the times in ``t_eval`` (which
    must run from t0 towards t1) when given.  ``stop(t, y)`` returning True
    ends the run early with ``stopped`` set.
    """
    y = np.asarray(y0, dtype=float).copy()
    t = float(t0)
    direction = 1.0 if t1 >= t0 else -1.0
    span = abs(t1 - t0)
    if t_eval is not None:
        targets = [float(s) for s in t_eval if direction * (s - t0) > 0]
        keep_all = False
    else:
        targets = []
        keep_all = True
    ts, ys = [t], [y.copy()]
    if span == 0:
        return OdeResult(np.array(ts), np.array(ys), False, 0)
    k1 = np.asarray(f(t, y), dtype=float)
    scale = atol + rtol * np.abs(y)
    with np.errstate(over="ignore", invalid="ignore"):
        d0 = np.linalg.norm(y / scale) / math.sqrt(y.size)
        d1 = np.linalg.norm(k1 / scale) / math.sqrt(y.size)
        h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    if not math.isfinite(h):
        h = 1e-6
    h = min(h, max_step, span)
    ti = 0
    steps = 0
    while direction * (t1 - t) > 0:
        steps += 1
        if steps > max_steps:
            raise StepUnderflow(f"step budget exhausted at t={t}")
        h = min(h, max_step, abs(t1 - t))
        if ti < len(targets):
            h = min(h, abs(targets[ti] - t))
        if h < 1e-14 * max(1.0, abs(t)):
            raise StepUnderflow(f"step size underflow at t={t}")
        k = [k1]
        for i in range(1, 7):
            yi = y + direction * h * sum(a * kj for a, kj in zip(_A[i], k))
            k.append(np.asarray(f(t + direction * h * _C[i], yi), dtype=float))
        y_new = y + direction * h * sum(b * kj for b, kj in zip(_B5, k) if b)
        err_vec = direction * h * sum(e * kj for e, kj in zip(_E, k))
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        with np.errstate(over="ignore", invalid="ignore"):
            err = math.sqrt(float(np.mean((err_vec / sc) ** 2)))
        if math.isnan(err):
            err = math.inf
        if err <= 1.0:
            hit = ti < len(targets) and abs(targets[ti] - t) <= h * (1 + 1e-12)
            t = targets[ti] if hit else (t1 if abs(t1 - t) <= h * (1 + 1e-12) else t + direction * h)
            y = y_new
            k1 = k[6]  # first same as last
            if keep_all or hit:
                ts.append(t)
                ys.append(y.copy())
            if hit:
                ti += 1
            if stop is not None and stop(t, y):
                return OdeResult(np.array(ts), np.array(ys), True, steps)
            fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        else:
            fac = max(0.2, 0.9 * err ** -0.2)
        h *= fac
    return OdeResult(np.array(ts), np.array(ys), False, steps)
