import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from jetgeo import classify as cl
from jetgeo import poly as pc
from jetgeo.errors import InvalidInterval, NoHillInterval, ZeroGradient

GT = cl.GeodesicType


def _sign_scan_intervals(v, lo=-3, hi=3, step=1e-3):
    """Oracle: runs of V - 1 <= 0 on a fine grid."""
    xs = np.arange(lo, hi + step, step)
    inside = np.polynomial.polynomial.polyval(xs, v) <= 1 + 1e-12
    edges = np.flatnonzero(np.diff(inside.astype(int)))
    return xs, inside, edges


def test_double_well_splits_at_double_root():
    v = pc.VecPoly([[1, 0, -1], [0, 0, 0]]).potential()
    hs = cl.hill_intervals(v)
    assert len(hs) == 2
    (l, r) = hs
    assert l.x0 == pytest.approx(-math.sqrt(2)) and l.x1 == pytest.approx(0, abs=1e-12)
    assert r.x0 == pytest.approx(0, abs=1e-12) and r.x1 == pytest.approx(math.sqrt(2))
    assert l.mult1 == 2 and r.mult0 == 2 and l.mult0 == 1 and r.mult1 == 1
    xs, inside, edges = _sign_scan_intervals(v)
    assert xs[edges[0]] == pytest.approx(-math.sqrt(2), abs=2e-3)
    assert xs[edges[-1]] == pytest.approx(math.sqrt(2), abs=2e-3)


def test_constant_below_one_is_unbounded():
    (h,) = cl.hill_intervals(pc.VecPoly([[0.3], [0.4]]).potential())
    assert h.x0 == -math.inf and h.x1 == math.inf and not h.bounded


def test_constant_above_one_has_no_interval():
    with pytest.raises(NoHillInterval):
        cl.hill_intervals(pc.VecPoly([[1.2], [0.0]]).potential())


def test_family_interval_zero_one():
    v = pc.pencil(0, 1, (0, 0, 1, 1)).potential()
    hs = [h for h in cl.hill_intervals(v) if h.x0 >= -1e-12]
    assert hs[0].x0 == pytest.approx(0, abs=1e-12) and hs[0].x1 == pytest.approx(1, rel=1e-12)


def test_endpoints_have_unit_potential():
    v = pc.pencil(1, 1, (0, 0, 1, 1)).potential()
    for h in cl.hill_intervals(v):
        if h.bounded:
            for x in (h.x0, h.x1):
                assert np.polynomial.polynomial.polyval(x, v) == pytest.approx(1, abs=1e-10)


@pytest.mark.parametrize("a,b", [(0, 1), (1, 1), (2, -0.5), (-1, 3)])
def test_base_polynomial_has_equilibrium_at_zero(a, b):
    eq = cl.equilibria(pc.base_poly(a, b))
    assert any(abs(x) < 1e-12 for x in eq)


def test_equilibria_of_parabola():
    assert cl.equilibria(pc.VecPoly([[1, 0, -1], [0, 0, 0]])) == [0.0]


def test_equilibria_of_small_constant():
    assert cl.equilibria(pc.VecPoly([[0.5], [0.0]])) == []


def test_candidate_is_homoclinic():
    p = pc.base_poly(1, 1)
    h = [h for h in cl.hill_intervals(p.potential()) if abs(h.x0) < 1e-12][0]
    assert cl.classify_geodesic(p, h) is GT.HOMOCLINIC


def test_constant_is_line():
    p = pc.VecPoly([[0.3], [0.4]])
    assert cl.classify_geodesic(p, cl.hill_intervals(p.potential())[0]) is GT.LINE


def test_parabola_right_half_is_homoclinic():
    p = pc.VecPoly([[1, 0, -1], [0, 0, 0]])
    h = cl.hill_intervals(p.potential())[1]
    assert cl.classify_geodesic(p, h) is GT.HOMOCLINIC


def test_simple_endpoints_are_periodic():
    p = pc.VecPoly([[0, 1], [0, 0]])  # V = x^2 on [-1, 1]
    (h,) = cl.hill_intervals(p.potential())
    assert cl.classify_geodesic(p, h) is GT.PERIODIC


def test_heteroclinic_turn_back():
    # P1 = (3x - x^3)/2 takes the values -1 and +1 at the equilibria -1, 1
    p = pc.VecPoly([[0, 1.5, 0, -0.5], [0, 0, 0, 0]])
    h = [h for h in cl.hill_intervals(p.potential()) if h.bounded and h.x0 < 0 < h.x1][0]
    assert (h.mult0, h.mult1) == (2, 2)
    assert cl.classify_geodesic(p, h) is GT.TURNBACK


def test_heteroclinic_direct():
    # P1 = 1 - (1 - x^2)^2 equals 1 at both equilibria
    p = pc.VecPoly([[0, 0, 2, 0, -1], [0, 0, 0, 0, 0]])
    h = [h for h in cl.hill_intervals(p.potential()) if h.bounded and h.x0 < 0.5 < h.x1][0]
    assert cl.classify_geodesic(p, h) is GT.DIRECT


def test_interval_outside_hill_region_rejected():
    p = pc.VecPoly([[0, 1], [0, 0]])
    with pytest.raises(InvalidInterval):
        cl.classify_geodesic(p, cl.HillInterval(-2.0, 2.0, 0, 0))


def test_abnormal_direction_examples():
    np.testing.assert_allclose(cl.abnormal_directions(0, 1, 0.0), [1, 0])
    np.testing.assert_allclose(cl.abnormal_directions(0, 1, 0.5), np.array([1, 1]) / math.sqrt(2))
    with pytest.raises(ZeroGradient):
        cl.abnormal_directions(1, 0, 0.0)


@given(a=st.floats(-3, 3), b=st.floats(-3, 3), x=st.floats(-3, 3))
def test_abnormal_direction_is_unit_and_orthogonal(a, b, x):
    grad = np.array([-2 * x, b + 2 * a * x])
    assume(np.hypot(*grad) > 1e-6)
    v = cl.abnormal_directions(a, b, x)
    assert np.linalg.norm(v) == pytest.approx(1, rel=1e-12)
    assert abs(v @ grad) <= 1e-12 * max(1, np.linalg.norm(grad))


pencil_points = st.tuples(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.2, 3), st.floats(-2, 2),
                          st.sampled_from([1, -1]))


@given(pencil_points)
def test_pencil_momenta_are_homoclinic_never_heteroclinic(args):
    a, b, t, e, br = args
    assume(abs(a) + abs(b) > 1e-2)
    assume(pc.in_domain(a, b, t, e, br, margin=1e-3))
    p = pc.pencil(a, b, (1 - t, 0, t, e))
    for h in cl.hill_intervals(p.potential()):
        kind = cl.classify_geodesic(p, h)
        assert kind not in (GT.DIRECT, GT.TURNBACK)
    xm, xp = pc.theta_coords(a, b, t, e).roots
    lo, hi = (0.0, xp) if br == 1 else (xm, 0.0)
    (h,) = [h for h in cl.hill_intervals(p.potential())
            if abs(h.x0 - lo) < 1e-9 and abs(h.x1 - hi) < 1e-9]
    assert cl.classify_geodesic(p, h) is GT.HOMOCLINIC
    x_plus = max(r for r, _ in pc.real_roots(cl.one_minus(p.potential())))
    if br == 1:
        assert x_plus == pytest.approx(pc.x_plus_formula(a, b, t, e), abs=1e-10)
