import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from jetgeo import poly as pc
from jetgeo import quadrature as qd
from jetgeo.errors import InvalidInterval, NonIntegrable
from jetgeo.periodmap import period_map

P = np.polynomial.polynomial
DOUBLE_WELL = pc.VecPoly([[1, 0, -1], [0, 0, 0]]).potential()  # (1 - x^2)^2


def test_double_well_single_leg():
    f = qd.PhiIntegrand([0, 0, 1, 0, -1], DOUBLE_WELL, 0.0, math.sqrt(2))
    val, err = qd.integrate_phi(f)
    assert val[0] == pytest.approx(-math.sqrt(2) / 3, abs=1e-12)
    assert err[0] < 1e-10


def test_zero_numerator():
    val, _ = qd.integrate_phi(qd.PhiIntegrand([0.0], DOUBLE_WELL, 0.0, math.sqrt(2)))
    assert val[0] == 0


def _theta1_midpoint_oracle(a, b, tau, eta, panels=10**6):
    """x = x+ sin^2 u turns the leg [0, x+] into a smooth integral over [0, pi/2]."""
    A = a * a * eta * eta + tau * tau
    B = 2 * a * b * eta * eta
    C = 2 * tau - b * b * eta * eta
    r = np.roots([-A, -B, C])
    xp, xm = max(r.real), min(r.real)
    u = (np.arange(panels) + 0.5) * (0.5 * math.pi / panels)
    x = xp * np.sin(u) ** 2
    # G2 dphi = eta x (b + a x) dx / (x sqrt(A (x+ - x)(x - x-)))
    g = eta * (b + a * x) * 2 * xp * np.sin(u) / np.sqrt(A * xp * (x - xm))
    return float(np.sum(g) * (0.5 * math.pi / panels))


def test_theta1_against_midpoint_oracle():
    a, b, t, e = 1, 1, 1, 1
    nu = pc.PencilMomentum(t, e)
    G2 = pc.pencil(a, b, nu.nu).component(1)
    xp = pc.x_plus_formula(a, b, t, e)
    val, _ = qd.integrate_phi(qd.PhiIntegrand(G2, nu.poly(a, b).potential(), 0.0, xp))
    assert val[0] == pytest.approx(_theta1_midpoint_oracle(a, b, t, e), abs=1e-8)
    assert val[0] == pytest.approx(period_map(a, b, t, e).theta1, abs=1e-12)


def _mp_leg(num, v):
    """Leg [0, x+] in 30 digits; x is cancelled from N and 1 - V exactly and
    x+ is the high-precision root (a float endpoint would cost ~sqrt(eps))."""
    mp.mp.dps = 30
    q = [-c for c in v]
    q[0] += 1
    assert q[0] == 0 and q[1] == 0
    n_red = list(reversed(num[1:]))
    q_red = list(reversed(q[2:]))
    xp = max(r for r in mp.polyroots(q_red) if mp.im(r) == 0)
    f = lambda x: mp.polyval(n_red, x) / mp.sqrt(mp.polyval(q_red, x))
    return float(mp.quad(f, [0, xp]))


@pytest.mark.parametrize("num", [[0, 1], [0, 0, 1], [0, 1, 0, 1], [0, -2, 0.5, 0, 1]])
def test_homoclinic_leg_against_mpmath(num):
    v = pc.base_poly(1, 1).potential()
    xp = pc.x_plus_formula(1, 1, 1, 1)
    val, _ = qd.integrate_phi(qd.PhiIntegrand(num, v, 0.0, xp))
    assert val[0] == pytest.approx(_mp_leg(num, v), abs=1e-11)


def test_both_simple_endpoints():
    v = np.array([0, 0, 1.0])  # V = x^2, dphi = dx / sqrt(1 - x^2)
    val, _ = qd.integrate_phi(qd.PhiIntegrand([[1.0], [0, 0, 1.0]], v, -1.0, 1.0))
    np.testing.assert_allclose(val, [math.pi, math.pi / 2], atol=1e-12)


def test_double_and_simple_endpoint_generic_path():
    # 1 - V = x^2 (1 - x) has no theta form; int_0^1 x dphi = int dx / sqrt(1 - x) = 2
    v = np.array([1, 0, -1, 1.0])
    val, _ = qd.integrate_phi(qd.PhiIntegrand([0, 1.0], v, 0.0, 1.0))
    assert val[0] == pytest.approx(2, abs=1e-12)


def test_interior_leg_without_singularities():
    v = np.array([0, 0, 1.0])
    val, _ = qd.integrate_phi(qd.PhiIntegrand([1.0], v, -0.5, 0.5))
    assert val[0] == pytest.approx(2 * math.asin(0.5), abs=1e-13)


def test_numerator_must_vanish_at_double_root():
    f = qd.PhiIntegrand([1.0], DOUBLE_WELL, 0.0, 1.0)
    assert f.integrable() == [False]
    with pytest.raises(NonIntegrable):
        qd.integrate_phi(f)


def test_reversed_interval_rejected():
    with pytest.raises(InvalidInterval):
        qd.PhiIntegrand([1.0], DOUBLE_WELL, 1.0, 0.0)


def test_leg_outside_hill_region_rejected():
    with pytest.raises(InvalidInterval):
        qd.integrate_phi(qd.PhiIntegrand([1.0], np.array([0, 0, 1.0]), -2.0, 0.5))


def test_tolerance_from_environment(monkeypatch):
    monkeypatch.setenv("JETGEO_TOL", "1e-6")
    assert qd.default_tol() == 1e-6
    monkeypatch.setenv("JETGEO_TOL", "fast")
    with pytest.raises(ValueError):
        qd.default_tol()


def test_periodic_full_period():
    # V = x^2: x = sin t has period 2 pi = 2 int_{-1}^{1} dphi
    nu_poly = pc.VecPoly([[0, 1], [0, 0]])
    v = nu_poly.potential()
    val, _ = qd.integrate_phi(qd.PhiIntegrand([1.0], v, -1.0, 1.0))
    assert 2 * val[0] == pytest.approx(2 * math.pi, rel=1e-12)


def test_eta_zero_leg_has_no_second_component():
    nu = pc.PencilMomentum(1.0, 0.0)
    d = qd.delta_map(1, 1, nu, (0.1, 1.2))
    assert d.dy2 == 0 and d.dz2 == 0


def test_cost_identities():
    nu = pc.PencilMomentum(1.0, 1.0)
    d = qd.delta_map(1, 1, nu, (0.05, 0.3))
    assert d.cost_t == pytest.approx(d.dt - d.dy1, abs=1e-12)
    assert d.cost_y == pytest.approx(d.dy1 - d.dz1, abs=1e-12)


def test_divergent_components_on_leg_to_equilibrium():
    nu = pc.PencilMomentum(1.0, 1.0)
    d = qd.delta_map(1, 1, nu, (0.0, pc.x_plus_formula(1, 1, 1, 1)))
    assert d.dt == math.inf and d.dy1 == math.inf and d.dz1 == math.inf
    assert math.isfinite(d.dy2) and math.isfinite(d.cost_t) and math.isfinite(d.cost_y)


def test_half_loop_cost_is_single_leg_theta2():
    xp = pc.x_plus_formula(1, 1, 1, 1)
    d = qd.delta_map(1, 1, pc.PencilMomentum(1.0, 1.0), (0.0, xp))
    assert d.cost_y == pytest.approx(period_map(1, 1, 1, 1).theta2, abs=1e-8)


legs = st.tuples(st.floats(0.2, 3), st.floats(-1.5, 1.5), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))


@given(legs)
def test_additivity(args):
    t, e, s0, s1, s2 = args
    assume(pc.in_domain(1, 1, t, e, 1, margin=1e-2))
    xp = pc.x_plus_formula(1, 1, t, e)
    x0, x1, x2 = sorted(xp * s for s in (s0, s1, s2))
    assume(x0 > 1e-3 * xp)
    nu = pc.PencilMomentum(t, e)
    d01, d12, d02 = (qd.delta_map(1, 1, nu, leg) for leg in ((x0, x1), (x1, x2), (x0, x2)))
    for k in ("dt", "dy1", "dy2", "dz1", "dz2", "cost_t", "cost_y"):
        lhs = getattr(d01, k) + getattr(d12, k)
        assert lhs == pytest.approx(getattr(d02, k), abs=2e-10, rel=2e-10)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.2, 3), st.floats(-2, 2), st.floats(0, 1), st.floats(0, 1))
def test_cost_t_nonnegative(a, b, t, e, s0, s1):
    assume(abs(a) + abs(b) > 1e-2 and pc.in_domain(a, b, t, e, 1, margin=1e-2))
    xp = pc.x_plus_formula(a, b, t, e)
    lo, hi = sorted((xp * s0, xp * s1))
    d = qd.delta_map(a, b, pc.PencilMomentum(t, e), (lo, hi))
    assert d.cost_t >= -1e-12
