import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from jetgeo import periodmap as pm
from jetgeo import poly as pc
from jetgeo.errors import DomainError
from jetgeo.verify import load_reference


def test_eta_zero_family_value():
    pv = pm.period_map(1, 0, 1, 0)
    assert pv.theta1 == 0 and pv.theta3 == 0
    assert pv.theta2 == pytest.approx(-math.sqrt(2) / 3, rel=1e-10)
    assert pv.full_loop[1] == pytest.approx(-2 * math.sqrt(2) / 3, rel=1e-10)


@pytest.mark.parametrize("tau", [0.3, 1.0, 2.5])
def test_theta2_eta_zero_matches_quadrature(tau):
    for a, b in ((1, 0), (0, 1), (2, -1)):
        assert pm.period_map(a, b, tau, 0).theta2 == pytest.approx(pm.theta2_eta_zero(tau), rel=1e-9)


def test_frozen_reference_values():
    for row in load_reference()["period_map"]:
        pv = pm.period_map(row["a"], row["b"], row["tau"], row["eta"], row["branch"])
        assert np.allclose(pv.as_array(), row["theta"], rtol=0, atol=1e-9)
        assert pv.error_estimate < 1e-9


def test_even_family():
    for t, e in [(1, 1), (0.5, -0.7), (2, 1.5)]:
        assert np.allclose(pm.period_map(1, 0, t, e, 1).as_array(), pm.period_map(1, 0, t, e, -1).as_array(),
                           atol=1e-8)


def test_domain_errors():
    with pytest.raises(DomainError):
        pm.period_map(1, 1, -1, 0)
    with pytest.raises(DomainError):
        pm.period_map(0, 2, 1, 1)  # 2 tau - b^2 eta^2 < 0
    with pytest.raises(DomainError):
        pm.period_map(1, 1, 1, 1, branch=0)


# closed forms

def test_closed_form_examples():
    assert pm.period_map_closed_form(1, 0, 1, 1) == pytest.approx((math.sqrt(2) / 6, math.sqrt(2) / 3))
    assert pm.period_map_closed_form(0, 1, 1, 1) == pytest.approx((1 / 3, 1))
    assert pm.period_map_closed_form(1, 0, 1, 0) == pytest.approx((-math.sqrt(2) / 3, 0))


def test_closed_form_needs_one_family():
    for a, b in ((1, 1), (0, 0)):
        with pytest.raises(DomainError):
            pm.period_map_closed_form(a, b, 1, 1)


taus = st.floats(0.2, 3.0)
etas = st.floats(-2.0, 2.0)


@given(st.sampled_from([(1, 0), (0, 1), (-2, 0), (0, -0.5)]), taus, etas)
def test_closed_form_matches_quadrature(ab, tau, eta):
    a, b = ab
    assume(2 * tau - b * b * eta * eta > 1e-3)
    pv = pm.period_map(a, b, tau, eta)
    assert np.allclose([pv.theta2, pv.theta3], pm.period_map_closed_form(a, b, tau, eta), rtol=1e-8, atol=1e-10)


# symmetries

params = st.sampled_from([(1, 1), (1, -1), (2, 0.5), (-1, 2), (0, 1), (1, 0)])


@given(params, taus, etas, st.sampled_from([1, -1]))
def test_eta_reflection(ab, tau, eta, branch):
    a, b = ab
    assume(pc.in_domain(a, b, tau, eta, branch, margin=1e-3))
    p = pm.period_map(a, b, tau, eta, branch).as_array()
    m = pm.period_map(a, b, tau, -eta, branch).as_array()
    assert np.allclose(m, p * [-1, 1, -1], atol=1e-8)


@given(params, taus, etas)
def test_switch_symmetry_property(ab, tau, eta):
    a, b = ab
    assume(pc.in_domain(a, b, tau, eta, -1, margin=1e-3))
    assert pm.switch_symmetry_check(a, b, tau, eta)


def test_switch_examples():
    assert pm.switch_symmetry_check(1, 1, 1, 0.5)
    assert pm.switch_symmetry_check(1, 0, 1, 0.5)
    assert pm.switch_symmetry_check(0, 1, 1, 1)


@given(params, taus, etas)
def test_odd_components_vanish_only_at_eta_zero(ab, tau, eta):
    a, b = ab
    assume(pc.in_domain(a, b, tau, eta, 1, margin=1e-3))
    pv = pm.period_map(a, b, tau, eta)
    if eta == 0:
        assert pv.theta1 == 0 and pv.theta3 == 0
    else:
        assume(abs(eta) > 1e-6)
        assert pv.theta1 != 0 and pv.theta3 != 0


@given(taus, etas, st.sampled_from([1.0, -1.0, 0.5]))
def test_family_two_sign_split(tau, eta, b):
    assume(2 * tau - b * b * eta * eta > 1e-3 and abs(eta) > 1e-3)
    plus = pm.period_map(0, b, tau, eta, 1).theta1
    minus = pm.period_map(0, b, tau, eta, -1).theta1
    # positive exactly when b eta > 0
    assert math.copysign(1, plus) == math.copysign(1, b * eta)
    assert minus == pytest.approx(-plus, abs=1e-9)


# theta-coordinate forms

def test_rho_at_zero():
    r = pm.rho_suite(0.0)
    h = math.pi / 2
    assert (r.rho1, r.rho2, r.rho3, r.rho4, r.rho5, r.rho6) == pytest.approx((1, 4, h, -4, h, -1))
    assert r.disc == pytest.approx(6 * h * h - 16)
    assert r.disc < 0


def test_rho_at_one():
    r = pm.rho_suite(1.0)
    assert r.rho1 == 0
    assert all(math.isfinite(v) for v in (r.rho2, r.rho3, r.rho4, r.rho5, r.rho6))


def test_rho_array_and_domain():
    r = pm.rho_suite(np.linspace(-1, 1, 11))
    assert r.rho1.shape == (11,)
    with pytest.raises(DomainError):
        pm.rho_suite(1.5)


def test_sign_certificates():
    c = np.linspace(-1, 1, 1002)[1:-1]
    r = pm.rho_suite(c)
    assert np.all(r.rho1 > 0) and np.all(r.rho2 > 0) and np.all(r.rho3 > 0)
    assert np.all(pm.rho_suite(np.linspace(-1, 0, 1002)[1:-1]).disc < 0)


def general_points(a, b, n=10):
    g = pm.GridSpec(n_tau=n, n_eta=n, eta_range=(0.1, 2.0))
    return g.points(a, b)


@pytest.mark.parametrize("ab", [(1, 1), (-1, -2), (2, 0.5)])
def test_appendix_matches_quadrature(ab):
    a, b = ab
    for t, e in general_points(a, b):
        pv = pm.period_map(a, b, t, e)
        th = pc.theta_coords(a, b, t, e)
        for form in (pm.period_map_appendix, pm.period_map_trig):
            assert np.allclose(form(a, b, th), [pv.theta2, pv.theta3], rtol=1e-6, atol=1e-12)


def test_printed_sigmas_disagree():
    th = pc.theta_coords(1, 1, 1, 1)
    pv = pm.period_map(1, 1, 1, 1)
    printed = pm.period_map_appendix_printed(1, 1, th)
    assert abs(printed[0] - pv.theta2) > 1e-3


def test_appendix_near_boundary():
    # v2 -> 1 as 2 tau - b^2 eta^2 -> 0
    tau, eta = 1.0, math.sqrt(2) - 1e-6
    th = pc.theta_coords(1, 1, tau, eta)
    assert th.v2 > 0.99
    pv = pm.period_map(1, 1, tau, eta)
    assert np.allclose(pm.period_map_appendix(1, 1, th), [pv.theta2, pv.theta3], rtol=1e-6)


def test_appendix_sign_condition():
    th = pc.theta_coords(1, 1, 1, 1)
    assert th.v2 > 0
    with pytest.raises(DomainError):
        pm.period_map_appendix(1, -1, th)
    with pytest.raises(DomainError):
        pm.period_map_appendix(0, 1, th)


def fd(f, th, name, h=1e-6):
    up = pc.ThetaCoords(**{**dict(v1=th.v1, v2=th.v2, v3=th.v3), name: getattr(th, name) + h})
    dn = pc.ThetaCoords(**{**dict(v1=th.v1, v2=th.v2, v3=th.v3), name: getattr(th, name) - h})
    return (np.array(f(up)) - np.array(f(dn))) / (2 * h)


@pytest.mark.parametrize("ab", [(1, 1), (2, 0.5), (1, -1), (-2, 1)])
def test_derivative_formulas(ab):
    a, b = ab
    trig = lambda th: pm.period_map_trig(a, b, th)  # noqa: E731
    for t, e in general_points(a, b, 5):
        th = pc.theta_coords(a, b, t, e)
        d2, d3 = fd(trig, th, "v3")
        assert pm.dtheta2_dv3(a, b, th) == pytest.approx(d2, rel=1e-5)
        assert pm.dtheta2_dv3(a, b, th) < 0
        assert abs(d3) <= 1e-8
        if a * b > 0:
            assert pm.dtheta3_dv1(a, b, th) == pytest.approx(fd(trig, th, "v1")[1], rel=1e-5)
        else:
            assert pm.dtheta3_dv2(a, b, th) == pytest.approx(fd(trig, th, "v2")[1], rel=1e-5)


def test_f1_block_determinant():
    a, b, t, e, h = 1.0, 1.0, 1.0, 0.8, 1e-6

    def F1(t, e):
        th = pc.theta_coords(a, b, t, e)
        return np.array([th.v1, th.v2])

    J = np.column_stack([(F1(t + h, e) - F1(t - h, e)) / (2 * h), (F1(t, e + h) - F1(t, e - h)) / (2 * h)])
    assert pm.det_f1_block(a, b, t, e) == pytest.approx(np.linalg.det(J), rel=1e-6)


# Jacobian

def test_jacobian_examples():
    assert pm.jacobian_det(1, 0, 1, 1) == pytest.approx(1 / 3)
    assert pm.jacobian_det(0, 1, 1, 1) == pytest.approx(1.0)


@pytest.mark.parametrize("ab", [(1, 0), (0, 1)])
def test_jacobian_fd_agrees(ab):
    for t, e in pm.GridSpec(n_tau=6, n_eta=6).points(*ab):
        an = pm.jacobian_det(*ab, t, e)
        assert pm.jacobian_det(*ab, t, e, "finite_difference") == pytest.approx(an, rel=1e-4)


@pytest.mark.parametrize("ab", [(1, 1), (1, -1)])
def test_general_certificate(ab):
    for t, e in general_points(*ab, 4):
        cert = pm.jacobian_det(*ab, t, e)
        assert isinstance(cert, pm.JacobianCertificate)
        assert cert.nonzero
        assert cert.k == (1 if ab[0] * ab[1] > 0 else 2)
        assert abs(cert.composite_det) > 1e-10


def test_jacobian_errors():
    with pytest.raises(DomainError):
        pm.jacobian_det(1, 1, 1, -0.5)
    with pytest.raises(DomainError):
        pm.jacobian_det(0, 0, 1, 1)
    with pytest.raises(DomainError):
        pm.jacobian_det(1, 0, -1, 1, "finite_difference")
    with pytest.raises(ValueError):
        pm.jacobian_det(1, 0, 1, 1, "symbolic")


# sweeps and probes

SMALL = pm.GridSpec(n_tau=8, n_eta=9)


def test_grid_points_feasible():
    pts = SMALL.points(0, 1)
    assert pts and all(2 * t - e * e > SMALL.margin for t, e in pts)
    assert len(SMALL.points(1, 0)) == 8 * 9


def test_sweep_parallel_matches_serial():
    assert pm.sweep(1, 1, SMALL, workers=2) == pm.sweep(1, 1, SMALL)


def test_kdtree_pairs_match_brute_force():
    rng = np.random.default_rng(7)
    pts = np.round(rng.uniform(0, 1, (300, 3)), 2)
    tol = 0.015
    brute = sorted((i, j) for i in range(len(pts)) for j in range(i + 1, len(pts))
                   if np.max(np.abs(pts[i] - pts[j])) <= tol)
    assert pm._pairs_within(pts, tol) == brute
    d = [np.max(np.abs(pts[i] - pts[j])) for i in range(len(pts)) for j in range(i + 1, len(pts))]
    assert pm._min_distance(pts) <= min(d) + 1e-15


def test_injectivity_family_small_grid():
    rep = pm.injectivity_probe(1, 0, SMALL)
    assert rep.collisions == []
    assert rep.n_points == 72
    assert rep.min_image_distance > 1e-7
    assert set(rep.to_json_dict()) == {"collisions", "min_image_distance", "grid_spec", "n_points"}


def test_injectivity_reports_forced_collision():
    rep = pm.injectivity_probe(1, 0, SMALL, tol=10.0)
    assert len(rep.collisions) == 72 * 71 // 2


def test_reflection_pairs_share_theta2_only():
    for t, e in [(1.0, 0.5), (2.0, 1.2)]:
        p, m = pm.period_map(1, 1, t, e), pm.period_map(1, 1, t, -e)
        assert p.theta2 == pytest.approx(m.theta2, abs=1e-10)
        assert abs(p.theta1 - m.theta1) > 1e-3 and abs(p.theta3 - m.theta3) > 1e-3


def test_overlay_meets_only_on_axis():
    o = pm.overlay(1, 1, pm.GridSpec(n_tau=6, n_eta=7))
    assert o.matches and o.all_at_eta_zero
    assert o.min_offaxis_distance > 1e-7
