import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from calibrix.errors import HypothesisError, NoConvergence
from calibrix.fields import Kind
from calibrix.harmonic_frame import Frame, HarmonicPoly, beta, conjugate, normalize, parse_coeffs, sigma
from calibrix.params import GeneralParams

coeff_lists = st.lists(st.floats(-2, 2, allow_nan=False), min_size=1, max_size=6)
small = st.floats(-0.3, 0.3)


def fd_laplacian(f, x, y, h=1e-3):
    return (f(x + h, y) + f(x - h, y) + f(x, y + h) + f(x, y - h) - 4 * f(x, y)) / h**2


@given(c=coeff_lists, x=small, y=small)
def test_harmonic_and_neumann(c, x, y):
    p = HarmonicPoly(c)
    scale = 1 + np.abs(c).sum()
    assert abs(fd_laplacian(p.u, x, y)) <= 1e-4 * scale
    h = 1e-6
    assert abs((p.u(x, h) - p.u(x, -h)) / (2 * h)) <= 1e-6 * scale  # d_y u(x, 0) = 0
    assert p.v(x, 0.0) == 0.0


@given(c=coeff_lists, x=small, y=small)
def test_cauchy_riemann(c, x, y):
    p = HarmonicPoly(c)
    v = conjugate(p)
    h = 1e-6
    scale = 1 + np.abs(c).sum()
    vx = (v(x + h, y) - v(x - h, y)) / (2 * h)
    vy = (v(x, y + h) - v(x, y - h)) / (2 * h)
    ux, uy = p.grad_u(x, y)
    assert vx == pytest.approx(-uy, abs=1e-6 * scale)
    assert vy == pytest.approx(ux, abs=1e-6 * scale)


def test_conjugate_examples():
    assert conjugate(HarmonicPoly([0, 1]))(0.3, 0.7) == pytest.approx(0.7)
    assert conjugate(HarmonicPoly([1, 1, 1]))(0.3, 0.7) == pytest.approx(0.7 + 2 * 0.3 * 0.7)
    assert conjugate(HarmonicPoly([5.0]))(0.3, 0.7) == 0.0


def test_parse_coeffs():
    assert parse_coeffs("1, 1,1") == [1.0, 1.0, 1.0]
    with pytest.raises(ValueError):
        HarmonicPoly([np.nan])


def test_psi_inverse_examples():
    x, y = Frame([0, 1]).psi_inverse(0.01, 0.005)
    assert (x, y) == pytest.approx((0.01, 0.005), abs=1e-15)
    fr = Frame([1, 1, 1])
    assert fr.psi_inverse(1.0, 0.0) == pytest.approx((0.0, 0.0), abs=1e-15)


def test_round_trip_and_gamma():
    fr = Frame([1, 1, 1])
    rng = np.random.default_rng(0)
    u = 1 + 0.01 * (2 * rng.random(1000) - 1)
    v = 0.01 * (2 * rng.random(1000) - 1)
    x, y = fr.psi_inverse(u, v)
    uu, vv = fr.phi(x, y)
    assert np.max(np.abs(uu - u)) <= 1e-10 and np.max(np.abs(vv - v)) <= 1e-10
    gx, gy = fr.grad_u(x, y)
    assert np.max(np.abs(fr.gamma(u, v) - 1 / np.hypot(gx, gy))) <= 1e-10
    assert fr.gamma(1.0, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert np.all(fr.gamma_axis(np.linspace(1.001, 1.01, 10)) < 1)
    assert Frame([0, 1]).gamma(0.3, 0.1) == pytest.approx(1.0)


def test_inversion_failure_is_reported():
    with pytest.raises(NoConvergence):
        Frame([0, 0, 1]).psi_inverse(-1.0, 0.0, seed=(0.0, 0.0))


def test_psi_jacobian_identity():
    fr = Frame([1, 1, 1, 0.4])
    rng = np.random.default_rng(1)
    h = 1e-6
    for u, v in zip(1 + 0.01 * rng.standard_normal(50), 0.01 * rng.standard_normal(50)):
        xi_u, xi_v, eta_u, eta_v = fr.dpsi(u, v)
        xp, yp = fr.psi_inverse(u + h, v)
        xm, ym = fr.psi_inverse(u - h, v)
        assert (xp - xm) / (2 * h) == pytest.approx(xi_u, abs=1e-6)
        assert (yp - ym) / (2 * h) == pytest.approx(eta_u, abs=1e-6)
        xp, yp = fr.psi_inverse(u, v + h)
        xm, ym = fr.psi_inverse(u, v - h)
        assert (xp - xm) / (2 * h) == pytest.approx(xi_v, abs=1e-6)
        assert (yp - ym) / (2 * h) == pytest.approx(eta_v, abs=1e-6)
        assert xi_u == pytest.approx(eta_v) and xi_v == pytest.approx(-eta_u)
        x, y = fr.psi_inverse(u, v)
        (ux, uy), (vx, vy) = fr.grad_u(x, y), fr.grad_v(x, y)
        n2 = ux**2 + uy**2
        assert np.array([[xi_u, xi_v], [eta_u, eta_v]]) == pytest.approx(np.array([[ux, vx], [uy, vy]]) / n2, abs=1e-12)


def test_axis_identities():
    fr = Frame([1, 1, 1, 0.4])
    h = 1e-4
    for u in np.linspace(0.99, 1.01, 7):
        eta = lambda a, b: fr.psi_inverse(a, b)[1]  # noqa: E731
        assert abs((eta(u + h, 0) - 2 * eta(u, 0) + eta(u - h, 0)) / h**2) <= 1e-6
        assert abs((eta(u, h) - 2 * eta(u, 0) + eta(u, -h)) / h**2) <= 1e-6
        # mixed derivative against -u_xx / u_x^3 at the preimage
        d_uv = (eta(u + h, h) - eta(u + h, -h) - eta(u - h, h) + eta(u - h, -h)) / (4 * h * h)
        assert d_uv == pytest.approx(fr.d_uv_eta_axis(u), abs=1e-6)
    assert fr.d_uv_eta_axis(1.0) == pytest.approx(-fr.uxx0 / fr.ux0**3)


def test_tangent_frame():
    fr = Frame([1, 1, 1])
    x, y = 0.013, -0.007
    tu, tv = np.array(fr.tau_u(x, y)), np.array(fr.tau_v(x, y))
    assert tu @ tv == pytest.approx(0, abs=1e-14)
    g = 1 / np.hypot(*fr.grad_u(x, y))
    assert np.linalg.norm(tu) == pytest.approx(g, rel=1e-10)
    assert np.linalg.norm(tv) == pytest.approx(g, rel=1e-10)


def test_hypotheses():
    with pytest.raises(HypothesisError, match=r"u\(0,0\)"):
        Frame([0, 1, 1]).check_hypotheses(Kind.OPPOSITE)
    Frame([0, 1, 1]).check_hypotheses(Kind.SHIFTED)
    with pytest.raises(HypothesisError, match="u_x"):
        Frame([1, 0, 1]).check_hypotheses(Kind.OPPOSITE)
    with pytest.raises(HypothesisError, match="u_xx"):
        Frame([1, 1]).check_hypotheses(Kind.OPPOSITE)


def test_normalization():
    c, n = normalize([-1, 1, 1], Kind.OPPOSITE)
    assert n.negated and n.reflected
    assert list(c) == [1, 1, -1]
    c, n = normalize([-1, 1, 1], Kind.SHIFTED)
    assert not n.negated and not n.reflected


GP = GeneralParams(u0=1.0, eps=0.005, delta=0.0025, h=0.246, lam=32.0, a=0.97, mu=70.0, sign=1)


def test_sigma_examples():
    fr = Frame([1, 1, 1])
    u = np.linspace(0.998, 1.002, 5)
    assert sigma(GP, fr, u, 0 * u) == pytest.approx(0.5 * fr.gamma_axis(u) - 2 * GP.eps, rel=1e-14)
    assert sigma(GP, Frame([0, 1]), 0.3, 0.1) == pytest.approx(0.5 - 2 * GP.eps)
    r, th = 0.031, np.array([-0.05, 0.07])
    s = sigma(GP, fr, GP.a + r * np.cos(th), r * np.sin(th))
    assert s[0] == pytest.approx(s[1], abs=1e-14)


def test_beta_examples():
    fr = Frame([1, 1, 1])
    assert np.all(beta(GP, fr, np.linspace(0.998, 1.002, 5), np.zeros(5)) == 0.0)
    from dataclasses import replace

    assert beta(replace(GP, mu=1.0), fr, 1.001, 0.002) == 0.0
    gp = replace(GP, mu=2.0, lam=4.0, a=0.0)
    r, th = 0.5, 0.1
    assert beta(gp, fr, r * np.cos(th), r * np.sin(th), sig=0.4) == pytest.approx(0.03125, rel=1e-14)


@pytest.mark.parametrize("sign, a, coeffs", [(1, 0.97, [1, 1, 1]), (-1, 1.03, [1, 1, -1])])
def test_beta_pde_residual(sign, a, coeffs):
    from dataclasses import replace

    gp = replace(GP, sign=sign, a=a)
    fr = Frame(coeffs)
    rng = np.random.default_rng(3)
    u = gp.u0 + gp.delta * (2 * rng.random(1000) - 1)
    v = gp.delta * (2 * rng.random(1000) - 1)
    h = 1e-6
    b = lambda uu, vv: beta(gp, fr, uu, vv)  # noqa: E731
    bu = (b(u + h, v) - b(u - h, v)) / (2 * h)
    bv = (b(u, v + h) - b(u, v - h)) / (2 * h)
    r = np.hypot(u - gp.a, v)
    res = gp.lam * sigma(gp, fr, u, v) * sign * (-v * bu + (u - gp.a) * bv) - (gp.mu - 1) * r
    assert np.max(np.abs(res)) <= 1e-8
