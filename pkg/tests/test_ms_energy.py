import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import dblquad

from calibrix.ms_energy import (
    Crack,
    build_competitor,
    competitor,
    competitor_energy,
    counterexample_sweep,
    evaluate,
    from_function,
    scale,
    w_candidate,
)

# Dirichlet energy of the competitor with l = 1/2, frozen from the
# independent quadrature in test_energy_matches_quadrature_oracle
E_FROZEN = 254 / 45


def _grad_sq(x, y, l=0.5):
    """|grad psi|^2 in the quadrant x, y > 0, written out by hand."""
    j = min(max(2 * x - 1, 0.0), 1.0)
    jx = 2.0 if 0.5 < x < 1 else 0.0
    r = min(1.0, y / l)
    ry = 1 / l if y < l else 0.0
    g = j + (1 - j) * r
    px = g + x * jx * (1 - r)
    py = x * (1 - j) * ry
    return px * px + py * py


def test_energy_matches_quadrature_oracle():
    total = 0.0
    for xa, xb in ((0, 0.5), (0.5, 1)):
        for ya, yb in ((0, 0.5), (0.5, 1)):
            v, _ = dblquad(lambda y, x: _grad_sq(x, y), xa, xb, ya, yb, epsabs=1e-13, epsrel=1e-12)
            total += v
    assert 4 * total == pytest.approx(E_FROZEN, rel=1e-10)


def test_constant_and_linear():
    c = from_function(lambda x, y, s: np.full_like(x, 3.0), (0, 1, 0, 1), 16)
    assert evaluate(c).total == 0.0
    c = from_function(lambda x, y, s: x, (0, 1, 0, 1), 32)
    assert evaluate(c).dirichlet == pytest.approx(1.0, rel=1e-13)


@settings(max_examples=30)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-2, 2))
def test_affine_energy_is_exact(a, b, c):
    cand = from_function(lambda x, y, s: a * x + b * y + c, (-1, 1, 0, 0.5), 16)
    assert evaluate(cand).dirichlet == pytest.approx((a * a + b * b), rel=1e-10, abs=1e-12)


def test_resolution_floor():
    c = from_function(lambda x, y, s: x, (0, 1, 0, 1), 8)
    with pytest.raises(ValueError):
        evaluate(c)


def test_crack_must_be_on_grid():
    with pytest.raises(ValueError):
        from_function(lambda x, y, s: x, (0, 1, 0, 1), 16, (Crack(0.03, 0, 1),))


def test_w_energy():
    for eps in (0.01, 0.3, 1.0):
        e = evaluate(w_candidate(256, eps)).total
        assert e == pytest.approx(4 * eps**2 + 2 * eps, rel=1e-2)


@settings(max_examples=20)
@given(st.floats(0.01, 2.0))
def test_scaling_law(eps):
    base = build_competitor(n=64)
    e1 = evaluate(base)
    es = evaluate(scale(base, eps))
    assert es.dirichlet == pytest.approx(eps**2 * e1.dirichlet, rel=1e-10)
    assert es.crack_length == pytest.approx(eps * e1.crack_length, rel=1e-12)


def test_competitor_boundary_trace_and_jump():
    t = np.linspace(-1, 1, 101)
    for x, y in ((t, np.ones_like(t)), (t, -np.ones_like(t)), (np.ones_like(t), t), (-np.ones_like(t), t)):
        w = x * np.sign(y)
        mask = y != 0
        assert np.allclose(competitor(x, y)[mask], w[mask], atol=1e-15)
    jump = competitor(t, 0.0, 1.0) - competitor(t, 0.0, -1.0)
    assert np.all(jump[np.abs(t) < 0.5] == 0)
    assert np.all(np.abs(jump[np.abs(t) > 0.5]) > 0)
    assert evaluate(build_competitor(n=64)).crack_length == 1.0


def test_competitor_validation():
    with pytest.raises(ValueError):
        build_competitor(zeta_scale=1.5)
    with pytest.raises(ValueError):
        build_competitor(n=66)


def test_convergence_study():
    s = competitor_energy()
    assert s.order == pytest.approx(2.0, abs=0.05)
    assert s.extrapolated == pytest.approx(E_FROZEN, rel=1e-8)
    assert all(v < E_FROZEN for v in s.values)


def test_sweep():
    sw = counterexample_sweep([0.01, 0.1, 0.5, 0.6, 0.7, 1.0])
    rows = {r.eps: r for r in sw.rows}
    assert rows[0.01].ms_w == pytest.approx(0.0204)
    assert sw.eps_star > 0
    assert rows[1.0].margin < 0
    assert sw.threshold == pytest.approx(1 / (E_FROZEN - 4), rel=1e-7)
    assert sw.eps_star < sw.threshold
    for r in sw.rows:
        assert r.margin == pytest.approx(r.ms_w - r.ms_psi)
        assert r.ms_psi_grid == pytest.approx(r.ms_psi, rel=1e-4)
    assert [len(t) for t in sw.csv_rows()] == [4] * len(sw.rows)
    with pytest.raises(ValueError):
        counterexample_sweep([0.0, 0.1])
