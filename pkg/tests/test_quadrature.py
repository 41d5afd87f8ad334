import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from calibrix.errors import QuadratureFailure
from calibrix.quadrature import GAUSS, KRONROD, NODES, gauss_kronrod, piecewise_integral


def test_rule_weights():
    assert KRONROD.sum() == pytest.approx(2.0, abs=1e-15)
    assert GAUSS.sum() == pytest.approx(2.0, abs=1e-15)
    # the Gauss part integrates degree 13 exactly, Kronrod degree 22
    assert GAUSS @ NODES**12 == pytest.approx(2 / 13, rel=1e-14)
    assert KRONROD @ NODES**22 == pytest.approx(2 / 23, rel=1e-13)


def test_vector_integrand_many_intervals():
    a = np.array([0.0, 1.0, -2.0])
    b = np.array([np.pi, 3.0, 2.0])
    vals, _ = gauss_kronrod(lambda z: np.vstack([np.sin(z), np.exp(z)]), a, b)
    assert vals[0] == pytest.approx(np.cos(a) - np.cos(b), abs=1e-13)
    assert vals[1] == pytest.approx(np.exp(b) - np.exp(a), rel=1e-13)


def test_degenerate_interval_is_zero():
    vals, _ = gauss_kronrod(lambda z: np.vstack([np.ones_like(z)]), [1.0], [1.0])
    assert vals[0, 0] == 0.0


def test_kink_needs_splitting():
    f = lambda z: np.vstack([np.abs(z - 0.3)])  # noqa: E731
    exact = 0.5 * (0.3**2 + 0.7**2)
    assert piecewise_integral(f, 0.0, 1.0, [0.3])[0] == pytest.approx(exact, abs=1e-15)
    # adaptive bisection also converges without the break, just slower
    assert piecewise_integral(f, 0.0, 1.0, [])[0] == pytest.approx(exact, abs=1e-12)


def test_failure_is_reported():
    with pytest.raises(QuadratureFailure):
        gauss_kronrod(lambda z: np.vstack([1 / np.sqrt(np.abs(z - 0.1234567))]), [0.0], [1.0], max_rounds=6)


@given(c=st.floats(1e-3, 0.05), lo=st.floats(-0.1, 0.0), hi=st.floats(0.0, 0.1))
def test_asinh_primitive(c, lo, hi):
    val = piecewise_integral(lambda z: np.vstack([c / np.hypot(c, z)]), lo, hi, [])[0]
    assert val == pytest.approx(c * (np.arcsinh(hi / c) - np.arcsinh(lo / c)), rel=1e-11, abs=1e-15)
