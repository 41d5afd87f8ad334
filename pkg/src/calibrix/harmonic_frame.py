"""Harmonic polynomials with vanishing normal derivative on the x-axis.

A harmonic ``u`` with ``u_y(x, 0) = 0`` is locally the real part of a power
series with real coefficients, ``u = Re F(x + iy)`` with
``F(p) = sum a_n p^n``.  The conjugate vanishing on the axis is then
``v = Im F`` and the conformal chart ``(u, v)`` is just ``F`` read as a map of
the plane; its local inverse is found by Newton's method on ``F``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import HypothesisError, NoConvergence
from .fields import Kind

NEWTON_MAX_ITER = 50
PATH_STEPS = 8


class HarmonicPoly:
    """``u(x, y) = sum a_n Re((x + iy)^n)`` for real coefficients ``a_n``."""

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=float))
        if c.ndim != 1 or c.size == 0 or not np.all(np.isfinite(c)):
            raise ValueError(f"bad coefficient list {coeffs!r}")
        self.coeffs = c
        self._d1 = P.polyder(c) if c.size > 1 else np.zeros(1)
        self._d2 = P.polyder(self._d1) if self._d1.size > 1 else np.zeros(1)

    def __repr__(self):
        return f"HarmonicPoly({self.coeffs.tolist()})"

    @staticmethod
    def _z(x, y):
        return np.asarray(x, float) + 1j * np.asarray(y, float)

    def F(self, p):
        return P.polyval(p, self.coeffs)

    def dF(self, p):
        return P.polyval(p, self._d1)

    def d2F(self, p):
        return P.polyval(p, self._d2)

    def u(self, x, y):
        return self.F(self._z(x, y)).real

    def v(self, x, y):
        return self.F(self._z(x, y)).imag

    def grad_u(self, x, y):
        d = self.dF(self._z(x, y))
        return d.real, -d.imag

    def grad_v(self, x, y):
        d = self.dF(self._z(x, y))
        return d.imag, d.real


def conjugate(poly):
    """The harmonic conjugate of ``poly`` that vanishes on ``y = 0``."""
    return poly.v


def parse_coeffs(text):
    return [float(t) for t in str(text).replace(" ", "").split(",") if t]


@dataclass
class Normalization:
    """Symmetries applied so that ``u0 > 0`` and ``u_x(0, 0) > 0``."""

    negated: bool = False
    reflected: bool = False

    def as_dict(self):
        return {"negated": self.negated, "reflected_x": self.reflected}


def normalize(coeffs, kind):
    """Reduce to the orientation assumed by the construction.

    Negating ``u`` maps the opposite-sign candidate to its negative and
    reflecting ``x -> -x`` maps minimizers to minimizers, so both are free.
    """
    c = np.asarray(coeffs, float).copy()
    norm = Normalization()
    if Kind(kind) is Kind.OPPOSITE and c[0] < 0:
        c = -c
        norm.negated = True
    if c.size > 1 and c[1] < 0:
        c = c * (-1.0) ** np.arange(c.size)
        norm.reflected = True
    return c, norm


class Frame:
    """Chart ``Phi = (u, v)`` around the origin and derived quantities."""

    def __init__(self, poly):
        self.poly = poly if isinstance(poly, HarmonicPoly) else HarmonicPoly(poly)
        c = self.poly.coeffs
        self.u0 = float(c[0])
        self.ux0 = float(c[1]) if c.size > 1 else 0.0
        self.uxx0 = float(2 * c[2]) if c.size > 2 else 0.0

    def check_hypotheses(self, kind):
        if Kind(kind) is Kind.OPPOSITE and self.u0 == 0:
            raise HypothesisError("hypothesis u(0,0) != 0 fails")
        if self.ux0 == 0:
            raise HypothesisError("hypothesis u_x(0,0) != 0 fails")
        if self.uxx0 == 0:
            raise HypothesisError("hypothesis u_xx(0,0) != 0 fails")
        if self.ux0 < 0 or (Kind(kind) is Kind.OPPOSITE and self.u0 < 0):
            raise HypothesisError("frame is not normalized (need u(0,0) > 0, u_x(0,0) > 0)")

    # physical -> chart
    def phi(self, x, y):
        w = self.poly.F(HarmonicPoly._z(x, y))
        return w.real, w.imag

    def grad_u(self, x, y):
        return self.poly.grad_u(x, y)

    def grad_v(self, x, y):
        return self.poly.grad_v(x, y)

    def tau_u(self, x, y):
        gx, gy = self.grad_u(x, y)
        n2 = gx**2 + gy**2
        return gx / n2, gy / n2

    def tau_v(self, x, y):
        gx, gy = self.grad_v(x, y)
        n2 = gx**2 + gy**2
        return gx / n2, gy / n2

    # chart -> physical
    def psi_inverse(self, u, v, seed=(0.0, 0.0), tol=1e-13):
        """Solve ``Phi(x, y) = (u, v)`` by Newton continuation from ``seed``."""
        F, dF = self.poly.F, self.poly.dF
        target = np.asarray(u, float) + 1j * np.asarray(v, float)
        p = np.full(target.shape, complex(seed[0], seed[1]))
        scale = np.maximum(1.0, np.abs(target))
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            start = F(p)
            iters = 0
            for k in range(1, PATH_STEPS + 1):
                goal = start + (k / PATH_STEPS) * (target - start)
                for _ in range(2):
                    p = p - (F(p) - goal) / dF(p)
                    iters += 1
            while iters < NEWTON_MAX_ITER:
                res = F(p) - target
                step = res / dF(p)
                p = p - step
                iters += 1
                if np.all(np.abs(res) <= tol * scale) and np.all(np.abs(step) <= 1e-15 * np.maximum(1, np.abs(p))):
                    break
            res = np.abs(F(p) - target)
        bad = ~np.isfinite(res) | (res > 1e-12 * scale)
        if np.any(bad):
            raise NoConvergence(f"chart inversion failed at {np.count_nonzero(bad)} point(s)")
        return p.real, p.imag

    def gamma(self, u, v):
        """Metric factor ``1 / |grad u|`` at ``Psi(u, v)``."""
        x, y = self.psi_inverse(u, v)
        return 1.0 / np.abs(self.poly.dF(x + 1j * y))

    def gamma_axis(self, u):
        """``gamma(u, 0)``; the preimage lies on the real axis."""
        u = np.asarray(u, float)
        x, _ = self.psi_inverse(u, np.zeros_like(u))
        return 1.0 / np.abs(self.poly.dF(x + 0j))

    def dpsi(self, u, v):
        """Derivative of the inverse: returns ``(d_u xi, d_v xi, d_u eta, d_v eta)``."""
        x, y = self.psi_inverse(u, v)
        d = 1.0 / self.poly.dF(x + 1j * y)
        return d.real, -d.imag, d.imag, d.real

    def d_uv_eta_axis(self, u):
        """Mixed derivative of ``eta`` on the axis, ``Re Psi''``."""
        x, _ = self.psi_inverse(u, np.zeros_like(np.asarray(u, float)))
        p = x + 0j
        return (-self.poly.d2F(p) / self.poly.dF(p) ** 3).real


def sigma(gp, frame, u, v):
    """Amplitude of the band field; constant on circles about ``(a, 0)``."""
    r = np.hypot(np.asarray(u, float) - gp.a, np.asarray(v, float))
    return 0.5 * frame.gamma_axis(gp.a + gp.sign * r) - 2 * gp.eps


def beta(gp, frame, u, v, sig=None):
    """Closed-form characteristic solution of the band-shift transport problem.

    Along circles about ``(a, 0)`` the transport operator is ``d/dtheta``,
    so ``beta = (mu - 1) r theta / (lambda sigma(r))`` with ``beta = 0`` on
    the axis.
    """
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    r = np.hypot(u - gp.a, v)
    theta = np.arctan2(v, gp.sign * (u - gp.a))
    if sig is None:
        sig = sigma(gp, frame, u, v)
    return (gp.mu - 1) * r * theta / (gp.lam * sig)
