"""Calibration for ``w = +-u`` / ``u + 1 | u`` with ``u`` a harmonic polynomial.

The field is built in the conformal chart ``(u, v)`` and carried back by
``phi_phys = phi^u grad u + phi^v grad v + phi^z |grad u|^2 e_z``.  Compared
with the model case the sheared bands are replaced by bands following the
characteristic circles about ``(a, 0)``, which makes the slice functional
``d = |I|^2 - gamma^2`` strictly negative off the jump line.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import ConstraintViolation
from .fields import BandLayer, Kind, LayeredField, TubeLayer
from .harmonic_frame import Frame, HarmonicPoly, beta, normalize, sigma
from .model_calibration import tube_mass
from .params import GeneralParams, check_general_params
from .quadrature import piecewise_integral

log = logging.getLogger(__name__)

GRID = 64  # per side, for the chart-wide sizing checks
MU_HEADROOM = 1.05
MAX_HALVINGS = 30


class FrameFieldValue(NamedTuple):
    phi_u: float
    phi_v: float
    phi_z: float


def f_general(v, eps, h, kind):
    v = np.asarray(v, float)
    if Kind(kind) is Kind.OPPOSITE:
        return -(tube_mass(eps - v, eps) - tube_mass(eps + v, eps)) / h
    return -(tube_mass(eps - v, eps) + tube_mass(eps + v, eps)) / h


def _tube_hw(c, eps):
    return np.sqrt(np.maximum(4 * eps**2 - c**2, 0.0))


class GeneralField(LayeredField):
    """Chart-form calibration; horizontal coordinates are ``(u, v)``.

    For the shifted candidate the chart is built for ``u - u(0,0)`` and
    ``z_offset`` records the constant removed, so the physical field is
    the chart field translated by ``z_offset`` in ``z``.
    """

    strict_off_axis = True
    coords = ("u", "v", "z")

    def __init__(self, gp, frame, kind=Kind.OPPOSITE, z_offset=0.0, normalization=None):
        self.gp = gp
        self.frame = frame
        self.kind = Kind(kind)
        self.z_offset = float(z_offset)
        self.normalization = normalization
        self.center = (gp.u0, 0.0)
        self.half_widths = (gp.delta, gp.delta)

    # -- pieces ---------------------------------------------------------
    def sigma(self, u, v):
        return sigma(self.gp, self.frame, u, v)

    def beta(self, u, v, sig=None):
        return beta(self.gp, self.frame, u, v, sig)

    def f(self, v):
        return f_general(v, self.gp.eps, self.gp.h, self.kind)

    def band_vector(self, u, v, sig=None):
        gp = self.gp
        if sig is None:
            sig = self.sigma(u, v)
        r = np.hypot(u - gp.a, v)
        amp = gp.lam * sig / r
        return -gp.sign * amp * v, gp.sign * amp * (u - gp.a), gp.mu * np.ones_like(amp)

    def layout(self, u, v):
        gp = self.gp
        eps, h = gp.eps, gp.h
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        one = np.ones_like(u)
        sig = self.sigma(u, v)
        bet = self.beta(u, v, sig)
        p, q, r = self.band_vector(u, v, sig)
        thick = 1.0 / gp.lam
        c_up, c_dn = eps - v, eps + v
        hw_up, hw_dn = _tube_hw(c_up, eps), _tube_hw(c_dn, eps)
        fv = self.f(v) * one
        if self.kind is Kind.OPPOSITE:
            return [
                TubeLayer(u, c_up, hw_up, 1.0, -1.0),
                BandLayer(3 * h + bet, 3 * h + bet + thick, p, q, r),
                BandLayer(-h * one, h * one, fv, 0 * one, one),
                BandLayer(-3 * h + bet - thick, -3 * h + bet, p, q, r),
                TubeLayer(-u, c_dn, hw_dn, -1.0, 1.0),
            ]
        return [
            TubeLayer(u + 1, c_up, hw_up, 1.0, -1.0),
            BandLayer(5 * h + bet, 5 * h + bet + thick, p, q, r),
            BandLayer(2 * h * one, 4 * h * one, fv, 0 * one, one),
            BandLayer(h + bet, h + bet + thick, p, q, r),
            TubeLayer(u, c_dn, hw_dn, 1.0, 1.0),
        ]

    # -- verifier hooks -------------------------------------------------
    def bound(self, u, v):
        return self.frame.gamma(u, v)

    def graph(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        up = v > 0
        if self.kind is Kind.OPPOSITE:
            z = np.where(up, u, -u)
            return z, (np.where(up, 2.0, -2.0), np.zeros_like(u), np.ones_like(u))
        z = np.where(up, u + 1, u)
        return z, (2 * np.ones_like(u), np.zeros_like(u), np.ones_like(u))

    def jump_interval(self, u):
        u = np.asarray(u, float)
        if self.kind is Kind.OPPOSITE:
            return np.minimum(-u, u), np.maximum(-u, u)
        return u, u + 1

    def describe(self):
        d = {"construction": f"general/{self.kind.value}", **self.gp.as_dict()}
        d["coeffs"] = self.frame.poly.coeffs.tolist()
        d["z_offset"] = self.z_offset
        if self.normalization is not None:
            d["normalization"] = self.normalization.as_dict()
        return d

    def physical(self):
        return PhysicalView(self)


class PhysicalView(LayeredField):
    """The general calibration expressed in physical ``(x, y, z)``."""

    strict_off_axis = True

    def __init__(self, chart):
        self.chart = chart
        self.kind = chart.kind
        gp = chart.gp
        # largest square about the origin whose image stays in the chart square
        hw = gp.delta / abs(chart.frame.ux0)
        t = np.linspace(-1, 1, 65)
        for _ in range(60):
            bx = hw * np.concatenate([t, t, -np.ones_like(t), np.ones_like(t)])
            by = hw * np.concatenate([-np.ones_like(t), np.ones_like(t), t, t])
            u, v = chart.frame.phi(bx, by)
            if np.all(np.abs(u - gp.u0) < gp.delta) and np.all(np.abs(v) < gp.delta):
                break
            hw *= 0.95
        self.center = (0.0, 0.0)
        self.half_widths = (hw, hw)

    def _chart(self, x, y):
        return self.chart.frame.phi(x, y)

    def layout(self, x, y):
        raise NotImplementedError("physical view has no layers of its own")

    def region_bounds(self, x, y):
        u, v = self._chart(x, y)
        lo, hi = self.chart.region_bounds(u, v)
        return lo + self.chart.z_offset, hi + self.chart.z_offset

    def classify(self, x, y, z):
        u, v = self._chart(x, y)
        return self.chart.classify(u, v, np.asarray(z, float) - self.chart.z_offset)

    def evaluate(self, x, y, z):
        return eval_physical(self.chart, x, y, z)

    def primitive(self, x, y, z):
        u, v = self._chart(x, y)
        pu, pv = self.chart.primitive(u, v, np.asarray(z, float) - self.chart.z_offset)
        (ux, uy), (vx, vy) = self.chart.frame.grad_u(x, y), self.chart.frame.grad_v(x, y)
        return pu * ux + pv * vx, pu * uy + pv * vy

    def bound(self, x, y):
        return np.ones(np.broadcast(x, y).shape)

    def graph(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        fr = self.chart.frame
        u = fr.poly.u(x, y) + self.chart.z_offset
        ux, uy = fr.grad_u(x, y)
        up = y > 0
        if self.kind is Kind.OPPOSITE:
            sgn = np.where(up, 1.0, -1.0)
            z = sgn * u
        else:
            sgn = np.ones_like(x)
            z = np.where(up, u + 1, u)
        return z, (2 * sgn * ux, 2 * sgn * uy, ux**2 + uy**2)

    def jump_interval(self, x):
        x = np.asarray(x, float)
        u = self.chart.frame.poly.u(x, np.zeros_like(x)) + self.chart.z_offset
        if self.kind is Kind.OPPOSITE:
            return np.minimum(-u, u), np.maximum(-u, u)
        return u, u + 1

    def sheets(self, x, y):
        u = self.chart.frame.poly.u(x, y) + self.chart.z_offset
        if self.kind is Kind.OPPOSITE:
            return np.minimum(-u, u), np.maximum(-u, u)
        return u, u + 1

    def jump_target(self, x):
        x = np.asarray(x, float)
        return np.zeros_like(x), np.ones_like(x)

    def describe(self):
        return {**self.chart.describe(), "view": "physical"}


# -- module-level operations ----------------------------------------------

def eval_frame_field(gf, u, v, z):
    return FrameFieldValue(*(np.asarray(c)[()] for c in gf.evaluate(u, v, z)))


def eval_physical(gf, x, y, z):
    """Physical field ``(1/gamma^2)(phi^u tau_u + phi^v tau_v + phi^z e_z)``."""
    fr = gf.frame
    u, v = fr.phi(x, y)
    pu, pv, pz = gf.evaluate(u, v, np.asarray(z, float) - gf.z_offset)
    tux, tuy = fr.tau_u(x, y)
    tvx, tvy = fr.tau_v(x, y)
    g2 = fr.poly.dF(np.asarray(x, float) + 1j * np.asarray(y, float))
    inv_g2 = np.abs(g2) ** 2  # 1 / gamma^2
    return (
        inv_g2 * (pu * tux + pv * tvx),
        inv_g2 * (pu * tuy + pv * tvy),
        inv_g2 * pz,
    )


def slice_integral_general(gf, u, v, t1, t2):
    """``int_{t1}^{t2} (phi^u, phi^v) dz`` by piecewise adaptive quadrature."""
    if t2 < t1:
        raise ValueError("needs t1 <= t2")
    if t1 == t2:
        return 0.0, 0.0

    def integrand(z):
        pu, pv, _ = gf.evaluate(u, v, z)
        return np.vstack([pu, pv])

    iu, iv = piecewise_integral(integrand, t1, t2, gf.interfaces(u, v))
    return float(iu), float(iv)


def d_function(gf, u, v, s, t):
    """``|I(u, v, s, t)|^2 - gamma(u, v)^2`` from the exact primitives."""
    iu, iv = gf.slice_exact(u, v, s, t)
    return iu**2 + iv**2 - gf.frame.gamma(u, v) ** 2


@dataclass
class HessianResult:
    matrix: np.ndarray  # order (v, s, t)
    eigenvalues: np.ndarray
    minors: tuple  # d_vv, det of (v,t) block, full determinant
    negative_definite: bool
    gradient: np.ndarray
    value: float
    expected: dict

    def as_dict(self):
        return {
            "matrix": self.matrix.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "minors": list(self.minors),
            "negative_definite": self.negative_definite,
            "gradient": self.gradient.tolist(),
            "value": self.value,
            "expected": self.expected,
        }


def _fd_derivatives(fun, x0, steps):
    """Central-difference gradient and Hessian with one Richardson step."""

    def once(hs):
        n = len(x0)
        g = np.zeros(n)
        H = np.zeros((n, n))
        f0 = fun(x0)
        E = np.diag(hs)
        for i in range(n):
            fp, fm = fun(x0 + E[i]), fun(x0 - E[i])
            g[i] = (fp - fm) / (2 * hs[i])
            H[i, i] = (fp - 2 * f0 + fm) / hs[i] ** 2
            for j in range(i + 1, n):
                val = (
                    fun(x0 + E[i] + E[j])
                    - fun(x0 + E[i] - E[j])
                    - fun(x0 - E[i] + E[j])
                    + fun(x0 - E[i] - E[j])
                ) / (4 * hs[i] * hs[j])
                H[i, j] = H[j, i] = val
        return g, H

    g1, H1 = once(np.asarray(steps))
    g2, H2 = once(np.asarray(steps) / 2)
    return (4 * g2 - g1) / 3, (4 * H2 - H1) / 3


def closed_form_hessian_entries(gf, u0=None):
    """Closed forms for the Hessian entries at the critical point."""
    gp, fr = gf.gp, gf.frame
    u0 = gp.u0 if u0 is None else u0
    x = float(fr.psi_inverse(u0, 0.0)[0])
    p = x + 0j
    d1, d2 = fr.poly.dF(p).real, fr.poly.d2F(p).real
    d3 = np.polynomial.polynomial.polyval(p, np.polynomial.polynomial.polyder(fr.poly.coeffs, 3)).real if fr.poly.coeffs.size > 3 else 0.0
    g = 1 / abs(d1)  # gamma(u0, 0) = d_v eta(u0, 0)
    dug = -d2 / d1**3  # d_u d_v eta on the axis
    d2g2 = 2 * g**2 * (d3 / d1**3 - 2 * d2**2 / d1**4)
    A = u0 - gp.a
    eps = gp.eps
    sgn_st = 1.0 if gf.kind is Kind.OPPOSITE else -1.0
    return {
        "d_tt": 8 - 4 * g / eps,
        "d_ss": 8 - 4 * g / eps,
        "d_ts": 8 * sgn_st,
        "d_vt": -4 * (g - 4 * eps) / A,
        "d_vs": -4 * (g - 4 * eps) / A * sgn_st,
        "d_vv": -8 * eps * (g - 4 * eps) / A**2 + 2 * g * dug / A - d2g2,
        "d_uv_eta": dug,
        "gamma0": g,
    }


def hessian_check(gf, u0=None, step=None):
    """FD Hessian of ``d`` in ``(v, s, t)`` at ``(u0, 0, w-, w+)``."""
    gp = gf.gp
    u0 = gp.u0 if u0 is None else u0
    s0, t0 = (float(a) for a in gf.jump_interval(u0))
    h = 2e-3 * gp.eps if step is None else step

    def fun(p):
        return float(d_function(gf, u0, p[0], p[1], p[2]))

    x0 = np.array([0.0, s0, t0])
    grad, H = _fd_derivatives(fun, x0, [h, h, h])
    ev = np.linalg.eigvalsh(H)
    minors = (H[0, 0], H[0, 0] * H[2, 2] - H[0, 2] ** 2, float(np.linalg.det(H)))
    return HessianResult(
        matrix=H,
        eigenvalues=ev,
        minors=minors,
        negative_definite=bool(np.all(ev < 0)),
        gradient=grad,
        value=fun(x0),
        expected=closed_form_hessian_entries(gf, u0),
    )


# -- parameter sizing -----------------------------------------------------

def _chart_grid(u0, delta, n=GRID):
    s = (1 - 1e-9) * np.linspace(-1, 1, n)
    U, V = np.meshgrid(u0 + delta * s, delta * s, indexing="ij")
    return U.ravel(), V.ravel()


def chart_checks(gf, n=GRID):
    """Sizing conditions on an ``n x n`` chart sample; returns named margins."""
    gp, fr = gf.gp, gf.frame
    U, V = _chart_grid(gp.u0, gp.delta, n)
    gam = fr.gamma(U, V)
    _, _, _, dv_eta = fr.dpsi(U, V)
    sig = gf.sigma(U, V)
    lo, hi = gf.region_bounds(U, V)
    order = [4, 3, 2, 1, 0]  # A5 < A4 < A3 < A2 < A1 along z
    gaps = np.min([lo[order[k + 1]] - hi[order[k]] for k in range(4)], axis=0)
    s, t = gf.jump_interval(U)
    iv = gf.slice_exact(U, V, s, t)[1]
    return {
        "gamma > 128 eps": float(np.min(gam - 128 * gp.eps)),
        "d_v eta > 8 eps": float(np.min(dv_eta - 8 * gp.eps)),
        "mu >= lambda^2 sigma^2 / 4": float(np.min(gp.mu - gp.lam**2 * sig**2 / 4)),
        "regions disjoint": float(np.min(gaps)),
        "2 sigma <= gamma": float(np.min(gam - 2 * sig)),
        "full slice > 7/8 gamma": float(np.min(iv - 7 / 8 * gam)),
        "sigma > 0": float(np.min(sig)),
    }


def default_h(kind, u0, eps):
    if Kind(kind) is Kind.OPPOSITE:
        return (u0 - 3 * eps) / 4
    return (1 - 6 * eps) / 6


def _mu_for(gp, frame, n=GRID):
    U, V = _chart_grid(gp.u0, gp.delta, n)
    sig = sigma(gp, frame, U, V)
    return MU_HEADROOM * float(np.max(gp.lam**2 * sig**2 / 4))


def build_general(coeffs, kind=Kind.OPPOSITE, eps=None, delta=None, h=None, lam=None, mu=None, a=None):
    """Construct and size the calibration for the candidate built from ``u``.

    Unset parameters get defaults: ``eps = min(gamma0/200, u0/20)``,
    ``h`` from :func:`default_h`, ``lam = 8/h``, ``mu`` 5% above the
    pointwise bound, ``a`` bisected between ``12 delta`` and ``11 delta``
    from ``u0`` until the Hessian is negative definite, and ``delta``
    halved from ``eps/2`` until every chart-wide check holds.
    """
    kind = Kind(kind)
    c, norm = normalize(coeffs, kind)
    Frame(c).check_hypotheses(kind)
    z_offset = 0.0
    if kind is Kind.SHIFTED:
        z_offset = float(c[0])
        c = c.copy()
        c[0] = 0.0
    frame = Frame(HarmonicPoly(c))
    u0 = frame.u0
    sign = 1 if frame.uxx0 > 0 else -1
    gamma0 = 1.0 / abs(frame.ux0)
    if eps is None:
        eps = gamma0 / 200
        if kind is Kind.OPPOSITE:
            eps = min(eps, u0 / 20)
    if h is None:
        h = default_h(kind, u0, eps)
    if lam is None:
        lam = 8.0 / h
    auto_delta = delta is None
    delta = eps / 2 if auto_delta else float(delta)

    for _ in range(MAX_HALVINGS):
        try:
            gf = _size_for_delta(frame, kind, u0, sign, eps, delta, h, lam, mu, a, z_offset, norm)
            return gf
        except ConstraintViolation as exc:
            if not auto_delta:
                raise
            log.debug("delta=%g rejected: %s", delta, exc)
            delta /= 2
    raise ConstraintViolation("existence of an admissible chart size delta")


def _size_for_delta(frame, kind, u0, sign, eps, delta, h, lam, mu, a, z_offset, norm):
    def make(a_val, mu_val):
        gp = GeneralParams(u0=u0, eps=eps, delta=delta, h=h, lam=lam, a=a_val, mu=mu_val, sign=sign)
        if mu_val is None:
            gp = replace(gp, mu=_mu_for(gp, frame))
        return GeneralField(gp, frame, kind, z_offset, norm)

    if a is None:
        near, far = u0 - sign * 11 * delta, u0 - sign * 12 * delta
        gf = make(far, mu)
        if not hessian_check(gf).negative_definite:
            lo, hi = far, near
            for _ in range(40):
                mid = 0.5 * (lo + hi)
                if hessian_check(make(mid, mu)).negative_definite:
                    hi = mid
                    break
                lo = mid
            else:
                raise ConstraintViolation("negative definite Hessian for a within 11-12 delta of u0")
            gf = make(hi, mu)
            if not hessian_check(gf).negative_definite:
                raise ConstraintViolation("negative definite Hessian for a within 11-12 delta of u0")
    else:
        gf = make(float(a), mu)

    residuals = check_general_params(gf.gp)
    margins = chart_checks(gf)
    for name, m in margins.items():
        if not m > 0 and not (name == "mu >= lambda^2 sigma^2 / 4" and m >= 0):
            raise ConstraintViolation(name, f"margin {m:.3e} at delta={delta:.3e}")
    gf.gp = replace(gf.gp, residuals={**residuals, **margins})
    return gf
