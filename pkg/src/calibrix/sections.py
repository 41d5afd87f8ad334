"""Plot-ready data for the four section figures of the model construction.

Each function returns ``(columns, rows, meta)``; ``rows`` is a 2-d array so
the same data feeds the CSV writer and :mod:`calibrix.plotting`.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad

from .errors import DomainError
from .fields import Kind
from .model_calibration import ModelField, alpha

FIGURES = (1, 2, 3, 4)


def region_section(field, x=None, n=201):
    """Figure 1: the five ``z``-intervals over ``x = const`` as ``y`` varies."""
    (cx, cy), (hx, hy) = field.center, field.half_widths
    x = cx if x is None else x
    ys = np.linspace(cy - hy, cy + hy, n)[1:-1]
    lo, hi = field.region_bounds(np.full_like(ys, x), ys)
    cols = [field.coords[1]]
    for k in range(1, 6):
        cols += [f"A{k}_lo", f"A{k}_hi"]
    rows = np.column_stack([ys] + [v for k in range(5) for v in (lo[k], hi[k])])
    return cols, rows, {"x": float(x)}


def tube_arrows(params, z=None, n=25):
    """Figure 2: horizontal field of ``A1`` on the plane ``z = const``.

    The arrows circle the point ``(x, y) = (z, eps)`` with constant length 2.
    """
    eps = params.eps
    z = params.x0 if z is None else z
    g = np.linspace(-1, 1, n)
    X, Y = np.meshgrid(z + 2 * eps * g, eps + 2 * eps * g)
    X, Y = X.ravel(), Y.ravel()
    c = eps - Y
    zeta = z - X
    inside = (np.abs(c) < 2 * eps) & (zeta**2 + c**2 < 4 * eps**2) & (c > 0)
    X, Y, c, zeta = X[inside], Y[inside], c[inside], zeta[inside]
    r = np.hypot(c, zeta)
    rows = np.column_stack([X, Y, 2 * c / r, -2 * zeta / r])
    return ["x", "y", "phi_x", "phi_y"], rows, {"z": float(z), "center": [float(z), float(eps)], "radius": 2 * eps, "delta": params.delta}


def band_section(field, x=None, n=201):
    """Figure 3: the band ``A2`` over ``x = const`` and its normal flux match."""
    (cx, cy), (hx, hy) = field.center, field.half_widths
    x = cx if x is None else x
    ys = np.linspace(cy - hy, cy + hy, n)[1:-1]
    xs = np.full_like(ys, x)
    lo, hi = field.region_bounds(xs, ys)
    step = 1e-6 * hy
    slope = (field.region_bounds(xs, ys + step)[0][1] - field.region_bounds(xs, ys - step)[0][1]) / (2 * step)
    inside = field.evaluate(xs, ys, 0.5 * (lo[1] + hi[1]))
    # normal component of the band field across its lower face, (-slope, 1) direction
    normal_flux = -inside[1] * slope + inside[2]
    rows = np.column_stack([ys, lo[1], hi[1], normal_flux])
    return [field.coords[1], "A2_lo", "A2_hi", "normal_flux"], rows, {"x": float(x)}


def triangle(params, x=None, y=0.0, n=200):
    """Figure 4: boundary of ``T = {xi > x, eta < y, (eps - eta)^2 + (x - xi)^2 < 4 eps^2}``.

    Also returns the two line integrals equated by the divergence theorem
    on ``T``: ``int phi^y(xi, y, x) dxi`` over the top edge and
    ``int phi^x(x, eta, x) deta`` over the left edge.
    """
    eps = params.eps
    x = params.x0 if x is None else x
    if not -eps < y < 3 * eps:
        raise DomainError("y must lie in (-eps, 3 eps)")
    a = float(alpha(y, eps))
    left = np.column_stack([np.full(n, x), np.linspace(-eps, y, n)])
    top = np.column_stack([np.linspace(x, x + a, n), np.full(n, y)])
    th0 = np.arctan2(eps - y, a)
    th = np.linspace(th0, np.pi / 2, n)
    arc = np.column_stack([x + 2 * eps * np.cos(th), eps - 2 * eps * np.sin(th)])
    rows = np.vstack([left, top, arc])
    # integrals from the A1 formulas: phi^x = 2c/R, phi^y = -2 zeta/R
    c = eps - y
    top_int, _ = quad(lambda xi: -2 * (x - xi) / np.hypot(c, x - xi), x, x + a, epsabs=1e-14, epsrel=1e-13)
    meta = {
        "x": float(x),
        "y": float(y),
        "top_integral": float(top_int),
        "left_integral": 2 * (y + eps),
    }
    return ["xi", "eta"], rows, meta


def section_data(figure, params, kind=Kind.OPPOSITE, field=None, **kw):
    if figure not in FIGURES:
        raise ValueError(f"unknown figure {figure!r}; choose from {FIGURES}")
    fld = field if field is not None else ModelField(params, kind)
    if figure == 1:
        return region_section(fld, **kw)
    if figure == 2:
        return tube_arrows(params, **kw)
    if figure == 3:
        return band_section(fld, **kw)
    return triangle(params, **kw)
