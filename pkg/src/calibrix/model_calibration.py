"""Calibrations for the two model candidates ``x | -x`` and ``x + 1 | x``.

Both live on the rectangle ``|x - x0| < eps, |y| < delta`` and use the
five-layer anatomy of :mod:`calibrix.fields`: rotational tubes around the two
sheets of the graph, two sheared bands carrying the vertical flux
``(0, lambda, lambda^2/4)`` and a flat band carrying the correction ``f(y)``
that cancels the horizontal flux of the tubes.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .fields import BandLayer, Kind, LayeredField, Region, TubeLayer
from .params import ModelParams, ShiftedParams
from .quadrature import piecewise_integral

ModelKind = Kind


class FieldValue(NamedTuple):
    phi_x: float
    phi_y: float
    phi_z: float


def alpha(y, eps):
    """Half-width ``sqrt(4 eps^2 - (eps - y)^2)`` of the graph tube at height ``y``."""
    y = np.asarray(y, float)
    rad = 4 * eps**2 - (eps - y) ** 2
    if np.any(rad < -1e-15 * eps**2):
        raise DomainError(f"alpha undefined for |y| > eps (eps={eps})")
    out = np.sqrt(np.maximum(rad, 0.0))
    return out[()] if out.ndim == 0 else out


def tube_mass(c, eps):
    """``int_0^{sqrt(4eps^2-c^2)} c / sqrt(t^2 + c^2) dt``."""
    c = np.asarray(c, float)
    return c * np.arcsinh(np.sqrt(np.maximum(4 * eps**2 - c**2, 0.0)) / c)


def f_opposite(y, eps, h):
    """Correction for the opposite-sign construction; vanishes at ``y = 0``."""
    y = np.asarray(y, float)
    return -(tube_mass(eps - y, eps) - tube_mass(eps + y, eps)) / h


def f_shifted(y, eps, h):
    """Correction for the shifted model (band of thickness ``h``)."""
    y = np.asarray(y, float)
    return -2 * (tube_mass(eps - y, eps) + tube_mass(eps + y, eps)) / h


class ModelField(LayeredField):
    """The piecewise calibration for one of the model candidates.

    ``band_vector`` overrides the value on ``A2``/``A4``; only meant for
    building deliberately broken fields in negative tests.
    """

    def __init__(self, params, kind=Kind.OPPOSITE, band_vector=None):
        self.params = params
        self.kind = Kind(kind)
        if self.kind is Kind.OPPOSITE and not isinstance(params, ModelParams):
            raise TypeError("opposite model needs ModelParams")
        if self.kind is Kind.SHIFTED and not isinstance(params, ShiftedParams):
            raise TypeError("shifted model needs ShiftedParams")
        lam = params.lam
        self.band_vector = band_vector if band_vector is not None else (0.0, lam, lam**2 / 4)
        self.center = (params.x0, 0.0)
        self.half_widths = (params.eps, params.delta)

    def f(self, y):
        p = self.params
        if self.kind is Kind.OPPOSITE:
            return f_opposite(y, p.eps, p.h)
        return f_shifted(y, p.eps, p.h)

    def layout(self, x, y):
        p = self.params
        eps, h, kappa, b = p.eps, p.h, p.kappa, p.b
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        one = np.ones_like(x)
        bp, bq, br = (v * one for v in self.band_vector)
        c_up, c_dn = eps - y, eps + y
        hw_up, hw_dn = alpha(y, eps), alpha(-y, eps)
        fy = self.f(y) * one
        if self.kind is Kind.OPPOSITE:
            return [
                TubeLayer(x, c_up, hw_up, 1.0, -1.0),
                BandLayer(b + kappa * y, b + kappa * y + h, bp, bq, br),
                BandLayer(-h * one, h * one, fy, 0 * one, one),
                BandLayer(-b + kappa * y - h, -b + kappa * y, bp, bq, br),
                TubeLayer(-x, c_dn, hw_dn, -1.0, 1.0),
            ]
        base = p.x0 + 3 * eps
        return [
            TubeLayer(x + 1, c_up, hw_up, 1.0, -1.0),
            BandLayer(b + kappa * y + 3 * h, b + kappa * y + 4 * h, bp, bq, br),
            BandLayer((base + 2 * h) * one, (base + 3 * h) * one, fy, 0 * one, one),
            BandLayer(b + kappa * y, b + kappa * y + h, bp, bq, br),
            TubeLayer(x, c_dn, hw_dn, 1.0, 1.0),
        ]

    def graph(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        up = y > 0
        if self.kind is Kind.OPPOSITE:
            z = np.where(up, x, -x)
            grad_x = np.where(up, 1.0, -1.0)
        else:
            z = np.where(up, x + 1, x)
            grad_x = np.ones_like(x)
        return z, (2 * grad_x, np.zeros_like(x), grad_x**2)

    def jump_interval(self, x):
        x = np.asarray(x, float)
        if self.kind is Kind.OPPOSITE:
            return np.minimum(-x, x), np.maximum(-x, x)
        return x, x + 1

    def describe(self):
        return {"construction": f"model/{self.kind.value}", **self.params.as_dict()}


def _field(params, kind):
    return ModelField(params, kind)


def classify(point, params, kind=Kind.OPPOSITE):
    x, y, z = point
    return Region(int(_field(params, kind).classify(x, y, z)))


def eval_field(point, params, kind=Kind.OPPOSITE):
    x, y, z = point
    return FieldValue(*(float(v) for v in _field(params, kind).evaluate(x, y, z)))


def f_model(y, params, kind=Kind.OPPOSITE):
    return _field(params, kind).f(y)


def slice_integral(x, y, t1, t2, params, kind=Kind.OPPOSITE, field=None):
    """``int_{t1}^{t2} (phi_x, phi_y)(x, y, z) dz`` by adaptive quadrature.

    The interval is split at every region boundary so each piece is smooth.
    """
    if t2 < t1:
        raise ValueError("slice_integral needs t1 <= t2")
    if t1 == t2:
        return 0.0, 0.0
    fld = field if field is not None else _field(params, kind)

    def integrand(z):
        px, py, _ = fld.evaluate(x, y, z)
        return np.vstack([px, py])

    ix, iy = piecewise_integral(integrand, t1, t2, fld.interfaces(x, y))
    return float(ix), float(iy)
