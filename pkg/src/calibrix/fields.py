"""Piecewise vector fields on a horizontal domain times the real line.

Every calibration built in this package has the same anatomy: over each
point ``(x, y)`` of a planar domain the vertical line is cut into five
disjoint intervals ``A1 .. A5``.  Two of them are *tubes* around the graph
of the candidate, where the field rotates with unit speed around an axis
parallel to the graph; the other three are *bands* on which the field does
not depend on ``z``.  Outside all of them the field is ``(0, 0, 1)``.

``LayeredField`` holds that common logic (classification, evaluation, exact
``z``-primitives) and the hooks the verifier needs.  Concrete constructions
only describe their layout.  For chart fields ``x, y`` stand for the
conformal coordinates ``u, v``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np
from scipy.stats import qmc


class Kind(str, Enum):
    OPPOSITE = "opposite"  # w = u above, -u below
    SHIFTED = "shifted"  # w = u + 1 above, u below


class Region(IntEnum):
    OUTSIDE = 0
    A1 = 1
    A2 = 2
    A3 = 3
    A4 = 4
    A5 = 5


@dataclass
class TubeLayer:
    """``|z - center| < hw`` with ``hw = sqrt(4 eps^2 - c^2)``.

    Horizontal field ``(su * 2c / R, sv * 2 zeta / R)`` with
    ``zeta = z - center`` and ``R = hypot(c, zeta)``; vertical part 1.
    """

    center: np.ndarray
    c: np.ndarray
    hw: np.ndarray
    su: float
    sv: float

    @property
    def lo(self):
        return self.center - self.hw

    @property
    def hi(self):
        return self.center + self.hw

    def value(self, z):
        zeta = z - self.center
        r = np.hypot(self.c, zeta)
        return self.su * 2 * self.c / r, self.sv * 2 * zeta / r, np.ones_like(r)

    def primitive(self, z):
        zeta = np.clip(z, self.lo, self.hi) - self.center
        c = self.c
        p = self.su * 2 * c * (np.arcsinh(zeta / c) + np.arcsinh(self.hw / c))
        q = self.sv * 2 * (np.hypot(c, zeta) - np.hypot(c, self.hw))
        return p, q


@dataclass
class BandLayer:
    """``lo <= z < hi`` carrying a ``z``-independent vector ``(p, q, r)``."""

    lo: np.ndarray
    hi: np.ndarray
    p: np.ndarray
    q: np.ndarray
    r: np.ndarray

    def value(self, z):
        one = np.ones_like(z, dtype=float)
        return self.p * one, self.q * one, self.r * one

    def primitive(self, z):
        length = np.clip(z, self.lo, self.hi) - self.lo
        return self.p * length, self.q * length


def halton_points(n, seed, center, half_widths, shrink=1.0 - 1e-9):
    """Scrambled Halton points in an open axis-aligned rectangle."""
    sampler = qmc.Halton(d=2, scramble=True, seed=seed)
    pts = 2 * sampler.random(n) - 1
    x = center[0] + shrink * half_widths[0] * pts[:, 0]
    y = center[1] + shrink * half_widths[1] * pts[:, 1]
    return x, y


class LayeredField:
    """Base class; subclasses implement ``layout`` and the domain hooks.

    Conventions used by the verifier:

    * ``center``/``half_widths`` describe the working rectangle in the
      field's own horizontal coordinates;
    * ``bound(x, y)`` is the right-hand side of the slice condition
      (1 in physical space, the metric factor in a chart);
    * ``jump_interval(x)`` returns ``(w_minus, w_plus)`` on the jump line
      ``y = 0`` and ``jump_target(x)`` the expected slice integral there;
    * ``strict_off_axis`` says whether the slice bound may be attained only
      on the jump line (general construction) or on every line.
    """

    kind: Kind
    center: tuple
    half_widths: tuple
    strict_off_axis = False
    coords = ("x", "y", "z")

    def layout(self, x, y):
        raise NotImplementedError

    # -- evaluation ---------------------------------------------------
    def region_bounds(self, x, y):
        layers = self.layout(np.asarray(x, float), np.asarray(y, float))
        lo = np.stack([np.broadcast_to(L.lo, np.broadcast(x, y).shape) for L in layers])
        hi = np.stack([np.broadcast_to(L.hi, np.broadcast(x, y).shape) for L in layers])
        return lo, hi

    def classify(self, x, y, z):
        x, y, z = (np.asarray(a, float) for a in (x, y, z))
        layers = self.layout(x, y)
        tag = np.zeros(np.broadcast(x, y, z).shape, dtype=int)
        for k, L in enumerate(layers, start=1):
            tag = np.where((z >= L.lo) & (z < L.hi), k, tag)
        return tag

    def evaluate(self, x, y, z):
        """Field value, arrays broadcast over ``x, y, z``."""
        x, y, z = (np.asarray(a, float) for a in (x, y, z))
        shape = np.broadcast(x, y, z).shape
        layers = self.layout(x, y)
        out = [np.zeros(shape), np.zeros(shape), np.ones(shape)]
        for L in layers:
            inside = (z >= L.lo) & (z < L.hi)
            if not np.any(inside):
                continue
            vals = L.value(np.where(inside, z, L.lo))
            for i in range(3):
                out[i] = np.where(inside, vals[i], out[i])
        return tuple(out)

    def primitive(self, x, y, z):
        """Exact ``int_{-inf}^{z}`` of the horizontal components."""
        x, y, z = (np.asarray(a, float) for a in (x, y, z))
        shape = np.broadcast(x, y, z).shape
        px, py = np.zeros(shape), np.zeros(shape)
        for L in self.layout(x, y):
            p, q = L.primitive(z)
            px = px + p
            py = py + q
        return px, py

    def slice_exact(self, x, y, t1, t2):
        a = self.primitive(x, y, t1)
        b = self.primitive(x, y, t2)
        return b[0] - a[0], b[1] - a[1]

    def interfaces(self, x, y):
        lo, hi = self.region_bounds(x, y)
        return np.concatenate([lo, hi])

    def support(self, x, y):
        lo, hi = self.region_bounds(x, y)
        return lo.min(axis=0), hi.max(axis=0)

    # -- domain hooks -------------------------------------------------
    def sample_xy(self, n, seed=0):
        return halton_points(n, seed, self.center, self.half_widths)

    def contains(self, x, y):
        return (np.abs(np.asarray(x) - self.center[0]) < self.half_widths[0]) & (
            np.abs(np.asarray(y) - self.center[1]) < self.half_widths[1]
        )

    def axis_points(self, n):
        hx = self.half_widths[0] * (1 - 1e-9)
        x = np.linspace(self.center[0] - hx, self.center[0] + hx, n)
        return x, np.zeros_like(x)

    def bound(self, x, y):
        return np.ones(np.broadcast(x, y).shape)

    def graph(self, x, y):
        """Graph height and the expected field there, for ``y != 0``."""
        raise NotImplementedError

    def jump_interval(self, x):
        raise NotImplementedError

    def sheets(self, x, y):
        """Lower and upper graph heights ``(w-, w+)`` over ``(x, y)``."""
        lo, hi = self.jump_interval(np.asarray(x, float))
        shape = np.broadcast(x, y).shape
        return np.broadcast_to(lo, shape), np.broadcast_to(hi, shape)

    def jump_target(self, x):
        x = np.asarray(x, float)
        return np.zeros_like(x), self.bound(x, np.zeros_like(x))

    def describe(self):
        return {}
