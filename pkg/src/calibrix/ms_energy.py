"""Mumford-Shah energy of grid functions with horizontal cracks.

Candidates are nodal values on a tensor grid.  Nodes lying on a crack
carry two values, one for the cell above and one for the cell below, so the
bilinear interpolant never differences across the crack.  The Dirichlet
term is integrated exactly for the bilinear interpolant on every cell.

The competitor used for the counterexample at the crack tip is
``psi = x * G(x, y)`` on ``Q = (-1, 1)^2`` with

    G = sign(y) * (J + (1 - J) * min(1, |y| / l)),   J = clip(2|x| - 1, 0, 1),

which equals ``w = x sign(y)`` on the boundary, jumps on ``y = 0`` only for
``|x| > 1/2`` and has bounded gradient.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Crack:
    """Segment ``{y = y_c, x_a <= x <= x_b}``."""

    y: float
    x_a: float
    x_b: float

    @property
    def length(self):
        return self.x_b - self.x_a


@dataclass(frozen=True)
class SbvCandidate:
    """Nodal values indexed ``[j, i]`` (``y`` then ``x``).

    ``upper[j, i]`` is the value seen by the cell above node ``(i, j)`` and
    ``lower[j, i]`` the one seen by the cell below; they differ only on cracks.
    """

    xs: np.ndarray
    ys: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    cracks: tuple = field(default_factory=tuple)

    def __post_init__(self):
        shape = (self.ys.size, self.xs.size)
        if self.lower.shape != shape or self.upper.shape != shape:
            raise ValueError("nodal arrays do not match the grid")
        if not (np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper))):
            raise ValueError("nodal values must be finite")
        for c in self.cracks:
            if not np.any(np.isclose(self.ys, c.y, rtol=0, atol=1e-12 * np.ptp(self.ys))):
                raise ValueError(f"crack at y={c.y} is not on a grid line")


@dataclass(frozen=True)
class EnergyBreakdown:
    dirichlet: float
    crack_length: float

    @property
    def total(self):
        return self.dirichlet + self.crack_length


def from_function(fn, bounds, n, cracks=()):
    """Sample ``fn(x, y, side)`` on an ``(n + 1)^2`` grid over ``bounds``.

    ``side`` is +1 for the trace from above and -1 from below; it only
    matters on crack nodes.
    """
    x0, x1, y0, y1 = bounds
    xs = np.linspace(x0, x1, n + 1)
    ys = np.linspace(y0, y1, n + 1)
    X, Y = np.meshgrid(xs, ys)
    upper = np.asarray(fn(X, Y, 1.0), float)
    lower = np.asarray(fn(X, Y, -1.0), float)
    on_crack = np.zeros(X.shape, bool)
    for c in cracks:
        on_crack |= np.isclose(Y, c.y, rtol=0, atol=1e-12 * (y1 - y0)) & (X >= c.x_a) & (X <= c.x_b)
    mid = np.asarray(fn(X, Y, 0.0), float)
    upper = np.where(on_crack, upper, mid)
    lower = np.where(on_crack, lower, mid)
    return SbvCandidate(xs, ys, lower, upper, tuple(cracks))


def evaluate(c):
    """Dirichlet energy of the bilinear interpolant plus total crack length."""
    if min(c.xs.size, c.ys.size) - 1 < 16:
        raise ValueError("grid resolution must be at least 16")
    dx = np.diff(c.xs)[None, :]
    dy = np.diff(c.ys)[:, None]
    u00 = c.upper[:-1, :-1]
    u10 = c.upper[:-1, 1:]
    u01 = c.lower[1:, :-1]
    u11 = c.lower[1:, 1:]
    b = u10 - u00
    cc = u01 - u00
    d = u11 - u10 - u01 + u00
    e = dy / dx * (b**2 + b * d + d**2 / 3) + dx / dy * (cc**2 + cc * d + d**2 / 3)
    return EnergyBreakdown(float(e.sum()), float(sum(k.length for k in c.cracks)))


def scale(c, eps):
    """The candidate ``eps * u(x / eps, y / eps)`` on the scaled grid."""
    cracks = tuple(Crack(eps * k.y, eps * k.x_a, eps * k.x_b) for k in c.cracks)
    return SbvCandidate(eps * c.xs, eps * c.ys, eps * c.lower, eps * c.upper, cracks)


def w_candidate(n, eps=1.0):
    """``w = x`` above and ``-x`` below the full crack, on ``Q_eps``."""

    def fn(x, y, side):
        s = np.where(y > 0, 1.0, np.where(y < 0, -1.0, side))
        return x * s

    return from_function(fn, (-eps, eps, -eps, eps), n, (Crack(0.0, -eps, eps),))


def competitor(x, y, side=0.0, zeta_scale=0.5):
    """``psi(x, y)``; ``side`` selects the trace on ``y = 0``."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    s = np.where(y > 0, 1.0, np.where(y < 0, -1.0, side))
    jump = np.clip(2 * np.abs(x) - 1, 0.0, 1.0)
    ramp = np.minimum(1.0, np.abs(y) / zeta_scale)
    return x * s * (jump + (1 - jump) * ramp)


def build_competitor(zeta_scale=0.5, n=256):
    if not zeta_scale > 0 or zeta_scale > 1:
        raise ValueError("zeta_scale must lie in (0, 1] so that psi = w on the boundary")
    if n % 4:
        raise ValueError("n must be divisible by 4 to align the kinks of psi with the grid")
    cracks = (Crack(0.0, -1.0, -0.5), Crack(0.0, 0.5, 1.0))
    return from_function(lambda x, y, s: competitor(x, y, s, zeta_scale), (-1, 1, -1, 1), n, cracks)


@dataclass(frozen=True)
class ConvergenceStudy:
    ns: tuple
    values: tuple
    order: float
    extrapolated: float


def competitor_energy(zeta_scale=0.5, ns=(128, 256, 512)):
    """Dirichlet energy of the competitor, Richardson-extrapolated over ``ns``."""
    vals = [evaluate(build_competitor(zeta_scale, n)).dirichlet for n in ns]
    e1, e2, e3 = vals
    if e2 == e3 or e1 == e2:
        return ConvergenceStudy(tuple(ns), tuple(vals), float("inf"), e3)
    p = float(np.log2(abs(e1 - e2) / abs(e2 - e3)))
    extrap = e3 + (e3 - e2) / (2**p - 1)
    return ConvergenceStudy(tuple(ns), tuple(vals), p, float(extrap))


@dataclass(frozen=True)
class SweepRow:
    eps: float
    ms_w: float
    ms_psi: float
    margin: float
    ms_psi_grid: float


@dataclass(frozen=True)
class Sweep:
    rows: tuple
    energy: ConvergenceStudy
    eps_star: float  # largest swept eps below which every margin is positive
    threshold: float  # 1 / (E - 4) when E > 4

    def csv_rows(self):
        return [(r.eps, r.ms_w, r.ms_psi, r.margin) for r in self.rows]


def counterexample_sweep(eps_list, zeta_scale=0.5, n=256):
    """Compare ``MS(w)`` and ``MS(psi_eps)`` on ``Q_eps`` for each ``eps``.

    ``ms_psi`` uses the scaling law ``eps^2 E + eps`` with the extrapolated
    energy; ``ms_psi_grid`` is the direct grid evaluation of the scaled
    candidate at resolution ``n``.
    """
    eps_list = sorted(float(e) for e in eps_list)
    if not eps_list or eps_list[0] <= 0:
        raise ValueError("eps values must be positive")
    study = competitor_energy(zeta_scale)
    base = build_competitor(zeta_scale, n)
    rows = []
    for e in eps_list:
        ms_w = 4 * e**2 + 2 * e
        ms_psi = e**2 * study.extrapolated + e
        grid = evaluate(scale(base, e)).total
        rows.append(SweepRow(e, ms_w, ms_psi, ms_w - ms_psi, grid))
    eps_star = 0.0
    for r in rows:
        if r.margin <= 0:
            break
        eps_star = r.eps
    E = study.extrapolated
    threshold = 1 / (E - 4) if E > 4 else float("inf")
    return Sweep(tuple(rows), study, eps_star, threshold)
