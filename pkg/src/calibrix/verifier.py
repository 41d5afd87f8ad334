"""Numerical certification of the calibration conditions.

The checks only use the :class:`~calibrix.fields.LayeredField` interface
(``evaluate``, ``interfaces``, ``region_bounds``, ``bound``, ``graph``,
``sheets``, ``jump_interval``, ``jump_target``), so model fields, chart
fields and physical views are verified by the same code.

Condition (a) is checked weakly: the net flux through small boxes must
vanish, both for boxes inside one region and for boxes cut by exactly one
interface.  Face integrals are split exactly at the interfaces in ``z`` and
use the composite midpoint rule across, so the flux error decays like
``n^-2`` and is removed by Richardson extrapolation.
"""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .quadrature import gauss_kronrod, piecewise_integral

log = logging.getLogger(__name__)

CONDITIONS = ("DivFree", "InterfaceContinuity", "Bound_b", "Graph_c", "Slice_d", "Jump_e")

DEFAULT_TOLERANCES = {
    "div_free": 1e-6,  # |flux| / area, relative to the field scale
    "continuity_order": 1.9,
    "normal_jump": 1e-6,
    "bound_b": 1e-12,
    "graph_c": 1e-10,
    "slice_d": 1e-9,  # relative to bound^2
    "jump_e": 1e-8,
}

GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
FLUX_LEVELS = (8, 16, 32)


def worker_count():
    try:
        return max(1, int(os.environ.get("CALIBRIX_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    items = list(items)
    n = worker_count()
    if n == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class BoxSpec:
    """Axis-aligned box ``center +- half_widths`` in ``(x, y, z)``."""

    center: tuple
    half_widths: tuple
    straddles: bool = False

    @property
    def area(self):
        a, b, c = self.half_widths
        return 8 * (a * b + a * c + b * c)


@dataclass
class ConditionResult:
    name: str
    passed: bool
    residual: float
    tolerance: float
    worst_point: list
    samples: int
    detail: dict = field(default_factory=dict)

    def as_dict(self):
        return asdict(self)


@dataclass
class VerificationReport:
    results: dict
    params: dict
    seed: int
    timing: dict = field(default_factory=dict)

    @property
    def verified(self):
        return all(self.results[c].passed for c in CONDITIONS)

    @property
    def failed(self):
        return [c for c in CONDITIONS if not self.results[c].passed]

    @property
    def verdict(self):
        return "CALIBRATION_VERIFIED" if self.verified else f"FAILED({','.join(self.failed)})"


def _point(*coords):
    return [float(c) for c in coords]


# -- boxes ---------------------------------------------------------------

def _room(fld, x, y):
    (cx, cy), (hx, hy) = fld.center, fld.half_widths
    return min(hx - abs(x - cx), hy - abs(y - cy))


def _count_inside(fld, xs, ys, zlo, zhi):
    ints = fld.interfaces(xs, ys)
    return ((ints >= zlo) & (ints <= zhi)).sum(axis=0)


def _fit_box(fld, x, y, zc, hz, expect, hb0):
    """Shrink the horizontal size until the box sees ``expect`` interfaces."""
    g = np.linspace(-1, 1, 7)
    gx, gy = np.meshgrid(g, g)
    hb = hb0
    for _ in range(24):
        n = _count_inside(fld, x + hb * gx.ravel(), y + hb * gy.ravel(), zc - hz, zc + hz)
        if np.all(n == expect):
            return hb
        hb *= 0.5
    return None


def generate_boxes(fld, n_xy=12, seed=0):
    """Boxes inside each region/gap and across each interface over ``n_xy`` sites."""
    xs, ys = fld.sample_xy(n_xy, seed=seed + 101)
    boxes = []
    for x, y in zip(xs, ys):
        room = _room(fld, x, y)
        if room <= 0:
            continue
        hb0 = min(0.9 * room, 0.25 * min(fld.half_widths))
        edges = np.sort(np.asarray(fld.interfaces(x, y), float).ravel())
        gaps = np.diff(edges)
        span = edges[-1] - edges[0]
        cells = [(edges[0] - 0.1 * span, edges[0])] + list(zip(edges[:-1], edges[1:])) + [(edges[-1], edges[-1] + 0.1 * span)]
        for za, zb in cells:
            if zb - za <= 0:
                continue
            zc, hz = 0.5 * (za + zb), 0.25 * (zb - za)
            hb = _fit_box(fld, x, y, zc, hz, 0, hb0)
            if hb is not None:
                boxes.append(BoxSpec((x, y, zc), (hb, hb, hz), False))
        for k, e in enumerate(edges):
            below = gaps[k - 1] if k > 0 else 0.1 * span
            above = gaps[k] if k < len(gaps) else 0.1 * span
            hz = 0.4 * min(below, above)
            if hz <= 0:
                continue
            hb = _fit_box(fld, x, y, e, hz, 1, hb0)
            if hb is not None:
                boxes.append(BoxSpec((x, y, e), (hb, hb, hz), True))
    return boxes


def _z_pieces(fld, xs, ys, zlo, zhi):
    """Gauss nodes/weights in ``z`` split at the interfaces over each point."""
    ints = np.clip(fld.interfaces(xs, ys), zlo, zhi)
    br = np.sort(np.vstack([np.full((1, xs.size), zlo), ints, np.full((1, xs.size), zhi)]), axis=0)
    a, b = br[:-1].T, br[1:].T  # (npts, npieces)
    half = 0.5 * (b - a)
    z = 0.5 * (a + b)[..., None] + half[..., None] * GL_NODES
    w = half[..., None] * GL_WEIGHTS
    return z, w


def box_flux(fld, box, n):
    """Net outward flux through ``box`` with ``n`` midpoint cells per side."""
    (xc, yc, zc), (ax, ay, az) = box.center, box.half_widths
    t = (2 * np.arange(n) + 1) / n - 1
    flux = 0.0
    scale = 0.0
    for s in (-1.0, 1.0):
        # x = const faces
        ys = yc + ay * t
        xs = np.full(n, xc + s * ax)
        z, w = _z_pieces(fld, xs, ys, zc - az, zc + az)
        px, _, _ = fld.evaluate(xs[:, None, None], ys[:, None, None], z)
        flux += s * (ay * 2 / n) * np.sum(px * w)
        scale = max(scale, np.abs(px).max())
        # y = const faces
        xs = xc + ax * t
        ys = np.full(n, yc + s * ay)
        z, w = _z_pieces(fld, xs, ys, zc - az, zc + az)
        _, py, _ = fld.evaluate(xs[:, None, None], ys[:, None, None], z)
        flux += s * (ax * 2 / n) * np.sum(py * w)
        scale = max(scale, np.abs(py).max())
        # z = const faces
        X, Y = np.meshgrid(xc + ax * t, yc + ay * t)
        _, _, pz = fld.evaluate(X, Y, zc + s * az)
        flux += s * (4 * ax * ay / n**2) * np.sum(pz)
        scale = max(scale, np.abs(pz).max())
    return flux, scale


def _flux_study(fld, box):
    f = [box_flux(fld, box, n) for n in FLUX_LEVELS]
    vals = np.array([v for v, _ in f])
    scale = max(1.0, max(s for _, s in f))
    extrap = vals[2] + (vals[2] - vals[1]) / 3
    d1, d2 = abs(vals[0] - vals[1]), abs(vals[1] - vals[2])
    floor = 1e-12 * scale * box.area
    order = np.inf if d2 <= floor else (np.log2(d1 / d2) if d1 > 0 else 0.0)
    return extrap, scale, order, vals


def check_divergence(fld, boxes, tol=DEFAULT_TOLERANCES["div_free"]):
    """Weak divergence: Richardson-extrapolated box fluxes must vanish.

    Returns the DivFree record and the per-box convergence orders used by
    :func:`check_interface_continuity`.
    """
    studies = _pmap(lambda b: _flux_study(fld, b), boxes)
    rel = np.array([abs(e) / b.area / s for (e, s, _, _), b in zip(studies, boxes)])
    k = int(np.argmax(rel)) if rel.size else 0
    orders = [o for (_, _, o, _), b in zip(studies, boxes) if b.straddles]
    worst = boxes[k].center if boxes else (np.nan,) * 3
    rec = ConditionResult(
        "DivFree",
        bool(rel.size and rel.max() <= tol),
        float(rel.max()) if rel.size else float("nan"),
        tol,
        _point(*worst),
        len(boxes),
        {
            "interior_boxes": sum(not b.straddles for b in boxes),
            "straddling_boxes": sum(b.straddles for b in boxes),
            "levels": list(FLUX_LEVELS),
        },
    )
    return rec, orders


def _normal_jumps(fld, xs, ys):
    """``|[phi] . n| / |n|`` across every interface above each point."""
    step = 1e-6 * max(fld.half_widths)
    zs = np.asarray(fld.interfaces(xs, ys), float)
    dzx = (fld.interfaces(xs + step, ys) - fld.interfaces(xs - step, ys)) / (2 * step)
    dzy = (fld.interfaces(xs, ys + step) - fld.interfaces(xs, ys - step)) / (2 * step)
    eta = 1e-10 * np.maximum(1.0, np.abs(zs))
    X, Y = np.broadcast_to(xs, zs.shape), np.broadcast_to(ys, zs.shape)
    up = fld.evaluate(X, Y, zs + eta)
    dn = fld.evaluate(X, Y, zs - eta)
    jump = -(up[0] - dn[0]) * dzx - (up[1] - dn[1]) * dzy + (up[2] - dn[2])
    scale = np.maximum(1.0, np.max([np.abs(c) for c in up + dn], axis=0))
    return np.abs(jump) / np.sqrt(1 + dzx**2 + dzy**2) / scale, zs


def check_interface_continuity(fld, orders, n=256, seed=0, tol=DEFAULT_TOLERANCES["normal_jump"], order_tol=DEFAULT_TOLERANCES["continuity_order"]):
    """Flux convergence order on cut boxes plus pointwise normal-jump check."""
    xs, ys = fld.sample_xy(n, seed=seed + 202)
    jumps, zs = _normal_jumps(fld, xs, ys)
    k = np.unravel_index(int(np.argmax(jumps)), jumps.shape)
    finite = [o for o in orders if np.isfinite(o)]
    min_order = min(finite) if finite else float("inf")
    ok = bool(jumps.max() <= tol and min_order >= order_tol)
    return ConditionResult(
        "InterfaceContinuity",
        ok,
        float(jumps.max()),
        tol,
        _point(xs[k[1]], ys[k[1]], zs[k]),
        int(jumps.size),
        {
            "min_convergence_order": min_order,
            "order_tolerance": order_tol,
            "boxes_at_roundoff": len(orders) - len(finite),
            "boxes_with_order": len(finite),
        },
    )


# -- pointwise conditions ------------------------------------------------

def _z_samples(fld, xs, ys, per_point, seed):
    """Region midpoints plus uniform random heights over the support window."""
    lo, hi = fld.region_bounds(xs, ys)
    mids = 0.5 * (lo + hi)
    slo, shi = lo.min(axis=0), hi.max(axis=0)
    pad = 0.1 * (shi - slo)
    rng = np.random.default_rng(seed)
    u = rng.random((per_point, xs.size))
    rand = slo - pad + u * (shi - slo + 2 * pad)
    return np.vstack([mids, rand])


def check_bound_b(fld, n=2000, per_point=16, seed=0, tol=DEFAULT_TOLERANCES["bound_b"]):
    xs, ys = fld.sample_xy(n, seed=seed + 303)
    zs = _z_samples(fld, xs, ys, per_point, seed + 304)
    X, Y = np.broadcast_to(xs, zs.shape), np.broadcast_to(ys, zs.shape)
    px, py, pz = fld.evaluate(X, Y, zs)
    res = (px**2 + py**2 - 4 * pz) / np.maximum(1.0, 4 * np.abs(pz))
    k = np.unravel_index(int(np.argmax(res)), res.shape)
    return ConditionResult(
        "Bound_b",
        bool(res.max() <= tol),
        float(res.max()),
        tol,
        _point(X[k], Y[k], zs[k]),
        int(res.size),
        {"min_slack": float(-res.max())},
    )


def check_graph_c(fld, n=1000, seed=0, tol=DEFAULT_TOLERANCES["graph_c"]):
    xs, ys = fld.sample_xy(n, seed=seed + 404)
    keep = ys != 0
    xs, ys = xs[keep], ys[keep]
    z, expected = fld.graph(xs, ys)
    got = fld.evaluate(xs, ys, z)
    err = np.max([np.abs(g - e) for g, e in zip(got, expected)], axis=0)
    k = int(np.argmax(err))
    return ConditionResult(
        "Graph_c", bool(err.max() <= tol), float(err.max()), tol, _point(xs[k], ys[k], z[k]), int(xs.size)
    )


# -- slice condition -----------------------------------------------------

class _SlicePrimitive:
    """Cumulative ``z``-integral of the horizontal field over one vertical line."""

    def __init__(self, fld, x, y, nodes):
        self.fld, self.x, self.y = fld, x, y
        self.nodes = nodes
        vals, _ = gauss_kronrod(self._f, nodes[:-1], nodes[1:])
        self.cum = np.hstack([np.zeros((2, 1)), np.cumsum(vals, axis=1)])

    def _f(self, z):
        px, py, _ = self.fld.evaluate(self.x, self.y, z)
        return np.vstack([px, py])

    def __call__(self, z):
        z = np.clip(np.asarray(z, float), self.nodes[0], self.nodes[-1])
        i = np.clip(np.searchsorted(self.nodes, z, side="right") - 1, 0, self.nodes.size - 1)
        extra, _ = gauss_kronrod(self._f, self.nodes[i], z)
        return self.cum[:, i] + extra


def _slice_point(fld, x, y, grid=129, rounds=3, top=5, sub=9):
    lo, hi = (float(v) for v in fld.support(x, y))
    w_lo, w_hi = (float(v) for v in fld.sheets(x, y))
    pad = 0.05 * (hi - lo)
    base = np.linspace(min(lo, w_lo) - pad, max(hi, w_hi) + pad, grid)
    nodes = np.unique(np.concatenate([base, np.ravel(fld.interfaces(x, y)), [w_lo, w_hi]]))
    prim = _SlicePrimitive(fld, x, y, nodes)
    bound2 = float(fld.bound(x, y)) ** 2

    def rel(P1, P2):
        return ((P2[0] - P1[0]) ** 2 + (P2[1] - P1[1]) ** 2 - bound2) / bound2

    P = prim.cum
    d = rel(P[:, :, None], P[:, None, :])
    d[np.tril_indices(nodes.size, -1)] = -np.inf  # t1 <= t2 only
    flat = np.argsort(d, axis=None)[::-1][:top]
    cands = [(nodes[i], nodes[j], d[i, j]) for i, j in zip(*np.unravel_index(flat, d.shape))]
    spacing = base[1] - base[0]
    offs = np.linspace(-1, 1, sub)
    for _ in range(rounds):
        new = []
        for t1, t2, _ in cands:
            a = t1 + spacing * offs
            b = t2 + spacing * offs
            Pa, Pb = prim(a), prim(b)
            dd = rel(Pa[:, :, None], Pb[:, None, :])
            dd[a[:, None] > b[None, :]] = -np.inf
            i, j = np.unravel_index(int(np.argmax(dd)), dd.shape)
            new.append((a[i], b[j], dd[i, j]))
        cands = sorted(set(cands) | set(new), key=lambda c: -c[2])[:top]
        spacing /= 4
    best = cands[0]
    at_sheets = rel(prim([w_lo]), prim([w_hi]))[0]
    return {
        "x": float(x),
        "y": float(y),
        "max": float(best[2]),
        "argmax": (float(best[0]), float(best[1])),
        "at_sheets": float(at_sheets),
        "sheets": (w_lo, w_hi),
        "grid_step": float(base[1] - base[0]),
    }


def check_slice_d(fld, n=48, n_axis=8, seed=0, tol=DEFAULT_TOLERANCES["slice_d"], equality_tol=1e-7):
    """``max |I(t1, t2)|^2 - bound^2`` over a refined ``(t1, t2)`` grid.

    The field is ``(0, 0, 1)`` outside the support of the layers, so the
    horizontal primitive is constant there and the search window
    ``support +- 5%`` covers every pair ``t1 <= t2``.  Near-equality
    (within ``equality_tol``) must occur only at ``(t1, t2) = (w-, w+)``;
    fields with ``strict_off_axis`` must stay strictly below the bound
    away from ``y = 0`` (they approach it continuously as ``y -> 0``).
    """
    xs, ys = fld.sample_xy(n, seed=seed + 505)
    ax, ay = fld.axis_points(n_axis)
    pts = list(zip(np.concatenate([xs, ax]), np.concatenate([ys, ay])))
    rows = _pmap(lambda p: _slice_point(fld, *p), pts)
    worst = max(rows, key=lambda r: r["max"])
    locus_ok = True
    off_axis_max = -np.inf
    for r in rows:
        if r["y"] != 0:
            off_axis_max = max(off_axis_max, r["max"])
        if r["max"] > -equality_tol:
            t1, t2 = r["argmax"]
            near = max(abs(t1 - r["sheets"][0]), abs(t2 - r["sheets"][1])) <= r["grid_step"]
            locus_ok &= near
    strict_ok = (not fld.strict_off_axis) or off_axis_max < 0
    equality_seen = max(r["at_sheets"] for r in rows if r["y"] == 0)
    ok = bool(worst["max"] <= tol and locus_ok and strict_ok)
    return ConditionResult(
        "Slice_d",
        ok,
        float(worst["max"]),
        tol,
        _point(worst["x"], worst["y"], *worst["argmax"]),
        len(rows),
        {
            "equality_locus_ok": bool(locus_ok),
            "off_axis_max": float(off_axis_max),
            "strict_off_axis": bool(fld.strict_off_axis),
            "axis_value_at_sheets": float(equality_seen),
        },
    )


def check_jump_e(fld, n=64, tol=DEFAULT_TOLERANCES["jump_e"]):
    xs, _ = fld.axis_points(n)
    err = np.zeros(xs.size)
    for k, x in enumerate(xs):
        t1, t2 = (float(v) for v in fld.jump_interval(x))
        tx, ty = (float(v) for v in fld.jump_target(x))

        def f(z, x=x):
            px, py, _ = fld.evaluate(x, 0.0, z)
            return np.vstack([px, py])

        ix, iy = piecewise_integral(f, t1, t2, fld.interfaces(x, 0.0))
        err[k] = max(abs(ix - tx), abs(iy - ty))
    k = int(np.argmax(err))
    return ConditionResult("Jump_e", bool(err.max() <= tol), float(err.max()), tol, _point(xs[k], 0.0), int(xs.size))


# -- orchestration -------------------------------------------------------

def verify(fld, tolerances=None, seed=0, n_boxes=12, n_bound=2000, n_graph=1000, n_slice=48, n_jump=64):
    """Run every check on ``fld``; returns a :class:`VerificationReport`."""
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    timing = {}
    results = {}

    t = time.perf_counter()
    boxes = generate_boxes(fld, n_boxes, seed)
    results["DivFree"], orders = check_divergence(fld, boxes, tol["div_free"])
    timing["DivFree"] = time.perf_counter() - t

    t = time.perf_counter()
    results["InterfaceContinuity"] = check_interface_continuity(
        fld, orders, seed=seed, tol=tol["normal_jump"], order_tol=tol["continuity_order"]
    )
    timing["InterfaceContinuity"] = time.perf_counter() - t

    steps = (
        ("Bound_b", lambda: check_bound_b(fld, n_bound, seed=seed, tol=tol["bound_b"])),
        ("Graph_c", lambda: check_graph_c(fld, n_graph, seed=seed, tol=tol["graph_c"])),
        ("Slice_d", lambda: check_slice_d(fld, n_slice, seed=seed, tol=tol["slice_d"])),
        ("Jump_e", lambda: check_jump_e(fld, n_jump, tol=tol["jump_e"])),
    )
    for name, run in steps:
        t = time.perf_counter()
        results[name] = run()
        timing[name] = time.perf_counter() - t
        log.info("%s: %s (residual %.3e)", name, "pass" if results[name].passed else "FAIL", results[name].residual)

    return VerificationReport(results, fld.describe(), seed, timing)
