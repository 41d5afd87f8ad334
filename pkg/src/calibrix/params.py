"""Scalar parameters of the calibration constructions and their constraints."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConstraintViolation

# Auto-sized delta never exceeds this fraction of eps; the tube width
# eps - |y| then stays >= eps/2 and the tube integrands remain well scaled.
AUTO_DELTA_CAP = 0.5
BISECTION_STEPS = 40


@dataclass(frozen=True)
class ModelParams:
    """Parameters for ``w = x`` above / ``-x`` below, centred at ``(x0, 0)``."""

    x0: float
    eps: float
    delta: float
    h: float
    lam: float
    kappa: float
    b: float
    residuals: dict = field(default_factory=dict, compare=False)

    def as_dict(self):
        return {k: getattr(self, k) for k in ("x0", "eps", "delta", "h", "lam", "kappa", "b")}


@dataclass(frozen=True)
class ShiftedParams:
    """Parameters for ``w = x + 1`` above / ``x`` below."""

    x0: float
    eps: float
    delta: float
    h: float
    lam: float
    kappa: float
    b: float
    residuals: dict = field(default_factory=dict, compare=False)

    def as_dict(self):
        return {k: getattr(self, k) for k in ("x0", "eps", "delta", "h", "lam", "kappa", "b")}


@dataclass(frozen=True)
class GeneralParams:
    """Parameters of the construction in conformal coordinates.

    ``sign`` is +1 when the second tangential derivative at the origin is
    positive (characteristic circles centred left of ``u0``), -1 otherwise.
    """

    u0: float
    eps: float
    delta: float
    h: float
    lam: float
    a: float
    mu: float
    sign: int = 1
    residuals: dict = field(default_factory=dict, compare=False)

    def as_dict(self):
        return {k: getattr(self, k) for k in ("u0", "eps", "delta", "h", "lam", "a", "mu", "sign")}


def kappa_of(lam):
    return lam / 4 - 1 / lam


def _require(ok, name, detail=""):
    if not ok:
        raise ConstraintViolation(name, detail)


def _positive(**values):
    for k, v in values.items():
        _require(np.isfinite(v) and v > 0, f"{k} > 0", f"{k}={v!r}")


def _model_delta_bound(x0, eps, kappa):
    return np.inf if kappa == 0 else (x0 - 3 * eps) / (8 * abs(kappa))


def _shifted_delta_bound(eps, kappa):
    return np.inf if kappa == 0 else (1 - 6 * eps) / (10 * abs(kappa))


def _largest(predicate, cap):
    """Largest delta in (0, cap] with ``predicate`` true, by bisection."""
    if predicate(cap):
        return cap
    lo, hi = 0.0, cap
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        raise ConstraintViolation("existence of an admissible delta")
    return lo


def derive_model_params(x0, eps, delta="auto"):
    """Derive ``h, lambda, kappa, b`` for the opposite-sign model.

    ``delta="auto"`` picks the largest admissible value (capped at
    ``AUTO_DELTA_CAP * eps``) satisfying the disjointness bound and the
    smallness of the correction ``|2 h f(y)| <= eps``.
    """
    _positive(x0=x0, eps=eps)
    _require(eps < x0 / 10, "0 < eps < x0/10", f"eps={eps}, x0={x0}")
    _require(eps < 1 / 32, "0 < eps < 1/32", f"eps={eps}")
    h = (x0 - 3 * eps) / 4
    lam = (1 - 4 * eps) / (2 * h)
    kappa = kappa_of(lam)
    dbound = _model_delta_bound(x0, eps, kappa)

    if isinstance(delta, str):
        if delta != "auto":
            raise ValueError(f"delta must be a number or 'auto', got {delta!r}")
        from .model_calibration import f_opposite

        def admissible(d):
            return d < eps and d < dbound and validate_f_smallness(
                ModelParams(x0, eps, d, h, lam, kappa, 2 * h + kappa * d),
                lambda y: f_opposite(y, eps, h),
            )

        delta = _largest(admissible, AUTO_DELTA_CAP * eps)

    _positive(delta=delta)
    _require(delta < eps, "0 < delta < eps", f"delta={delta}, eps={eps}")
    _require(delta < dbound, "delta bound (120)", f"delta={delta} >= {dbound}")
    b = 2 * h + kappa * delta
    residuals = {
        "eps < x0/10": x0 / 10 - eps,
        "eps < 1/32": 1 / 32 - eps,
        "delta < eps": eps - delta,
        "delta bound (120)": dbound - delta,
    }
    return ModelParams(x0, eps, delta, h, lam, kappa, b, residuals)


def derive_shifted_params(x0, eps, delta="auto"):
    """Parameters for the shifted model ``w = x + 1 | x``."""
    _positive(x0=x0, eps=eps)
    _require(eps < 1 / 24, "0 < eps < 1/24", f"eps={eps}")
    _require(eps < 1 / 32, "0 < eps < 1/32", f"eps={eps}")
    h = (1 - 6 * eps) / 5
    lam = (1 - 4 * eps) / (2 * h)
    kappa = kappa_of(lam)
    dbound = _shifted_delta_bound(eps, kappa)

    if isinstance(delta, str):
        if delta != "auto":
            raise ValueError(f"delta must be a number or 'auto', got {delta!r}")
        delta = _largest(lambda d: d < eps and d < dbound, AUTO_DELTA_CAP * eps)

    _positive(delta=delta)
    _require(delta < eps, "0 < delta < eps", f"delta={delta}, eps={eps}")
    _require(delta < dbound, "delta bound (120b)", f"delta={delta} >= {dbound}")
    b = x0 + 3 * eps + kappa * delta
    residuals = {
        "eps < 1/24": 1 / 24 - eps,
        "eps < 1/32": 1 / 32 - eps,
        "delta < eps": eps - delta,
        "delta bound (120b)": dbound - delta,
    }
    return ShiftedParams(x0, eps, delta, h, lam, kappa, b, residuals)


def validate_f_smallness(p, f_eval, n=10_000):
    """True iff ``sup |2 h f(y)| <= eps`` over a dense sample of ``|y| < delta``."""
    y = np.linspace(-p.delta, p.delta, n + 2)[1:-1]
    vals = np.abs(2 * p.h * np.asarray(f_eval(y), float))
    return bool(np.all(np.isfinite(vals)) and vals.max() <= p.eps)


def check_general_params(gp):
    """Validate the scalar constraints that do not need the frame."""
    _positive(eps=gp.eps, delta=gp.delta, h=gp.h, lam=gp.lam, mu=gp.mu)
    _require(gp.sign in (1, -1), "sign in {+1, -1}", f"sign={gp.sign}")
    _require(gp.delta < gp.eps, "0 < delta < eps", f"delta={gp.delta}, eps={gp.eps}")
    _require(2 * gp.eps <= gp.h, "2 eps <= h", f"eps={gp.eps}, h={gp.h}")
    if gp.sign > 0:
        _require(gp.a < gp.u0 - 11 * gp.delta, "a < u0 - 11 delta", f"a={gp.a}")
    else:
        _require(gp.a > gp.u0 + 11 * gp.delta, "a > u0 + 11 delta", f"a={gp.a}")
    return {
        "delta < eps": gp.eps - gp.delta,
        "2 eps <= h": gp.h - 2 * gp.eps,
        "a vs u0 -+ 11 delta": gp.sign * (gp.u0 - gp.a) - 11 * gp.delta,
    }
