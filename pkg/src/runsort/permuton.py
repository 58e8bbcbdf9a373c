"""The limiting runsort permuton.

The measure has density ``exp(y - 1)`` on the region left of the curve
``x = y exp(1 - y)`` and a line mass ``(1 - y) dy`` on the curve itself.
Rectangle masses are evaluated in closed form; the only numerical step is
inverting the curve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .perm import InvalidInputError

INVERSION_TOL = 1e-12


@dataclass(frozen=True)
class Rectangle:
    x1: float
    x2: float
    y1: float
    y2: float

    def __post_init__(self):
        if not (0 <= self.x1 <= self.x2 <= 1 and 0 <= self.y1 <= self.y2 <= 1):
            raise InvalidInputError(f"not a rectangle in the unit square: {self}")

    @classmethod
    def unit(cls):
        return cls(0.0, 1.0, 0.0, 1.0)


@dataclass(frozen=True)
class Mass:
    ac: float
    singular: float

    @property
    def total(self):
        return self.ac + self.singular

    def __float__(self):
        return float(self.total)


def _check_unit(a, name):
    a = np.asarray(a, dtype=float)
    if np.any(a < 0) or np.any(a > 1) or np.any(np.isnan(a)):
        raise InvalidInputError(f"{name} must lie in [0, 1]")
    return a


def curve_x(y):
    """Horizontal coordinate ``y e^(1-y)`` of the curve at height ``y``."""
    y = _check_unit(y, "y")
    out = y * np.exp(1.0 - y)
    return float(out) if out.ndim == 0 else out


def curve_inverse(x, tol=INVERSION_TOL, max_iter=200):
    """Height ``y`` in [0, 1] with ``y e^(1-y) = x``.

    Newton iteration kept inside a shrinking bracket; steps that leave the
    bracket are replaced by bisection.  The derivative vanishes at y = 1,
    where Newton alone only converges linearly.
    """
    x = _check_unit(x, "x")
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    lo = np.zeros_like(x)
    hi = np.ones_like(x)
    # rough start: x ~ y e near 0, x ~ 1 - (1-y)^2/2 near 1
    y = np.where(x < 0.5, x / np.e, 1.0 - np.sqrt(2.0 * (1.0 - x)))
    y = np.clip(y, 0.0, 1.0)
    step_tol = min(tol, 1e-15)
    for _ in range(max_iter):
        e = np.exp(1.0 - y)
        f = y * e - x
        lo = np.where(f <= 0, y, lo)
        hi = np.where(f >= 0, y, hi)
        fp = (1.0 - y) * e
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = y - f / fp
        bad = ~np.isfinite(cand) | (cand <= lo) | (cand >= hi)
        new = np.where(bad, 0.5 * (lo + hi), cand)
        new = np.where(f == 0, y, new)
        done = np.abs(new - y) <= step_tol
        y = new
        if done.all():
            break
    y[x == 0] = 0.0
    y[x == 1] = 1.0
    return float(y[0]) if scalar else y


def _curve_part(y, x1):
    # antiderivative of e^(y-1) (y e^(1-y) - x1) = y - x1 e^(y-1)
    return 0.5 * y * y - x1 * np.exp(y - 1.0)


def _line_part(y):
    return y - 0.5 * y * y


def rect_mass_components(x1, x2, y1, y2):
    """Vectorised (ac, singular) masses of ``[x1,x2] x [y1,y2]``."""
    x1, x2, y1, y2 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x1, x2, y1, y2)))
    a = np.asarray(curve_inverse(x1))
    b = np.asarray(curve_inverse(x2))
    # heights where the curve lies between x1 and x2
    lo = np.maximum(y1, a)
    hi = np.minimum(y2, b)
    on = hi > lo
    ac = np.where(on, _curve_part(hi, x1) - _curve_part(lo, x1), 0.0)
    sing = np.where(on, _line_part(hi) - _line_part(lo), 0.0)
    # heights where the curve is right of x2: full width x2 - x1
    lo2 = np.maximum(y1, b)
    flat = y2 > lo2
    ac = ac + np.where(flat, (x2 - x1) * (np.exp(y2 - 1.0) - np.exp(lo2 - 1.0)), 0.0)
    return ac, sing


def rect_mass(rect: Rectangle) -> Mass:
    ac, sing = rect_mass_components(rect.x1, rect.x2, rect.y1, rect.y2)
    return Mass(float(ac), float(sing))


def cdf(x, y):
    """Mass of ``[0, x] x [0, y]``; vectorised over broadcastable inputs."""
    x = _check_unit(x, "x")
    y = _check_unit(y, "y")
    ac, sing = rect_mass_components(0.0, x, 0.0, y)
    out = ac + sing
    return float(out) if np.ndim(out) == 0 else out


def grid_cdf(m: int) -> np.ndarray:
    """``(m+1) x (m+1)`` matrix with entry ``[i, j] = cdf(i/m, j/m)``."""
    if m < 1:
        raise InvalidInputError("m must be at least 1")
    t = np.arange(m + 1) / m
    return cdf(t[:, None], t[None, :])


class RunsortPermuton:
    """Object wrapper bundling the analytic measure's queries."""

    def __init__(self, inversion_tolerance=INVERSION_TOL):
        self.inversion_tolerance = inversion_tolerance
        self._grids = {}

    def curve_x(self, y):
        return curve_x(y)

    def curve_inverse(self, x):
        return curve_inverse(x, tol=self.inversion_tolerance)

    def rect_mass(self, rect: Rectangle) -> Mass:
        return rect_mass(rect)

    def cdf(self, x, y):
        return cdf(x, y)

    def grid_cdf(self, m: int) -> np.ndarray:
        if m not in self._grids:
            self._grids[m] = grid_cdf(m)
        return self._grids[m]
