"""Empirical permuton of a permutation and rectangle-distance estimates.

The measure of a permutation of size n spreads mass 1/n uniformly over
each cell ``[(i-1)/n, i/n] x [(p_i - 1)/n, p_i/n]``.  Grid CDFs are kept
as integer numerators over the common denominator ``n m^2`` so that grid
queries are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .perm import InvalidInputError, as_permutation
from .permuton import Rectangle


def _overlaps(lo_units, m, n):
    """Split cells ``[lo, lo + m]`` (units of 1/(n m)) across grid buckets of width n.

    Returns a list of ``(bucket, weight)`` array pairs, one per possible
    bucket offset; weights are integer overlap lengths (possibly 0).
    """
    first = lo_units // n
    span = -(-m // n) + 1
    out = []
    for t in range(span):
        b = first + t
        w = np.minimum(lo_units + m, (b + 1) * n) - np.maximum(lo_units, b * n)
        w = np.clip(w, 0, None)
        out.append((np.minimum(b, m - 1), w))
    return out


def cell_mass_counts(perm, m: int) -> np.ndarray:
    """``m x m`` integer matrix of cell masses times ``n m^2``.

    Entry ``[a, b]`` is the mass of ``[a/m, (a+1)/m] x [b/m, (b+1)/m]``
    multiplied by ``n m^2``.  Built by bucketing in O(n + m^2) for m <= n.
    """
    if m < 1:
        raise InvalidInputError("m must be at least 1")
    perm = np.asarray(perm, dtype=np.int64)
    n = perm.size
    k = np.arange(n, dtype=np.int64)
    xs = _overlaps(k * m, m, n)
    ys = _overlaps((perm - 1) * m, m, n)
    grid = np.zeros(m * m, dtype=np.int64)
    for bx, wx in xs:
        for by, wy in ys:
            grid += _weighted_bincount(bx * m + by, wx * wy, m * m)
    return grid.reshape(m, m)


def _weighted_bincount(idx, w, size):
    # float bincount is exact while the total weight stays below 2**53
    if int(w.sum()) >= 2**53:
        out = np.zeros(size, dtype=np.int64)
        np.add.at(out, idx, w)
        return out
    return np.bincount(idx, weights=w.astype(float), minlength=size).astype(np.int64)


def counts_to_cdf(counts: np.ndarray) -> np.ndarray:
    m = counts.shape[0]
    cdf = np.zeros((m + 1, m + 1), dtype=np.int64)
    cdf[1:, 1:] = counts.cumsum(axis=0).cumsum(axis=1)
    return cdf


@dataclass(frozen=True)
class DistanceEstimate:
    """Two-sided bracket ``lower <= d <= upper`` on the rectangle distance."""

    lower: float
    upper: float
    m: int
    corner_sup: float


class EmpiricalMeasure:
    """The permuton induced by a permutation's scaled plot."""

    def __init__(self, perm):
        self.perm = as_permutation(perm)
        self.n = self.perm.size
        self._cdf_num = {}

    def aligned_count(self, a1, a2, b1, b2) -> int:
        """``#{i : a1 < i <= a2, b1 < p_i <= b2}``; the mass of the grid-aligned
        rectangle ``[a1/n, a2/n] x [b1/n, b2/n]`` is this count over n."""
        i = np.arange(1, self.n + 1)
        sel = (i > a1) & (i <= a2) & (self.perm > b1) & (self.perm <= b2)
        return int(sel.sum())

    def rect_mass(self, rect: Rectangle) -> float:
        n = self.n
        lo = np.arange(n) / n
        hi = np.arange(1, n + 1) / n
        ox = np.clip(np.minimum(rect.x2, hi) - np.maximum(rect.x1, lo), 0, None)
        ylo = (self.perm - 1) / n
        yhi = self.perm / n
        oy = np.clip(np.minimum(rect.y2, yhi) - np.maximum(rect.y1, ylo), 0, None)
        return float(n * np.sum(ox * oy))

    def rect_mass_exact(self, x1, x2, y1, y2) -> Fraction:
        """Exact mass for rational corner coordinates."""
        x1, x2, y1, y2 = (Fraction(v) for v in (x1, x2, y1, y2))
        n = self.n
        total = Fraction(0)
        for k in range(max(0, math.floor(x1 * n) - 1), min(n, math.ceil(x2 * n) + 1)):
            ox = min(x2, Fraction(k + 1, n)) - max(x1, Fraction(k, n))
            if ox <= 0:
                continue
            v = int(self.perm[k])
            oy = min(y2, Fraction(v, n)) - max(y1, Fraction(v - 1, n))
            if oy > 0:
                total += n * ox * oy
        return total

    def grid_cdf_numerators(self, m: int):
        """Integer corner-CDF matrix and its common denominator ``n m^2``."""
        if m < 1:
            raise InvalidInputError("m must be at least 1")
        if m not in self._cdf_num:
            self._cdf_num[m] = counts_to_cdf(cell_mass_counts(self.perm, m))
        return self._cdf_num[m], self.n * m * m

    def grid_cdf(self, m: int) -> np.ndarray:
        num, den = self.grid_cdf_numerators(m)
        return num / den


def build_grid_cdf(measure: EmpiricalMeasure, m: int) -> np.ndarray:
    return measure.grid_cdf(m)


def grid_rect_sup(diff: np.ndarray) -> float:
    """Max over grid-corner rectangles of ``|inclusion-exclusion of diff|``.

    For fixed vertical edges ``j1 < j2`` the rectangle value is
    ``v[i2] - v[i1]`` with ``v = diff[:, j2] - diff[:, j1]``, so the best
    horizontal edges give ``max(v) - min(v)``.  O(m^3) instead of O(m^4).
    """
    best = 0.0
    for j1 in range(diff.shape[1] - 1):
        v = diff[:, j1 + 1:] - diff[:, j1:j1 + 1]
        best = max(best, float(np.max(v.max(axis=0) - v.min(axis=0))))
    return best


def d_square_estimate(measure, other, m: int = 64, corner_m: int | None = 512) -> DistanceEstimate:
    """Bracket the rectangle distance between ``measure`` and ``other``.

    Both arguments need a ``grid_cdf(m)`` method (empirical measures and
    :class:`~runsort.permuton.RunsortPermuton` qualify).  The lower bound
    scans every rectangle with corners on the ``1/m`` grid.  Snapping a
    rectangle's four edges to the grid moves each measure by at most 1/m
    per edge, hence the ``8/m`` correction; the CDF route gives
    ``4 * corner_sup + 8/k`` on any grid k, and is also evaluated on the
    finer grid ``corner_m`` (skipped when None or not finer than m).  The
    smallest upper bound is reported; ``corner_sup`` is the one at m.
    """
    if m < 2:
        raise InvalidInputError("m must be at least 2")
    diff = measure.grid_cdf(m) - other.grid_cdf(m)
    lower = grid_rect_sup(diff)
    corner = float(np.abs(diff).max())
    upper = min(lower + 8.0 / m, 4.0 * corner + 8.0 / m)
    if corner_m is not None and corner_m > m:
        fine = float(np.abs(measure.grid_cdf(corner_m) - other.grid_cdf(corner_m)).max())
        upper = min(upper, 4.0 * fine + 8.0 / corner_m)
    return DistanceEstimate(lower, upper, m, corner)


def mass_beyond_curve(perm, margin: float) -> float:
    """Upper bound on the mass of ``{x > y e^(1-y) + margin}``.

    Within a cell the curve is at least its value at the cell's bottom
    edge, so the overlap of each cell with the region is bounded by using
    that height throughout.
    """
    perm = np.asarray(perm)
    n = perm.size
    right = np.arange(1, n + 1) / n
    ylo = (perm - 1) / n
    width = np.clip(right - (ylo * np.exp(1.0 - ylo) + margin), 0.0, 1.0 / n)
    return float(width.sum())
