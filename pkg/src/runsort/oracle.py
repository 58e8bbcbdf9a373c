"""Exact small-n oracle: exhaustive enumeration of runsort over S_n and the
insertion recurrences for the interior density.

All probabilities are :class:`fractions.Fraction`.  Enumeration tallies
integer counts over the n! permutations; division happens only when a
rational is requested.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .perm import InvalidInputError

MAX_ENUMERATION_N = 9
MAX_EXACT_PTILDE_N = 30


class ResourceLimitError(RuntimeError):
    pass


def all_permutations(n: int, first=None) -> np.ndarray:
    """All permutations of ``1..n`` in lexicographic order, one per row.

    With ``first`` given, only those starting with that value.
    """
    if first is None:
        rows = itertools.permutations(range(1, n + 1))
    else:
        rest = [v for v in range(1, n + 1) if v != first]
        rows = ((first,) + p for p in itertools.permutations(rest))
    return np.array(list(rows), dtype=np.int8).reshape(-1, n)


def batch_runsort(perms: np.ndarray):
    """Row-wise runsort of a 2-D array of permutations.

    Returns ``(sorted_rows, start_flags)``; ``start_flags[r, i]`` is True
    when output entry ``i`` of row ``r`` began a run in the input.
    """
    rows, n = perms.shape
    starts = np.ones((rows, n), dtype=bool)
    starts[:, 1:] = perms[:, 1:] < perms[:, :-1]
    start_idx = np.maximum.accumulate(np.where(starts, np.arange(n), 0), axis=1)
    key = np.take_along_axis(perms, start_idx, axis=1)
    order = np.argsort(key, axis=1, kind="stable")
    return np.take_along_axis(perms, order, axis=1), np.take_along_axis(starts, order, axis=1)


def _last_at_most(out: np.ndarray) -> np.ndarray:
    """``L[r, t]``: last 1-based position in row r with value <= t, t = 0..n."""
    rows, n = out.shape
    inv = np.empty_like(out, dtype=np.int64)
    np.put_along_axis(inv, out.astype(np.int64) - 1, np.arange(1, n + 1)[None, :].repeat(rows, 0), axis=1)
    L = np.zeros((rows, n + 1), dtype=np.int64)
    L[:, 1:] = np.maximum.accumulate(inv, axis=1)
    return L


@dataclass
class _Counts:
    p: np.ndarray
    q: np.ndarray
    runs: int
    L: np.ndarray

    def __add__(self, other):
        return _Counts(self.p + other.p, self.q + other.q, self.runs + other.runs, self.L + other.L)


def _tally(perms: np.ndarray) -> _Counts:
    n = perms.shape[1]
    out, start = batch_runsort(perms)
    p = np.zeros((n, n), dtype=np.int64)
    q = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        col = out[:, i].astype(np.int64) - 1
        p[i] = np.bincount(col, minlength=n)
        q[i] = np.bincount(col[start[:, i]], minlength=n)
    runs = int(start.sum())
    L = _last_at_most(out).sum(axis=0)
    return _Counts(p, q, runs, L)


def _to_fractions(counts, den):
    out = np.empty(counts.shape, dtype=object)
    for idx, c in np.ndenumerate(counts):
        out[idx] = Fraction(int(c), den)
    return out


@dataclass
class ProbabilityTables:
    """Exact runsort position/value probabilities for one n.

    Arrays are 0-based: ``p[i-1, j-1]`` is the probability that value j
    lands at position i of runsort(pi).  ``q`` restricts to values that
    began a run of pi, ``p_prime = p - q``.
    """

    n: int
    p_counts: np.ndarray
    q_counts: np.ndarray
    run_count_total: int
    L_totals: np.ndarray
    total: int = field(init=False)

    def __post_init__(self):
        self.total = math.factorial(self.n)

    @property
    def p(self):
        return _to_fractions(self.p_counts, self.total)

    @property
    def q(self):
        return _to_fractions(self.q_counts, self.total)

    @property
    def p_prime(self):
        return _to_fractions(self.p_counts - self.q_counts, self.total)

    def prob(self, i, j):
        return Fraction(int(self.p_counts[i - 1, j - 1]), self.total)

    def prob_q(self, i, j):
        return Fraction(int(self.q_counts[i - 1, j - 1]), self.total)

    def prob_prime(self, i, j):
        return Fraction(int(self.p_counts[i - 1, j - 1] - self.q_counts[i - 1, j - 1]), self.total)

    @property
    def expected_runs(self) -> Fraction:
        return Fraction(self.run_count_total, self.total)

    def expected_L(self, y) -> Fraction:
        t = math.floor(Fraction(y) * self.n)
        return Fraction(int(self.L_totals[max(t, 0)]), self.total)

    def E(self, a1, a2, b1, b2) -> Fraction:
        """Expected mass of ``[a1/n, a2/n] x [b1/n, b2/n]`` (integer corners)."""
        block = self.p_counts[a1:a2, b1:b2]
        return Fraction(int(block.sum()), self.n * self.total)


def enumerate_tables(n: int, max_n: int = MAX_ENUMERATION_N, threads: int = 1) -> ProbabilityTables:
    """Tally runsort over all of S_n.

    Work is split into blocks by first entry; blocks are merged by integer
    addition so the result does not depend on ``threads``.
    """
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    if n > max_n:
        raise ResourceLimitError(f"enumerating S_{n} exceeds the cap n <= {max_n}")
    blocks = range(1, n + 1)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(lambda f: _tally(all_permutations(n, f)), blocks))
    else:
        parts = [_tally(all_permutations(n, f)) for f in blocks]
    acc = parts[0]
    for part in parts[1:]:
        acc = acc + part
    return ProbabilityTables(n, acc.p, acc.q, acc.runs, acc.L)


def verify_insertion_recurrence(tables: ProbabilityTables, previous: ProbabilityTables):
    """Check the insertion identity

        p'_n(i, j) = (1 - sum_{j <= k <= n-1} p_{n-1}(i-1, k)) / n

    at every 2 <= i <= n, 1 <= j <= n.  Returns ``(ok, failures)`` where
    failures lists ``(i, j, lhs, rhs)``.
    """
    if tables is None or previous is None or previous.n != tables.n - 1:
        raise InvalidInputError("need tables for n and n - 1")
    n = tables.n
    failures = []
    for i in range(2, n + 1):
        for j in range(1, n + 1):
            tail = Fraction(int(previous.p_counts[i - 2, j - 1:n - 1].sum()), previous.total)
            rhs = (1 - tail) / n
            lhs = tables.prob_prime(i, j)
            if lhs != rhs:
                failures.append((i, j, lhs, rhs))
    return not failures, failures


def p_tilde_tables(n_max: int):
    """Exact p-tilde tables for sizes 1..n_max.

    Returns a dict ``{m: object array (m x m)}`` with 0-based indices.
    Row 1 vanishes; every other cell follows the recurrence, which gives
    ``1/m`` in the last column automatically.
    """
    if n_max > MAX_EXACT_PTILDE_N:
        raise ResourceLimitError(f"exact p-tilde tables capped at n <= {MAX_EXACT_PTILDE_N}")
    tables = {1: np.array([[Fraction(0)]], dtype=object)}
    for m in range(2, n_max + 1):
        prev = tables[m - 1]
        cur = np.empty((m, m), dtype=object)
        cur[0, :] = Fraction(0)
        for i in range(1, m):
            suffix = Fraction(0)
            cur[i, m - 1] = Fraction(1, m)
            for c in range(m - 2, -1, -1):
                suffix += prev[i - 1, c]
                cur[i, c] = (1 - suffix) / m
        tables[m] = cur
    return tables


def p_tilde(n: int, i: int, j: int, exact: bool = True):
    """Single p-tilde value via the recursion cone.

    Only row ``i - r`` of level ``n - r`` and columns ``k >= j`` feed the
    answer, so the cost is O(n i).  ``exact=False`` runs the same
    recursion in floating point for large n.
    """
    if not (1 <= i <= n and 1 <= j <= n):
        raise InvalidInputError("need 1 <= i, j <= n")
    if exact and n > MAX_EXACT_PTILDE_N:
        raise ResourceLimitError(f"exact p-tilde capped at n <= {MAX_EXACT_PTILDE_N}; use exact=False")
    row = None
    for r in range(i - 1, -1, -1):
        m = n - r
        width = max(0, m - j + 1)  # columns k = j..m
        if r == i - 1:
            row = [Fraction(0)] * width if exact else np.zeros(width)
            continue
        # previous row covers k = j..m-1
        if exact:
            new = [Fraction(0)] * width
            suffix = Fraction(0)
            for c in range(width - 1, -1, -1):
                new[c] = (1 - suffix) / m
                if c - 1 >= 0:
                    suffix += row[c - 1]
            row = new
        else:
            prev = np.asarray(row, dtype=float)
            tail = np.concatenate([np.cumsum(prev[::-1])[::-1], [0.0]]) if prev.size else np.zeros(width)
            row = (1.0 - tail[:width]) / m
    return row[0]


def _falling(n, count):
    out = 1
    for t in range(count):
        out *= n - t
    return out


def _ptilde_terms(n, i, j):
    if not (2 <= i <= n and 1 <= j <= n):
        raise InvalidInputError("closed forms need 2 <= i <= n and 1 <= j <= n")
    M = min(n - j, i - 2)
    s1 = sum(
        (Fraction((-1) ** r * math.comb(n - j + r - 1, r - 1), _falling(n, r + 1)) for r in range(1, M + 1)),
        Fraction(0),
    )
    s2 = sum(
        (Fraction((-1) ** s * math.comb(n - j, s), _falling(n, s + 1)) for s in range(0, M + 1)),
        Fraction(0),
    )
    return s1, s2


def p_tilde_formula_printed(n, i, j) -> Fraction:
    """The two-sum closed form S1 + S2."""
    s1, s2 = _ptilde_terms(n, i, j)
    return s1 + s2


def p_tilde_formula_s2(n, i, j) -> Fraction:
    """Only the alternating binomial sum S2."""
    return _ptilde_terms(n, i, j)[1]


def compare_p_tilde(n_max: int = 12):
    """Compare the recurrence with both closed forms on every cell i >= 2.

    Returns a dict with mismatch lists for the S2-only and the printed
    formula; cells are ``(n, i, j, recurrence, formula)``.
    """
    tables = p_tilde_tables(n_max)
    s2_bad, printed_bad = [], []
    for n in range(2, n_max + 1):
        for i in range(2, n + 1):
            for j in range(1, n + 1):
                rec = tables[n][i - 1, j - 1]
                s1, s2 = _ptilde_terms(n, i, j)
                if s2 != rec:
                    s2_bad.append((n, i, j, rec, s2))
                if s1 + s2 != rec:
                    printed_bad.append((n, i, j, rec, s1 + s2))
    return {"s2_mismatches": s2_bad, "printed_mismatches": printed_bad}


def grid_index(v, n: int) -> int:
    """``ceil(v n)`` with decimal inputs read exactly (0.3 -> 3/10)."""
    frac = v if isinstance(v, Fraction) else Fraction(str(v))
    return max(1, math.ceil(frac * n))


@dataclass(frozen=True)
class DensityReport:
    n: int
    x: float
    y: float
    i: int
    j: int
    target: float
    scaled_p_tilde: float
    p_tilde_error: float
    scaled_p_prime: float | None = None
    p_prime_error: float | None = None

    @property
    def relative_error(self):
        return abs(self.p_tilde_error) / self.target


def asymptotic_density_check(n: int, x, y, exact=None) -> DensityReport:
    """Compare ``n * p_tilde(ceil(xn), ceil(yn))`` with ``e^(y-1)``.

    For n within the enumeration cap the true ``n * p'_n`` is reported too.
    """
    if not (0 < float(x) < 1 and 0 < float(y) <= 1):
        raise InvalidInputError("x and y must lie in (0, 1)")
    if float(x) >= float(y) * math.exp(1 - float(y)):
        raise InvalidInputError("(x, y) must lie strictly left of the curve x = y e^(1-y)")
    i, j = grid_index(x, n), grid_index(y, n)
    if exact is None:
        exact = n <= MAX_EXACT_PTILDE_N
    value = float(p_tilde(n, i, j, exact=exact))
    target = math.exp(float(y) - 1)
    pp = pp_err = None
    if n <= MAX_ENUMERATION_N:
        pp = float(n * enumerate_tables(n).prob_prime(i, j))
        pp_err = pp - target
    return DensityReport(n, float(x), float(y), i, j, target, n * value, n * value - target, pp, pp_err)
