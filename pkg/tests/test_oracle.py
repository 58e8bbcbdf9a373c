import itertools
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
import pytest

from runsort.oracle import (
    ResourceLimitError,
    all_permutations,
    asymptotic_density_check,
    batch_runsort,
    compare_p_tilde,
    enumerate_tables,
    grid_index,
    p_tilde,
    p_tilde_formula_printed,
    p_tilde_formula_s2,
    p_tilde_tables,
    verify_insertion_recurrence,
)
from runsort.perm import InvalidInputError, l_statistic, runsort, runsort_with_starts

TABLES = {n: enumerate_tables(n) for n in range(1, 9)}


def brute_tables(n):
    """Tally p and q with plain Python over itertools permutations."""
    p = [[0] * n for _ in range(n)]
    q = [[0] * n for _ in range(n)]
    for perm in itertools.permutations(range(1, n + 1)):
        starts = {perm[0]} | {perm[k] for k in range(1, n) if perm[k] < perm[k - 1]}
        runs, cur = [], [perm[0]]
        for v in perm[1:]:
            if v > cur[-1]:
                cur.append(v)
            else:
                runs.append(cur)
                cur = [v]
        runs.append(cur)
        out = [v for r in sorted(runs) for v in r]
        for i, v in enumerate(out):
            p[i][v - 1] += 1
            if v in starts:
                q[i][v - 1] += 1
    tot = math.factorial(n)
    return ([[Fraction(c, tot) for c in row] for row in p], [[Fraction(c, tot) for c in row] for row in q])


@lru_cache(maxsize=None)
def ptilde_def(n, i, j):
    if i == 1:
        return Fraction(0)
    if j == n:
        return Fraction(1, n)
    return (1 - sum((ptilde_def(n - 1, i - 1, k) for k in range(j, n)), Fraction(0))) / n


# ---- enumeration ---------------------------------------------------------------

def test_batch_runsort_matches_scalar():
    perms = all_permutations(6)
    out, starts = batch_runsort(perms)
    for row, o, s in zip(perms, out, starts):
        ref, ref_s = runsort_with_starts(row)
        assert np.array_equal(o, ref) and np.array_equal(s, ref_s)
    assert len(all_permutations(5, first=3)) == 24


@pytest.mark.parametrize("n", range(1, 7))
def test_tables_match_brute_force(n):
    p, q = brute_tables(n)
    t = TABLES[n]
    assert t.p.tolist() == p
    assert t.q.tolist() == q


def test_examples_n2_n3():
    t = TABLES[2]
    assert t.prob(1, 1) == 1 and t.prob(2, 2) == 1
    assert t.prob_q(2, 2) == Fraction(1, 2) and t.prob_prime(2, 2) == Fraction(1, 2)
    t = TABLES[3]
    assert t.prob(2, 2) == Fraction(2, 3)
    assert t.prob(2, 3) == Fraction(1, 3)
    assert t.prob_prime(2, 3) == Fraction(1, 3)
    assert t.expected_L(Fraction(2, 3)) == Fraction(7, 3)


@pytest.mark.parametrize("n", range(1, 9))
def test_table_invariants(n):
    t = TABLES[n]
    p, q, pp = t.p, t.q, t.p_prime
    assert (p == q + pp).all()
    for k in range(n):
        assert sum(p[k, :]) == 1
        assert sum(p[:, k]) == 1
        assert sum(q[:, k]) == Fraction(n - k, n)
    assert all(pp[0, j] == 0 for j in range(n))
    for i in range(2, n):
        assert t.prob_prime(i, n) == Fraction(1, n)
    assert t.expected_runs == Fraction(n + 1, 2)


@pytest.mark.parametrize("n", range(2, 9))
def test_insertion_recurrence(n):
    ok, failures = verify_insertion_recurrence(TABLES[n], TABLES[n - 1])
    assert ok and failures == []


def test_recurrence_examples():
    assert TABLES[2].prob_prime(2, 2) == Fraction(1, 2)
    assert TABLES[3].prob_prime(2, 2) == (1 - TABLES[2].prob(1, 2)) / 3
    assert TABLES[4].prob_prime(3, 2) == 0
    with pytest.raises(InvalidInputError):
        verify_insertion_recurrence(TABLES[4], TABLES[2])


@pytest.mark.parametrize("n", range(1, 7))
def test_expected_grid_mass_matches_average(n):
    outs = [runsort(p) for p in itertools.permutations(range(1, n + 1))]
    t = TABLES[n]
    for a1, a2 in itertools.combinations(range(n + 1), 2):
        for b1, b2 in itertools.combinations(range(n + 1), 2):
            avg = Fraction(0)
            for o in outs:
                i = np.arange(1, n + 1)
                avg += int(((i > a1) & (i <= a2) & (o > b1) & (o <= b2)).sum())
            avg /= n * len(outs)
            assert t.E(a1, a2, b1, b2) == avg


@pytest.mark.parametrize("n", range(1, 9))
def test_expected_L_matches_direct(n):
    total = {t: 0 for t in range(n + 1)}
    for p in all_permutations(n):
        out = runsort(p)
        for t in total:
            total[t] += l_statistic(out, Fraction(t, n))
    for t, s in total.items():
        assert TABLES[n].expected_L(Fraction(t, n)) == Fraction(s, math.factorial(n))


def test_enumeration_thread_independent():
    a = enumerate_tables(7, threads=1)
    b = enumerate_tables(7, threads=4)
    assert np.array_equal(a.p_counts, b.p_counts)
    assert np.array_equal(a.q_counts, b.q_counts)
    assert np.array_equal(a.L_totals, b.L_totals)


def test_resource_limits():
    with pytest.raises(ResourceLimitError):
        enumerate_tables(10)
    with pytest.raises(ResourceLimitError):
        p_tilde(31, 3, 3)
    with pytest.raises(ResourceLimitError):
        p_tilde_tables(31)
    with pytest.raises(InvalidInputError):
        enumerate_tables(0)


# ---- p-tilde -----------------------------------------------------------------

def test_p_tilde_examples():
    assert p_tilde(3, 2, 2) == Fraction(1, 3)
    assert p_tilde(4, 3, 2) == Fraction(1, 12)
    for n in range(1, 10):
        for j in range(1, n + 1):
            assert p_tilde(n, 1, j) == 0
    assert p_tilde(5, 5, 5) == Fraction(1, 5)


def test_p_tilde_against_definition():
    tables = p_tilde_tables(12)
    for n in range(1, 13):
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                v = ptilde_def(n, i, j)
                assert tables[n][i - 1, j - 1] == v
                assert p_tilde(n, i, j) == v
                assert p_tilde(n, i, j, exact=False) == pytest.approx(float(v), abs=1e-14)


def test_closed_forms_examples():
    assert p_tilde_formula_printed(3, 2, 2) == Fraction(1, 3)
    assert p_tilde_formula_s2(3, 2, 2) == Fraction(1, 3)
    assert p_tilde_formula_s2(4, 3, 2) == Fraction(1, 12)
    # the two-sum form disagrees with the recurrence here
    assert p_tilde_formula_printed(4, 3, 2) == 0


def test_s2_equals_recurrence_everywhere():
    report = compare_p_tilde(12)
    assert report["s2_mismatches"] == []
    assert (4, 3, 2, Fraction(1, 12), Fraction(0)) in report["printed_mismatches"]


def test_closed_form_i_independence():
    for n in range(3, 13):
        for j in range(1, n + 1):
            vals = {p_tilde_formula_s2(n, i, j) for i in range(max(2, n - j + 2), n + 1)}
            assert len(vals) <= 1
            vals = {p_tilde(n, i, j) for i in range(max(2, n - j + 2), n + 1)}
            assert len(vals) <= 1


# ---- density -----------------------------------------------------------------

def test_grid_index():
    assert grid_index(0.3, 2000) == 600
    assert grid_index(0.5, 2000) == 1000
    assert grid_index(0.3, 9) == 3
    assert grid_index(Fraction(1, 3), 9) == 3


def test_density_at_2000():
    rep = asymptotic_density_check(2000, 0.3, 0.5)
    assert rep.relative_error <= 0.02
    assert rep.scaled_p_prime is None


def test_density_small_n_reports_p_prime():
    rep = asymptotic_density_check(9, 0.3, 0.5)
    assert rep.p_prime_error == pytest.approx(rep.scaled_p_prime - math.exp(-0.5))
    assert rep.scaled_p_prime == pytest.approx(9 * float(enumerate_tables(9).prob_prime(3, 5)))


def test_density_i_independence_at_2000():
    n, y = 2000, 0.5
    j = grid_index(y, n)
    # both x values give i >= n - j + 2
    a = p_tilde(n, grid_index(0.6, n), j, exact=False)
    b = p_tilde(n, grid_index(0.75, n), j, exact=False)
    assert a == pytest.approx(b, rel=1e-12)


def test_density_domain():
    with pytest.raises(InvalidInputError):
        asymptotic_density_check(100, 0.9, 0.5)
    with pytest.raises(InvalidInputError):
        asymptotic_density_check(100, 0.5 * math.exp(0.5), 0.5)
