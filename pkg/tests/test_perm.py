import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from runsort.perm import (
    InvalidInputError,
    as_permutation,
    ascending_runs,
    envelope,
    format_permutation,
    l_statistic,
    parse_permutation,
    run_stats,
    runsort,
    runsort_bar,
    runsort_with_starts,
    sample_uniform,
    segment_cap,
    segment_decompose,
    standardize,
    substream,
)

PI = [3, 5, 1, 4, 7, 6, 2, 9, 8]


def brute_runs(seq):
    runs = [[seq[0]]]
    for v in seq[1:]:
        if v > runs[-1][-1]:
            runs[-1].append(v)
        else:
            runs.append([v])
    return runs


def brute_runsort(seq):
    return [v for run in sorted(brute_runs(list(seq))) for v in run]


def brute_segments(seq):
    n = len(seq)
    cap = math.floor(math.log(n))
    segs, pos = [], 1
    for run in brute_runs(list(seq)):
        if len(run) <= cap:
            segs.append(run)
        else:
            cur = []
            for k, v in enumerate(run):
                if cur and (pos + k) % cap == 0:
                    segs.append(cur)
                    cur = []
                cur.append(v)
            segs.append(cur)
        pos += len(run)
    return segs


perms = st.integers(1, 40).flatmap(lambda n: st.permutations(range(1, n + 1)))


# ---- standardize -------------------------------------------------------------

def test_standardize_examples():
    assert standardize([4, 9, 1, 7]).tolist() == [2, 4, 1, 3]
    assert standardize([1, 2, 3, 4, 5]).tolist() == [1, 2, 3, 4, 5]
    assert standardize([7, 3]).tolist() == [2, 1]


@pytest.mark.parametrize("bad", [[], [1, 1], [3, 2, 3]])
def test_standardize_rejects(bad):
    with pytest.raises(InvalidInputError):
        standardize(bad)


@pytest.mark.parametrize("n", range(1, 7))
def test_standardize_fixes_permutations(n):
    for p in itertools.permutations(range(1, n + 1)):
        assert tuple(standardize(p)) == p


@given(st.lists(st.integers(-10**6, 10**6), min_size=1, max_size=30, unique=True))
def test_standardize_preserves_order(seq):
    s = standardize(seq)
    for a, b in itertools.combinations(range(len(seq)), 2):
        assert (seq[a] < seq[b]) == (s[a] < s[b])


# ---- validation and IO -------------------------------------------------------

@pytest.mark.parametrize("bad", [[], [0, 1], [1, 3], [2, 2], [[1, 2]]])
def test_as_permutation_rejects(bad):
    with pytest.raises(InvalidInputError):
        as_permutation(bad)


def test_oneline_roundtrip():
    p = as_permutation(PI)
    assert parse_permutation(format_permutation(p)).tolist() == PI
    assert parse_permutation("351476298").tolist() == PI
    assert format_permutation([10, 1, 2]) == "10 1 2"


# ---- runs and runsort --------------------------------------------------------

def test_ascending_runs_example():
    d = ascending_runs(PI)
    assert d.pieces(PI) == [(3, 5), (1, 4, 7), (6,), (2, 9), (8,)]
    assert ascending_runs([1, 2, 3, 4, 5]).runs == ((1, 5),)
    assert ascending_runs([3, 2, 1]).runs == ((1, 1), (2, 1), (3, 1))


@given(perms)
def test_run_decomposition_invariants(p):
    d = ascending_runs(p)
    pos = 1
    for start, length in d.runs:
        assert start == pos
        pos += length
        run = p[start - 1:start - 1 + length]
        assert all(a < b for a, b in zip(run, run[1:]))
        if start > 1:
            assert p[start - 2] > p[start - 1]
    assert pos == len(p) + 1


def test_runsort_examples():
    assert runsort(PI).tolist() == [1, 4, 7, 2, 9, 3, 5, 6, 8]
    assert runsort([1, 4, 7, 2, 9, 3, 5, 6, 8]).tolist() == [1, 4, 7, 2, 9, 3, 5, 6, 8]
    assert runsort([3, 2, 1]).tolist() == [1, 2, 3]


@pytest.mark.parametrize("n", range(1, 8))
def test_runsort_exhaustive(n):
    for p in itertools.permutations(range(1, n + 1)):
        out = runsort(p)
        assert out.tolist() == brute_runsort(p)
        assert runsort(out).tolist() == out.tolist()
        assert sorted(out.tolist()) == list(range(1, n + 1))


def test_runsort_idempotent_large():
    for t in range(1000):
        p = sample_uniform(10_000, substream(11, t))
        out = runsort(p)
        assert np.array_equal(runsort(out), out)
        assert np.array_equal(np.sort(out), np.arange(1, 10_001))


@given(perms)
def test_runsort_minima_increase_and_concat(p):
    out = runsort(p)
    runs = [list(r) for r in ascending_runs(p).pieces(p)]
    runs.sort(key=lambda r: r[0])
    assert out.tolist() == [v for r in runs for v in r]
    firsts = [r[0] for r in runs]
    assert firsts == sorted(firsts)


@given(perms)
def test_runsort_with_starts_flags(p):
    out, starts = runsort_with_starts(p)
    assert np.array_equal(out, runsort(p))
    run_firsts = {r[0] for r in ascending_runs(p).pieces(p)}
    assert set(out[starts].tolist()) == run_firsts


# ---- segments and runsort-bar ------------------------------------------------

def test_segment_examples():
    d = segment_decompose(PI)
    assert d.segment_length_cap == 2
    assert d.pieces(PI) == [(3, 5), (1,), (4, 7), (6,), (2, 9), (8,)]
    ident = list(range(1, 10))
    assert segment_decompose(ident).pieces(ident) == [(1,), (2, 3), (4, 5), (6, 7), (8, 9)]


def test_runsort_bar_examples():
    assert runsort_bar(PI).tolist() == [1, 2, 9, 3, 5, 4, 7, 6, 8]
    assert runsort_bar([3, 2, 1]).tolist() == [1, 2, 3]


def test_segmentation_rejected_for_tiny_n():
    with pytest.raises(InvalidInputError):
        segment_decompose([2, 1])
    assert runsort_bar([2, 1]).tolist() == [1, 2]


@given(st.integers(3, 60).flatmap(lambda n: st.permutations(range(1, n + 1))))
def test_segments_match_brute_force(p):
    d = segment_decompose(p)
    assert [list(s) for s in d.pieces(p)] == brute_segments(p)
    cap = d.segment_length_cap
    runs = ascending_runs(p).runs
    for start, length in d.segments:
        assert length <= cap or any(s == start and ln == length and ln <= cap for s, ln in runs)
        assert any(s <= start and start + length <= s + ln for s, ln in runs)
    assert runsort_bar(p).tolist() == [v for s in sorted(brute_segments(p)) for v in s]


@pytest.mark.parametrize("n", range(3, 8))
def test_runsort_bar_equals_runsort_when_runs_short(n):
    cap = segment_cap(n)
    for p in itertools.permutations(range(1, n + 1)):
        if max(ln for _, ln in ascending_runs(p).runs) <= cap:
            assert runsort_bar(p).tolist() == runsort(p).tolist()


def test_runsort_bar_equals_runsort_random_filtered():
    hits = 0
    for t in range(300):
        p = sample_uniform(1000, substream(5, t))
        if max(ln for _, ln in ascending_runs(p).runs) <= segment_cap(1000):
            hits += 1
            assert np.array_equal(runsort_bar(p), runsort(p))
    assert hits > 100


# ---- L statistic -------------------------------------------------------------

def test_l_statistic_examples():
    out = [1, 4, 7, 2, 9, 3, 5, 6, 8]
    assert l_statistic(out, Fraction(1, 3)) == 6
    assert l_statistic(out, 1 / 3) == 6
    assert l_statistic(out, 0.1) == 0
    assert l_statistic([1, 2, 3, 4], 0.5) == 2


@pytest.mark.parametrize("y", [-0.1, 1.5])
def test_l_statistic_domain(y):
    with pytest.raises(InvalidInputError):
        l_statistic([1, 2], y)


@given(perms)
def test_l_statistic_monotone_and_envelope(p):
    n = len(p)
    env = envelope(p)
    values = [l_statistic(p, Fraction(t, n)) for t in range(n + 1)]
    assert values == env.tolist()
    assert values == sorted(values)
    assert l_statistic(p, 1) == n


# ---- run stats ---------------------------------------------------------------

def test_run_stats_example():
    s = run_stats(PI)
    assert s.num_runs == 5 and s.max_run_length == 3
    expected = {3: 2, 1: 3, 6: 1, 2: 2, 8: 1}
    assert {j + 1: int(x) for j, x in enumerate(s.run_length_from_start) if x} == expected
    s = run_stats(list(range(1, 8)))
    assert s.num_runs == 1 and s.run_length_from_start[0] == 7
    s = run_stats([3, 2, 1])
    assert s.num_runs == 3 and s.run_length_from_start.tolist() == [1, 1, 1]


@given(perms)
def test_run_stats_invariants(p):
    s = run_stats(p)
    assert s.run_length_from_start.sum() == len(p)
    assert s.run_start_flags.sum() == s.num_runs == len(ascending_runs(p))


# ---- sampling ----------------------------------------------------------------

def test_sample_uniform_basic():
    assert sample_uniform(1, substream(0, 0)).tolist() == [1]
    a = sample_uniform(50, substream(42, 3))
    b = sample_uniform(50, substream(42, 3))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_uniform(50, substream(42, 4)))
    with pytest.raises(InvalidInputError):
        sample_uniform(0, substream(0, 0))


def test_substream_matches_spawn():
    child = np.random.SeedSequence(9).spawn(4)[3]
    ref = np.random.Generator(np.random.PCG64(child)).random(5)
    assert np.array_equal(substream(9, 3).random(5), ref)


def test_sample_uniform_frequencies():
    rng = np.random.default_rng(2024)
    counts = Counter(tuple(sample_uniform(3, rng)) for _ in range(60_000))
    assert len(counts) == 6
    for c in counts.values():
        assert abs(c / 60_000 - 1 / 6) <= 0.01


def test_run_length_tail_bound():
    # P[some run >= T] <= (n - T + 1) / T!  (union bound over windows)
    n, T, samples = 20, 5, 100_000
    rng = np.random.default_rng(77)
    perms = rng.random((samples, n)).argsort(axis=1)
    asc = perms[:, 1:] > perms[:, :-1]
    # a run of length >= T means T - 1 consecutive ascents
    win = np.lib.stride_tricks.sliding_window_view(asc, T - 1, axis=1).all(axis=2)
    freq = win.any(axis=1).mean()
    bound = (n - T + 1) / math.factorial(T)
    se = math.sqrt(freq * (1 - freq) / samples)
    assert freq <= bound + 3 * se
