"""
Runsort on a small example
==========================

Cut a permutation into ascending runs, then sort the runs by their first
entries.  The segmented variant also breaks long runs into short pieces.
"""

from fractions import Fraction

import numpy as np

from runsort import ascending_runs, l_statistic, run_stats, runsort, runsort_bar, segment_decompose

pi = np.array([3, 5, 1, 4, 7, 6, 2, 9, 8])

# the runs of pi, left to right
print("runs:", ascending_runs(pi).pieces(pi))

# sorted by first entry and glued back together
out = runsort(pi)
print("runsort:", out.tolist())

# a second pass changes nothing
print("idempotent:", np.array_equal(runsort(out), out))

# segments are capped at floor(ln 9) = 2 entries
seg = segment_decompose(pi)
print("segment cap:", seg.segment_length_cap)
print("segments:", seg.pieces(pi))
print("runsort_bar:", runsort_bar(pi).tolist())

# L(y) is the last position holding a value <= y n
for y in (Fraction(1, 3), Fraction(2, 3), Fraction(1)):
    print(f"L({y}) =", l_statistic(out, y))

s = run_stats(pi)
print("runs:", s.num_runs, "longest:", s.max_run_length)
