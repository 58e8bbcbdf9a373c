"""
Exact probabilities by enumeration
==================================

Tally runsort over all of S_n, check the insertion identity, and compare
the interior recursion with its closed forms.
"""

from fractions import Fraction

from runsort import oracle

tables = {n: oracle.enumerate_tables(n) for n in range(1, 8)}

t = tables[3]
print("n=3, p:")
for row in t.p:
    print("  ", [str(v) for v in row])
print("expected runs:", t.expected_runs, " E[L(2/3)]:", t.expected_L(Fraction(2, 3)))

for n in range(2, 8):
    ok, bad = oracle.verify_insertion_recurrence(tables[n], tables[n - 1])
    print(f"insertion identity n={n}: {'ok' if ok else bad}")

print("p-tilde(4,3,2) recurrence:", oracle.p_tilde(4, 3, 2))
print("                 S2 only :", oracle.p_tilde_formula_s2(4, 3, 2))
print("                 S1 + S2 :", oracle.p_tilde_formula_printed(4, 3, 2))

report = oracle.compare_p_tilde(12)
print("S2 mismatches up to n=12:", len(report["s2_mismatches"]))
print("S1+S2 mismatches up to n=12:", len(report["printed_mismatches"]))

for n in (100, 500, 2000):
    rep = oracle.asymptotic_density_check(n, 0.3, 0.5, exact=False)
    print(f"n={n:5d}: n p~ = {rep.scaled_p_tilde:.6f}  target {rep.target:.6f}  rel err {rep.relative_error:.2e}")
