"""
Monte Carlo experiments
=======================

Seeded trials of runsort on uniform permutations: the L statistic, the
run-start mass profile, and stability under a transposition.  Every run
is reproducible from its seed and does not depend on the thread count.
"""

import math

from runsort.montecarlo import (
    ExperimentConfig,
    curve_mass_experiment,
    experiment_report,
    run_experiment,
    transposition_stability_test,
)

cfg = ExperimentConfig(n=10_000, trials=200, master_seed=1, y_values=(0.25, 0.5, 0.75))
stats = run_experiment(cfg, threads=4)
rep = experiment_report(cfg, stats)
for y, entry in rep["L"].items():
    print(f"y={y}: mean L {entry['mean']:.1f}  predicted {entry['prediction']:.1f}  sd {entry['stddev']:.1f}")
print(f"mean run count {rep['run_count']['mean']:.1f}  vs (n+1)/2 = {(cfg.n + 1) / 2}")
print(f"longest run, mean over trials {rep['max_run_length']['mean']:.2f}  ln n = {math.log(cfg.n):.2f}")

cm = curve_mass_experiment(10_000, 100, seed=3)
print(f"run-start fraction {cm.run_start_fraction:.5f}")
for b in range(0, cm.buckets, 4):
    print(f"  bucket {b:2d}: density {cm.bucket_density[b]:.4f}  expected {cm.expected_density[b]:.4f}")

st = transposition_stability_test(1000, 2000, seed=5)
print(f"transpositions: {st.L_violations + st.mass_violations} violations, "
      f"max L change {st.max_L_change} (bound {st.L_bound:.1f})")
