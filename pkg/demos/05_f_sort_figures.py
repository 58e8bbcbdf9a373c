"""
Sorting by other prefix-closed families
=======================================

Replace ascending runs with maximal pieces avoiding double descents or
valleys, and write scatter plots of the results at n = 50000.

    python3 demos/05_f_sort_figures.py [outdir]
"""

import sys
from pathlib import Path

import numpy as np

from runsort import sample_uniform, substream
from runsort.cli import scatter_svg
from runsort.fsort import f_runs, f_sort_with_starts, get_family

outdir = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
outdir.mkdir(exist_ok=True)

p = [3, 5, 1, 4, 7, 6, 2, 9, 8]
for name in ("inc", "ddes", "val"):
    fam = get_family(name)
    print(f"{name:4s} pieces:", f_runs(p, fam).pieces(p))

pi = sample_uniform(50_000, substream(1, 0))
for name in ("inc", "ddes", "val"):
    out, starts = f_sort_with_starts(pi, get_family(name))
    path = outdir / f"fsort_{name}.svg"
    path.write_text(scatter_svg(out, starts))
    # piece minima increase left to right
    minima = np.minimum.reduceat(out, np.flatnonzero(starts))
    print(f"{name:4s}: {int(starts.sum())} pieces, mean length {len(out) / starts.sum():.2f}, "
          f"minima increasing {bool(np.all(np.diff(minima) > 0))} -> {path}")
