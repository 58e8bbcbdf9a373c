"""Runsort of random permutations and its limiting permuton."""

from .empirical import DistanceEstimate, EmpiricalMeasure, d_square_estimate
from .fsort import INCREASING, NO_DOUBLE_DESCENT, NO_VALLEY, Family, f_runs, f_sort, get_family
from .perm import (
    InvalidInputError,
    ascending_runs,
    l_statistic,
    run_stats,
    runsort,
    runsort_bar,
    sample_uniform,
    segment_decompose,
    standardize,
    substream,
)
from .permuton import Rectangle, RunsortPermuton, cdf, curve_inverse, curve_x, rect_mass

__all__ = [
    "DistanceEstimate",
    "EmpiricalMeasure",
    "d_square_estimate",
    "INCREASING",
    "NO_DOUBLE_DESCENT",
    "NO_VALLEY",
    "Family",
    "f_runs",
    "f_sort",
    "get_family",
    "InvalidInputError",
    "ascending_runs",
    "l_statistic",
    "run_stats",
    "runsort",
    "runsort_bar",
    "sample_uniform",
    "segment_decompose",
    "standardize",
    "substream",
    "Rectangle",
    "RunsortPermuton",
    "cdf",
    "curve_inverse",
    "curve_x",
    "rect_mass",
]

__version__ = "0.1.0"
