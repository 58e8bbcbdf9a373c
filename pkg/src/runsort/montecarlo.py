"""Seeded Monte Carlo experiments on runsort of uniform random permutations.

Every trial draws from its own substream ``substream(master_seed, t)``,
and all accumulators are integers, so a result is bit-identical no matter
how trials are split across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .empirical import EmpiricalMeasure, cell_mass_counts, d_square_estimate, mass_beyond_curve
from .fsort import f_sort_with_starts, get_family
from .perm import (
    InvalidInputError,
    envelope,
    runsort_bar,
    runsort_with_starts,
    sample_uniform,
    segment_cap,
    substream,
)
from .permuton import RunsortPermuton, grid_cdf


class ExperimentError(RuntimeError):
    """An experiment aborted; ``partial`` holds whatever was merged so far."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    trials: int
    master_seed: int
    m: int = 20
    y_values: tuple = (0.5,)
    family: str = "inc"
    buckets: int = 20

    def __post_init__(self):
        if self.n < 1 or self.trials < 1:
            raise InvalidInputError("n and trials must be positive")
        if self.m < 1 or self.buckets < 1:
            raise InvalidInputError("m and buckets must be positive")
        if any(not 0 <= y <= 1 for y in self.y_values):
            raise InvalidInputError("y_values must lie in [0, 1]")
        get_family(self.family)


@dataclass
class AggregateStats:
    """Merged statistics; per-trial arrays are ordered by ``trial_ids``.

    ``count_grid`` sums the integer cell masses (units of ``1 / (n m^2)``)
    of every trial's sorted permutation.  ``start_hist`` counts run-start
    values by vertical bucket.  ``start_position[t, k]`` is the output
    position of value ``ceil(y_k n)`` if it began a run, else -1.
    """

    trial_ids: np.ndarray
    count_grid: np.ndarray
    start_hist: np.ndarray
    L: np.ndarray
    run_counts: np.ndarray
    max_run_lengths: np.ndarray
    start_position: np.ndarray

    @classmethod
    def empty(cls, cfg: ExperimentConfig):
        k = len(cfg.y_values)
        return cls(
            np.zeros(0, dtype=np.int64),
            np.zeros((cfg.m, cfg.m), dtype=np.int64),
            np.zeros(cfg.buckets, dtype=np.int64),
            np.zeros((0, k), dtype=np.int64),
            np.zeros(0, dtype=np.int64),
            np.zeros(0, dtype=np.int64),
            np.zeros((0, k), dtype=np.int64),
        )

    def merge(self, other: "AggregateStats") -> "AggregateStats":
        ids = np.concatenate([self.trial_ids, other.trial_ids])
        order = np.argsort(ids, kind="stable")

        def cat(a, b):
            return np.concatenate([a, b])[order]

        return AggregateStats(
            ids[order],
            self.count_grid + other.count_grid,
            self.start_hist + other.start_hist,
            cat(self.L, other.L),
            cat(self.run_counts, other.run_counts),
            cat(self.max_run_lengths, other.max_run_lengths),
            cat(self.start_position, other.start_position),
        )

    @classmethod
    def combine(cls, parts):
        """Merge many partial aggregates at once (same result as pairwise merges)."""
        parts = list(parts)
        ids = np.concatenate([p.trial_ids for p in parts])
        order = np.argsort(ids, kind="stable")

        def cat(name):
            return np.concatenate([getattr(p, name) for p in parts])[order]

        return cls(
            ids[order],
            sum(p.count_grid for p in parts[1:]) + parts[0].count_grid,
            sum(p.start_hist for p in parts[1:]) + parts[0].start_hist,
            cat("L"),
            cat("run_counts"),
            cat("max_run_lengths"),
            cat("start_position"),
        )

    @property
    def trials(self):
        return int(self.trial_ids.size)


def sorted_with_starts(perm, family: str = "inc"):
    if family == "inc":
        return runsort_with_starts(perm)
    return f_sort_with_starts(perm, get_family(family))


def _one_trial(cfg: ExperimentConfig, t: int) -> AggregateStats:
    n = cfg.n
    perm = sample_uniform(n, substream(cfg.master_seed, t))
    out, starts = sorted_with_starts(perm, cfg.family)
    env = envelope(out)
    thresholds = [math.floor(y * n) for y in cfg.y_values]
    start_idx = np.flatnonzero(starts)
    lengths = np.diff(np.append(start_idx, n))
    start_vals = out[starts]
    hist = np.bincount((start_vals - 1) * cfg.buckets // n, minlength=cfg.buckets)
    is_start = np.zeros(n + 1, dtype=bool)
    is_start[start_vals] = True
    pos_of = np.empty(n + 1, dtype=np.int64)
    pos_of[out] = np.arange(1, n + 1)
    probe = []
    for y in cfg.y_values:
        v = min(n, max(1, math.ceil(y * n)))
        probe.append(int(pos_of[v]) if is_start[v] else -1)
    return AggregateStats(
        np.array([t], dtype=np.int64),
        cell_mass_counts(out, cfg.m),
        hist.astype(np.int64),
        np.array([[env[s] for s in thresholds]], dtype=np.int64),
        np.array([start_idx.size], dtype=np.int64),
        np.array([lengths.max()], dtype=np.int64),
        np.array([probe], dtype=np.int64),
    )


def _partition(trials: int, parts: int):
    parts = max(1, min(parts, trials))
    bounds = np.linspace(0, trials, parts + 1).astype(int)
    return [range(a, b) for a, b in zip(bounds, bounds[1:])]


def _parallel_map(fn, chunks, threads):
    if threads <= 1 or len(chunks) == 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(threads) as ex:
        return list(ex.map(fn, chunks))


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> AggregateStats:
    """Run ``cfg.trials`` independent trials and merge their statistics."""

    def work(chunk):
        return AggregateStats.combine([AggregateStats.empty(cfg)] + [_one_trial(cfg, t) for t in chunk])

    parts = _parallel_map(work, _partition(cfg.trials, threads), threads)
    total = AggregateStats.empty(cfg)
    try:
        for part in parts:
            total = total.merge(part)
    except MemoryError as exc:
        raise ExperimentError("out of memory while merging trials", partial=total) from exc
    return total


def summarize(values) -> dict:
    values = np.asarray(values, dtype=float)
    return {
        "mean": float(values.mean()),
        "median": float(np.median(values)),
        "stddev": float(values.std(ddof=1)) if values.size > 1 else 0.0,
        "min": float(values.min()),
        "max": float(values.max()),
    }


def experiment_report(cfg: ExperimentConfig, stats: AggregateStats) -> dict:
    n = cfg.n
    L = {}
    for k, y in enumerate(cfg.y_values):
        entry = summarize(stats.L[:, k])
        entry["prediction"] = n * y * math.exp(1 - y)
        L[repr(float(y))] = entry
    return {
        "config": asdict(cfg),
        "L": L,
        "run_count": summarize(stats.run_counts),
        "max_run_length": summarize(stats.max_run_lengths),
    }


# --------------------------------------------------------------------------
# transposition stability


@dataclass
class StabilityReport:
    n: int
    trials: int
    seed: int
    L_bound: float
    mass_bound: float
    L_violations: int
    mass_violations: int
    max_L_change: int
    max_mass_change: float
    runsort_equals_bar: float
    equality_floor: float


def _stability_trial(n, seed, t):
    rng = substream(seed, t)
    perm = sample_uniform(n, rng)
    i1, i2 = (int(v) for v in rng.integers(0, n, size=2))
    y = float(rng.random())
    a1, a2 = sorted(int(v) for v in rng.integers(0, n + 1, size=2))
    b1, b2 = sorted(int(v) for v in rng.integers(0, n + 1, size=2))
    swapped = perm.copy()
    swapped[[i1, i2]] = swapped[[i2, i1]]
    out = runsort_bar(perm)
    out2 = runsort_bar(swapped)
    thr = math.floor(y * n)
    dL = abs(int(envelope(out)[thr]) - int(envelope(out2)[thr]))
    pos = np.arange(1, n + 1)

    def count(o):
        return int(np.count_nonzero((pos > a1) & (pos <= a2) & (o > b1) & (o <= b2)))

    dcount = abs(count(out) - count(out2))
    plain_equal = bool(np.array_equal(runsort_with_starts(perm)[0], out))
    return dL, dcount, plain_equal


def transposition_stability_test(n: int, trials: int, seed: int, threads: int = 1) -> StabilityReport:
    """Swap two random entries and compare runsort-bar before and after.

    The L statistic may move by at most ``9 log n`` and the mass of any
    rectangle by at most ``20 log n / n``; both are deterministic bounds,
    so any violation is a bug.  Rectangles have corners on the 1/n grid,
    where the mass change is largest.
    """
    if segment_cap(n) < 1:
        raise InvalidInputError("need floor(log n) >= 1")

    def work(chunk):
        return [_stability_trial(n, seed, t) for t in chunk]

    rows = [r for part in _parallel_map(work, _partition(trials, threads), threads) for r in part]
    dL = np.array([r[0] for r in rows])
    dc = np.array([r[1] for r in rows])
    eq = np.array([r[2] for r in rows])
    log_n = math.log(n)
    L_bound = 9 * log_n
    mass_bound = 20 * log_n / n
    return StabilityReport(
        n,
        trials,
        seed,
        L_bound,
        mass_bound,
        int(np.count_nonzero(dL > L_bound)),
        int(np.count_nonzero(dc / n > mass_bound)),
        int(dL.max()),
        float(dc.max() / n),
        float(eq.mean()),
        1 - n ** (-math.log(log_n) / 2),
    )


# --------------------------------------------------------------------------
# mass on the curve


@dataclass
class CurveMassReport:
    n: int
    trials: int
    seed: int
    buckets: int
    y: float
    run_start_fraction: float
    expected_fraction: float
    bucket_density: list
    expected_density: list
    max_density_deviation: float
    probe_value: int
    probe_samples: int
    displacement: dict = field(default_factory=dict)
    within_005n: float = float("nan")


def curve_mass_experiment(n, trials, seed, buckets=20, y=0.5, threads=1) -> CurveMassReport:
    """Mass carried by run starts and its vertical distribution.

    A value j begins a run with probability ``(n - j + 1)/n``, so the
    run-start mass per unit height is ``1 - y`` up to O(1/n).  Bucket
    densities (mass over bucket width) are compared with the bucket
    average of ``1 - y``.  The output position of value ``ceil(yn)``, when
    it starts a run, is compared with ``n y e^(1-y)``.
    """
    if buckets < 10:
        raise InvalidInputError("buckets must be at least 10")
    cfg = ExperimentConfig(n=n, trials=trials, master_seed=seed, m=1, y_values=(y,), buckets=buckets)
    stats = run_experiment(cfg, threads=threads)
    frac = float(stats.run_counts.sum() / (trials * n))
    density = stats.start_hist / (trials * n) * buckets
    mids = (np.arange(buckets) + 0.5) / buckets
    expected = 1 - mids
    pos = stats.start_position[:, 0]
    pos = pos[pos > 0]
    center = n * y * math.exp(1 - y)
    disp = pos - center
    scale = math.sqrt(n) * math.log(n) ** 2
    displacement = {}
    within = float("nan")
    if pos.size:
        displacement = summarize(disp)
        displacement["max_abs_over_sqrt_n_log2"] = float(np.abs(disp).max() / scale)
        within = float(np.mean(np.abs(disp) <= 0.05 * n))
    return CurveMassReport(
        n,
        trials,
        seed,
        buckets,
        y,
        frac,
        (n + 1) / (2 * n),
        density.tolist(),
        expected.tolist(),
        float(np.abs(density - expected).max()),
        min(n, max(1, math.ceil(y * n))),
        int(pos.size),
        displacement,
        within,
    )


# --------------------------------------------------------------------------
# convergence toward the limit


@dataclass
class ConvergenceRow:
    n: int
    lowers: list
    uppers: list
    median_lower: float
    median_upper: float
    max_beyond_curve: float
    cell_max_diff: float


def convergence_experiment(n_list, trials, seed, m=100, cell_m=20, margin=0.02, threads=1):
    """Grid estimates of the rectangle distance to the limit, per n.

    Trial t at size n uses ``substream(seed, n, t)``.  Besides the
    distance bracket, each row reports the largest mass found right of
    the curve shifted by ``margin`` and the largest cell difference between
    the trial-averaged grid masses and the limit's (grid ``cell_m``).
    """
    limit = RunsortPermuton()
    ref = grid_cdf(cell_m)
    ref_cells = np.diff(np.diff(ref, axis=0), axis=1)
    rows = []
    for n in n_list:

        def work(chunk, n=n):
            res = []
            for t in chunk:
                perm = sample_uniform(n, substream(seed, n, t))
                out = runsort_with_starts(perm)[0]
                est = d_square_estimate(EmpiricalMeasure(out), limit, m)
                res.append((est.lower, est.upper, mass_beyond_curve(out, margin), cell_mass_counts(out, cell_m)))
            return res

        res = [r for part in _parallel_map(work, _partition(trials, threads), threads) for r in part]
        lowers = [r[0] for r in res]
        uppers = [r[1] for r in res]
        cells = sum(r[3] for r in res) / (trials * n * cell_m * cell_m)
        rows.append(
            ConvergenceRow(
                n,
                lowers,
                uppers,
                float(np.median(lowers)),
                float(np.median(uppers)),
                float(max(r[2] for r in res)),
                float(np.abs(cells - ref_cells).max()),
            )
        )
    return rows
