"""Permutations, ascending runs and the runsort operator.

Permutations are plain 1-D integer numpy arrays holding the values
``1..n`` in one-line notation.  Positions in the public API are 1-based,
matching the usual combinatorial convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np


class InvalidInputError(ValueError):
    """Raised when an argument violates an operation's precondition."""


@dataclass(frozen=True)
class RunDecomposition:
    """Ascending runs as ``(start, length)`` pairs with 1-based starts."""

    runs: tuple[tuple[int, int], ...]

    def __len__(self):
        return len(self.runs)

    def pieces(self, perm):
        return [tuple(int(v) for v in perm[s - 1:s - 1 + ln]) for s, ln in self.runs]


@dataclass(frozen=True)
class SegmentDecomposition:
    segments: tuple[tuple[int, int], ...]
    segment_length_cap: int

    def __len__(self):
        return len(self.segments)

    def pieces(self, perm):
        return [tuple(int(v) for v in perm[s - 1:s - 1 + ln]) for s, ln in self.segments]


@dataclass(frozen=True)
class RunStats:
    """Per-permutation run statistics.

    ``run_length_from_start[j - 1]`` is the length of the run beginning
    with value ``j``, or 0 if ``j`` does not begin a run.
    """

    num_runs: int
    max_run_length: int
    run_start_flags: np.ndarray
    run_length_from_start: np.ndarray


def as_permutation(seq) -> np.ndarray:
    """Validate ``seq`` as a permutation of ``1..n`` and return it as an int64 array."""
    arr = np.asarray(seq)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInputError("a permutation is a non-empty 1-D sequence")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise InvalidInputError("permutation entries must be integers")
    arr = arr.astype(np.int64)
    n = arr.size
    seen = np.zeros(n + 1, dtype=bool)
    if arr.min() < 1 or arr.max() > n:
        raise InvalidInputError(f"entries must lie in 1..{n}")
    seen[arr] = True
    if not seen[1:].all():
        raise InvalidInputError("entries must be distinct")
    return arr


def parse_permutation(text: str) -> np.ndarray:
    """Parse a space separated one-line permutation (``"3 5 1 4"``).

    A single token without spaces is read digit by digit, so ``"351476298"``
    works for n <= 9.
    """
    tokens = text.split()
    if len(tokens) == 1 and len(tokens[0]) > 1:
        tokens = list(tokens[0])
    return as_permutation([int(t) for t in tokens])


def format_permutation(perm) -> str:
    return " ".join(str(int(v)) for v in perm)


def standardize(seq: Sequence[int]) -> np.ndarray:
    """Return the permutation with the same relative order as ``seq``.

    >>> standardize([4, 9, 1, 7]).tolist()
    [2, 4, 1, 3]
    """
    arr = np.asarray(seq)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInputError("cannot standardize an empty sequence")
    order = np.argsort(arr, kind="stable")
    if np.any(arr[order[1:]] == arr[order[:-1]]):
        raise InvalidInputError("standardization needs distinct values")
    out = np.empty(arr.size, dtype=np.int64)
    out[order] = np.arange(1, arr.size + 1)
    return out


def run_start_mask(perm) -> np.ndarray:
    """Boolean mask of positions that begin an ascending run."""
    perm = np.asarray(perm)
    mask = np.ones(perm.size, dtype=bool)
    mask[1:] = perm[1:] < perm[:-1]
    return mask


def ascending_runs(perm) -> RunDecomposition:
    perm = as_permutation(perm)
    starts = np.flatnonzero(run_start_mask(perm))
    lengths = np.diff(np.append(starts, perm.size))
    return RunDecomposition(tuple((int(s) + 1, int(ln)) for s, ln in zip(starts, lengths)))


def _sort_blocks(perm, start_mask):
    # Blocks are contiguous and increasing, so a block's first entry is its
    # minimum; a stable sort on that key keeps each block intact.
    block_id = np.cumsum(start_mask) - 1
    key = perm[start_mask][block_id]
    return perm[np.argsort(key, kind="stable")]


def runsort_with_starts(perm):
    """Runsort plus a mask marking output entries that began a run."""
    perm = as_permutation(perm)
    mask = run_start_mask(perm)
    block_id = np.cumsum(mask) - 1
    order = np.argsort(perm[mask][block_id], kind="stable")
    return perm[order], mask[order]


def runsort(perm) -> np.ndarray:
    """Sort the ascending runs of ``perm`` so that their first entries increase.

    >>> runsort([3, 5, 1, 4, 7, 6, 2, 9, 8]).tolist()
    [1, 4, 7, 2, 9, 3, 5, 6, 8]
    """
    perm = as_permutation(perm)
    return _sort_blocks(perm, run_start_mask(perm))


def segment_cap(n: int) -> int:
    """Largest segment length, ``floor(ln n)``."""
    return int(math.floor(math.log(n))) if n >= 1 else 0


def segment_start_mask(perm) -> np.ndarray:
    perm = np.asarray(perm)
    n = perm.size
    cap = segment_cap(n)
    if cap < 1:
        raise InvalidInputError(f"segmentation undefined for n={n} (floor(log n) < 1)")
    run_mask = run_start_mask(perm)
    starts = np.flatnonzero(run_mask)
    lengths = np.diff(np.append(starts, n))
    long_run = np.repeat(lengths > cap, lengths)
    # 1-based global positions divisible by cap, inside a run that is too long
    pos = np.arange(1, n + 1)
    return run_mask | (long_run & (pos % cap == 0))


def segment_decompose(perm) -> SegmentDecomposition:
    perm = as_permutation(perm)
    mask = segment_start_mask(perm)
    starts = np.flatnonzero(mask)
    lengths = np.diff(np.append(starts, perm.size))
    return SegmentDecomposition(
        tuple((int(s) + 1, int(ln)) for s, ln in zip(starts, lengths)),
        segment_cap(perm.size),
    )


def runsort_bar(perm) -> np.ndarray:
    """Runsort after splitting runs longer than ``floor(log n)`` into segments.

    Falls back to plain runsort when ``floor(log n) < 1`` (n <= 2).
    """
    perm = as_permutation(perm)
    if segment_cap(perm.size) < 1:
        return _sort_blocks(perm, run_start_mask(perm))
    return _sort_blocks(perm, segment_start_mask(perm))


def _floor_scaled(y, n):
    if isinstance(y, (int, Fraction)):
        return math.floor(Fraction(y) * n)
    return math.floor(y * n)


def l_statistic(perm, y) -> int:
    """Last position holding a value ``<= y n``; 0 when ``y < 1/n``."""
    if not 0 <= y <= 1:
        raise InvalidInputError("y must lie in [0, 1]")
    perm = np.asarray(perm)
    t = _floor_scaled(y, perm.size)
    if t < 1:
        return 0
    return int(np.flatnonzero(perm <= t)[-1]) + 1


def envelope(perm) -> np.ndarray:
    """``envelope(perm)[t]`` is the L statistic at threshold ``t`` (t = 0..n).

    Vectorised form of :func:`l_statistic`: it equals
    ``l_statistic(perm, t / n)``.
    """
    perm = np.asarray(perm)
    inv = np.empty(perm.size, dtype=np.int64)
    inv[perm - 1] = np.arange(1, perm.size + 1)
    out = np.zeros(perm.size + 1, dtype=np.int64)
    out[1:] = np.maximum.accumulate(inv)
    return out


def run_stats(perm) -> RunStats:
    perm = as_permutation(perm)
    n = perm.size
    mask = run_start_mask(perm)
    starts = np.flatnonzero(mask)
    lengths = np.diff(np.append(starts, n))
    flags = np.zeros(n, dtype=bool)
    flags[perm[starts] - 1] = True
    by_value = np.zeros(n, dtype=np.int64)
    by_value[perm[starts] - 1] = lengths
    return RunStats(int(starts.size), int(lengths.max()), flags, by_value)


def sample_uniform(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random permutation of ``1..n`` (Fisher-Yates via numpy)."""
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    return rng.permutation(n).astype(np.int64) + 1


def substream(master_seed: int, *index: int) -> np.random.Generator:
    """Independent generator for trial ``index`` of an experiment.

    The stream is ``PCG64(SeedSequence(master_seed, spawn_key=index))``;
    for a single index this is exactly the ``index``-th child of
    ``SeedSequence(master_seed).spawn``.  Results therefore never depend on
    how trials are scheduled.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(index))
    return np.random.Generator(np.random.PCG64(ss))
