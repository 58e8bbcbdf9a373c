"""Greedy F-run decomposition and F-sort for prefix-closed families."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .perm import InvalidInputError, as_permutation, standardize


class InvalidFamilyError(ValueError):
    pass


@dataclass(frozen=True)
class Family:
    """A prefix-closed permutation family.

    ``contains`` decides membership of a sequence of distinct values; it
    must depend only on relative order.  ``extends(values, start, end)``
    is an optional shortcut answering whether ``values[start:end + 1]``
    is in the family, given that ``values[start:end]`` already is.  When
    absent, the greedy scan standardizes each window explicitly.
    """

    name: str
    contains: Callable[[Sequence[int]], bool]
    extends: Optional[Callable[[Sequence[int], int, int], bool]] = None

    def __call__(self, seq):
        return self.contains(seq)


def _is_increasing(seq):
    return all(a < b for a, b in zip(seq, seq[1:]))


def _has_double_descent(seq):
    return any(seq[i - 1] > seq[i] > seq[i + 1] for i in range(1, len(seq) - 1))


def _has_valley(seq):
    return any(seq[i - 1] > seq[i] < seq[i + 1] for i in range(1, len(seq) - 1))


INCREASING = Family(
    "inc",
    _is_increasing,
    lambda v, start, end: v[end - 1] < v[end],
)

NO_DOUBLE_DESCENT = Family(
    "ddes",
    lambda seq: not _has_double_descent(seq),
    lambda v, start, end: end - start < 2 or not (v[end - 2] > v[end - 1] > v[end]),
)

NO_VALLEY = Family(
    "val",
    lambda seq: not _has_valley(seq),
    lambda v, start, end: end - start < 2 or not (v[end - 2] > v[end - 1] < v[end]),
)

FAMILIES = {f.name: f for f in (INCREASING, NO_DOUBLE_DESCENT, NO_VALLEY)}


def get_family(name: str) -> Family:
    try:
        return FAMILIES[name]
    except KeyError:
        raise InvalidInputError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None


def family_contains(family: Family, seq) -> bool:
    return bool(family.contains([int(v) for v in seq]))


def generic(family: Family) -> Family:
    """Copy of ``family`` without the incremental shortcut (slow reference path)."""
    return Family(family.name, family.contains)


@dataclass(frozen=True)
class FRunDecomposition:
    """F-runs as ``(start, length)`` pairs; ``breakpoints`` are k_0 < ... < k_r = n + 1."""

    f_runs: tuple[tuple[int, int], ...]
    breakpoints: tuple[int, ...]

    def __len__(self):
        return len(self.f_runs)

    def pieces(self, perm):
        return [tuple(int(v) for v in perm[s - 1:s - 1 + ln]) for s, ln in self.f_runs]


def f_run_starts(perm, family: Family) -> list[int]:
    """0-based start indices of the F-runs of ``perm``."""
    if not family.contains([1]):
        raise InvalidFamilyError(f"family {family.name!r} must contain the permutation 1")
    values = [int(v) for v in perm]
    n = len(values)
    starts = [0]
    start = 0
    if family.extends is not None:
        ext = family.extends
        for end in range(1, n):
            if not ext(values, start, end):
                start = end
                starts.append(end)
    else:
        for end in range(1, n):
            window = standardize(values[start:end + 1]).tolist()
            if not family.contains(window):
                start = end
                starts.append(end)
    return starts


def f_runs(perm, family: Family) -> FRunDecomposition:
    perm = as_permutation(perm)
    n = perm.size
    starts = f_run_starts(perm, family)
    bounds = starts + [n]
    runs = tuple((s + 1, e - s) for s, e in zip(bounds, bounds[1:]))
    return FRunDecomposition(runs, tuple(s + 1 for s in starts) + (n + 1,))


def f_run_start_mask(perm, family: Family) -> np.ndarray:
    perm = np.asarray(perm)
    mask = np.zeros(perm.size, dtype=bool)
    mask[f_run_starts(perm, family)] = True
    return mask


def f_sort_with_starts(perm, family: Family):
    """Return ``(sorted_perm, start_flags)`` where the flags mark F-run starts
    in the output."""
    perm = as_permutation(perm)
    mask = f_run_start_mask(perm, family)
    block_id = np.cumsum(mask) - 1
    minima = np.minimum.reduceat(perm, np.flatnonzero(mask))
    order = np.argsort(minima[block_id], kind="stable")
    return perm[order], mask[order]


def f_sort(perm, family: Family) -> np.ndarray:
    """Sort the F-runs of ``perm`` so their minimal entries increase."""
    return f_sort_with_starts(perm, family)[0]
