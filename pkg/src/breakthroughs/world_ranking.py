"""Percentile membership over explicit citation lists.

The world list is ranked by citations, most cited first, and the top ``x``
set takes papers down the list until it holds ``x * len(world)`` papers.
Papers tied at the cut share the remaining quota fractionally, so the
world's own top-x share is exactly ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .citation_model import PercentileObservation, check_level
from .errors import DomainError, EmptyInputError


@dataclass(frozen=True)
class TopSetCut:
    threshold_citations: int
    strict_count: int
    tie_quota: Fraction

    def __iter__(self):
        # Allows ``threshold, strict, quota = top_set_threshold(...)``.
        return iter((self.threshold_citations, self.strict_count, self.tie_quota))


def _as_citations(world: Sequence[int] | np.ndarray) -> np.ndarray:
    arr = np.asarray(world)
    if arr.ndim != 1 or arr.size == 0:
        raise EmptyInputError("world citation list must be a non-empty 1-d sequence")
    if arr.dtype.kind not in "iu":
        if arr.dtype.kind == "f" and np.all(np.floor(arr) == arr):
            arr = arr.astype(np.int64)
        else:
            raise DomainError("citation counts must be integers")
    if arr.min() < 0:
        raise DomainError("citation counts must be non-negative")
    return arr


def top_set_threshold(world: Sequence[int] | np.ndarray, level: float) -> TopSetCut:
    """Cut of the world top-``level`` set.

    Returns the smallest citation value ``c`` with at most ``level * n``
    papers strictly above it, the number of those papers, and the share of
    the tied papers (citations == c) that still belongs to the top set.
    """
    check_level(level)
    arr = _as_citations(world)
    # The level is taken as the decimal it prints as: 0.4 is exactly 2/5.
    quota = Fraction(repr(float(level))) * arr.size
    k = int(quota)  # floor; quota < n because level < 1
    # Descending rank k (0-based) is ascending rank n-1-k.
    c = int(np.partition(arr, arr.size - 1 - k)[arr.size - 1 - k])
    strict = int(np.count_nonzero(arr > c))
    return TopSetCut(c, strict, quota - strict)


def membership_proportion(
    world: Sequence[int] | np.ndarray,
    subset_index: Iterable[int],
    level: float,
) -> PercentileObservation:
    """Share of the subset's papers inside the world top-``level`` set."""
    arr = _as_citations(world)
    idx = np.fromiter(set(subset_index), dtype=np.int64)
    if idx.size == 0:
        raise EmptyInputError("subset must contain at least one paper")
    if idx.min() < 0 or idx.max() >= arr.size:
        raise DomainError("subset positions fall outside the world list")

    cut = top_set_threshold(arr, level)
    sub = arr[idx]
    sub_strict = int(np.count_nonzero(sub > cut.threshold_citations))
    sub_tied = int(np.count_nonzero(sub == cut.threshold_citations))
    world_tied = int(np.count_nonzero(arr == cut.threshold_citations))
    share = sub_strict + cut.tie_quota * Fraction(sub_tied, world_tied)
    return PercentileObservation(level, float(share / idx.size))
