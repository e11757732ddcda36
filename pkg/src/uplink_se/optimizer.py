"""Exhaustive search over optimized-scheme layouts.

A layout partitions the cells into transmission intervals and each interval
into decoding clusters.  Time fractions are not searched: for fixed
clusters they are proportional to the interval rates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Iterator, Sequence

from .asymptotic import AsymptoticInputs, OsConfiguration, optimal_os_zetas
from .errors import CapacityError, ConfigError

MAX_CELLS = 12


def restricted_growth_strings(n: int) -> Iterator[tuple[int, ...]]:
    """All a_0..a_{n-1} with a_0 = 0 and a_i <= 1 + max(a_0..a_{i-1}), lexicographically."""
    if n == 0:
        yield ()
        return
    a = [0] * n
    top = [0] * n  # top[i] = max(a_0..a_i)

    def rec(i):
        if i == n:
            yield tuple(a)
            return
        for v in range(top[i - 1] + 2):
            a[i] = v
            top[i] = max(top[i - 1], v)
            yield from rec(i + 1)

    yield from rec(1)


def set_partitions(items: Sequence) -> Iterator[tuple[tuple, ...]]:
    """Set partitions of ``items`` in restricted-growth order; blocks ordered by first element."""
    items = tuple(items)
    for rgs in restricted_growth_strings(len(items)):
        blocks = [[] for _ in range(max(rgs, default=-1) + 1)]
        for item, g in zip(items, rgs):
            blocks[g].append(item)
        yield tuple(tuple(b) for b in blocks)


@lru_cache(maxsize=None)
def bell(n: int) -> int:
    return 1 if n == 0 else sum(comb(n - 1, j) * bell(j) for j in range(n))


@lru_cache(maxsize=None)
def configuration_count(cells: int) -> int:
    """Number of (interval partition, cluster partitions) pairs.

    Splitting off the interval holding the first cell: c(n) = sum_j C(n-1, j-1) B(j) c(n-j).
    """
    if cells == 0:
        return 1
    return sum(comb(cells - 1, j - 1) * bell(j) * configuration_count(cells - j) for j in range(1, cells + 1))


def check_capacity(cells: int) -> None:
    if cells < 1:
        raise ConfigError(f"need at least one cell, got {cells}")
    if cells > MAX_CELLS:
        n = configuration_count(cells)
        raise CapacityError(f"{cells} cells give {n:.3e} configurations; the search is capped at L = {MAX_CELLS}", n)


def enumerate_configurations(cells: int) -> Iterator[OsConfiguration]:
    """Every layout exactly once, in canonical order (zetas unset)."""
    check_capacity(cells)
    for intervals in set_partitions(range(cells)):
        for clusters in itertools.product(*(list(set_partitions(i)) for i in intervals)):
            yield OsConfiguration(intervals, clusters)


@dataclass(frozen=True)
class RankedConfiguration:
    configuration: OsConfiguration
    se_bits: float
    std_error: float
    index: int  # position in canonical order


@dataclass(frozen=True)
class OptimizationResult:
    best: OsConfiguration
    se_bits: float
    std_error: float
    table: tuple  # RankedConfiguration, best first


def optimize_os(inputs: AsymptoticInputs) -> OptimizationResult:
    """Evaluate every layout on the shared samples and rank them.

    Ties keep canonical order, so the first-enumerated layout wins.
    """
    rows = []
    for idx, cfg in enumerate(enumerate_configurations(inputs.cells)):
        zetas, rep = optimal_os_zetas(inputs, cfg)
        rows.append(RankedConfiguration(cfg.with_zetas(zetas), rep.se_bits, rep.std_error, idx))
    rows.sort(key=lambda r: -r.se_bits)  # stable
    top = rows[0]
    return OptimizationResult(top.configuration, top.se_bits, top.std_error, tuple(rows))
