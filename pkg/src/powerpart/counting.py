"""Exact counts p^k(n) of partitions of n into perfect k-th powers.

The counts are the coefficients of prod_{m>=1} (1 - z^(m^k))^(-1).  They are
computed with the unbounded-knapsack recurrence: for each part p = m^k in
increasing order, counts[j] += counts[j - p] for j = p..N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import PreconditionError, ResourceError
from .special import zeta_real

_MANTISSA_BITS = 96


@dataclass(frozen=True)
class CountTable:
    k: int
    limit: int
    counts: tuple[int, ...]

    def __getitem__(self, n: int) -> int:
        return self.counts[n]

    def __len__(self) -> int:
        return len(self.counts)


def parts(k: int, limit: int) -> list[int]:
    """All perfect k-th powers m^k <= limit, m >= 1, increasing."""
    out = []
    m = 1
    while m**k <= limit:
        out.append(m**k)
        m += 1
    return out


def _check(k: int, n: int) -> None:
    if k < 1:
        raise PreconditionError(f"k must be >= 1, got {k}")
    if n < 0:
        raise PreconditionError(f"n must be >= 0, got {n}")


@lru_cache(maxsize=None)
def _growth_constant(k: int) -> float:
    if k == 1:
        return math.pi * math.sqrt(2.0 / 3.0)
    z = float(zeta_real(Fraction(k + 1, k), dps=20))
    return (k + 1) * (math.gamma(1.0 + 1.0 / k) * z / k) ** (k / (k + 1))


def _log_count_upper(k: int, n: int) -> float:
    # leading-order growth of log p^k(n); used only for memory estimates
    return _growth_constant(k) * n ** (1.0 / (k + 1))


def estimated_table_bytes(k: int, limit: int) -> int:
    """Rough memory footprint of a count table (Python int objects plus array slots)."""
    bits = _log_count_upper(k, limit) / math.log(2)
    per_entry = 28 + 8 + bits / 16  # average over the table; the largest entry has ``bits`` bits
    return int((limit + 1) * per_entry)


def _dp(k: int, limit: int) -> np.ndarray:
    counts = np.zeros(limit + 1, dtype=object)
    counts[:] = 0
    counts[0] = 1
    for p in parts(k, limit):
        # block-wise in-place update keeps the sequential dependence on counts[j - p]
        for start in range(p, limit + 1, p):
            stop = min(start + p, limit + 1)
            counts[start:stop] += counts[start - p:stop - p]
    return counts


def count_table(k: int, limit: int, max_bytes: int | None = None) -> CountTable:
    """p^k(n) for every n in 0..limit, from a single DP pass.

    With ``max_bytes`` set, a table whose estimated footprint exceeds the budget
    is not attempted; instead a ResourceError is raised whose ``partial`` is the
    largest prefix table that fits.
    """
    _check(k, limit)
    if max_bytes is not None and estimated_table_bytes(k, limit) > max_bytes:
        lo, hi = 0, limit
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if estimated_table_bytes(k, mid) <= max_bytes:
                lo = mid
            else:
                hi = mid - 1
        prefix = CountTable(k, lo, tuple(_dp(k, lo).tolist()))
        raise ResourceError(
            f"count table k={k}, N={limit} exceeds the memory budget of {max_bytes} bytes; "
            f"largest completed prefix is N={lo}",
            partial=prefix,
        )
    return CountTable(k, limit, tuple(_dp(k, limit).tolist()))


def count(k: int, n: int) -> int:
    """p^k(n) exactly."""
    _check(k, n)
    return int(_dp(k, n)[n])


def log_big(value: int) -> float:
    """Natural log of a positive integer of any size, from its top 96 bits."""
    assert value > 0, "log of a non-positive count"
    shift = value.bit_length() - _MANTISSA_BITS
    if shift <= 0:
        return math.log(value)
    return math.log(value >> shift) + shift * math.log(2)


def log_count(k: int, n: int) -> float:
    """Natural log of p^k(n)."""
    return log_big(count(k, n))
