import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_partitions, euler_product_series
from powerpart.counting import (
    CountTable,
    count,
    count_table,
    estimated_table_bytes,
    log_big,
    log_count,
    parts,
)
from powerpart.errors import PreconditionError, ResourceError

# partitions into squares, n = 0..20
SQUARES = [1, 1, 1, 1, 2, 2, 2, 2, 3, 4, 4, 4, 5, 6, 6, 6, 8, 9, 10, 10, 12]


def test_squares_prefix():
    assert list(count_table(2, 20).counts) == SQUARES


def test_k1_is_ordinary_partitions():
    assert count(1, 100) == 190569292


def test_parts():
    assert parts(3, 100) == [1, 8, 27, 64]
    assert parts(2, 0) == []


@pytest.mark.parametrize("k", [2, 3, 4])
def test_matches_enumeration(k):
    table = count_table(k, 60)
    assert [table[n] for n in range(61)] == [brute_partitions(k, n) for n in range(61)]


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_matches_euler_product(k):
    assert list(count_table(k, 200).counts) == euler_product_series(k, 200)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.integers(0, 45))
def test_single_count_matches_enumeration(k, n):
    assert count(k, n) == brute_partitions(k, n)


@pytest.mark.parametrize("k", [2, 3])
def test_counts_non_decreasing(k):
    c = count_table(k, 3000).counts
    assert all(a <= b for a, b in zip(c, c[1:]))


def test_table_and_single_agree():
    table = count_table(2, 5000)
    assert table[5000] == count(2, 5000)
    assert len(table) == 5001
    assert isinstance(table, CountTable)


def test_log_big_of_huge_integer():
    value = 3**5000 + 7
    assert math.isclose(log_big(value), 5000 * math.log(3), rel_tol=1e-15)
    assert log_big(1) == 0.0


def test_log_count():
    assert math.isclose(log_count(2, 100), math.log(1116))


def test_memory_budget_reports_prefix():
    with pytest.raises(ResourceError) as info:
        count_table(2, 100000, max_bytes=20000)
    prefix = info.value.partial
    assert isinstance(prefix, CountTable)
    assert 0 < prefix.limit < 100000
    assert estimated_table_bytes(2, prefix.limit) <= 20000
    assert list(prefix.counts[:21]) == SQUARES


def test_negative_n_rejected():
    with pytest.raises(PreconditionError):
        count(2, -1)
    with pytest.raises(PreconditionError):
        count(0, 5)
