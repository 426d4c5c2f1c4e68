import math
from collections import Counter

import pytest

from convexchain.counting import (
    brute_force_enum,
    count_by_length,
    count_lines_k,
    erdos_lehner_ratio,
    max_vertices,
)

# Exact values from the independent max-vertices DP, spot-checked by hand
# (e.g. 12 distinct primitive directions already need coordinate sum >= 44,
# so M(20,20) = 11 is provably right).
MAX_VERTICES_KNOWN = {
    (1, 1): 2,
    (1, 2): 2,
    (2, 2): 3,
    (3, 3): 3,
    (4, 4): 4,
    (5, 5): 5,
    (10, 10): 7,
    (20, 20): 11,
}


@pytest.fixture(scope="module")
def table8():
    return count_lines_k(8, 8, 10)


def test_tiny_counts(table8):
    assert {k: table8.p(1, 1, k) for k in (1, 2)} == {1: 1, 2: 1}
    assert {k: table8.p(2, 2, k) for k in (1, 2, 3)} == {1: 1, 2: 3, 3: 1}
    for n in range(1, 9):
        assert table8.p(n, n, 1) == 1


def test_oracle_equivalence_small(table8):
    for n1, n2 in [(1, 1), (2, 2), (3, 3), (2, 5), (4, 3), (5, 5)]:
        by_k = Counter(om.vertex_count for om in brute_force_enum(n1, n2))
        dp = {k: table8.p(n1, n2, k) for k in range(1, 11) if table8.p(n1, n2, k)}
        assert dp == dict(by_k), (n1, n2)


def test_brute_force_is_duplicate_free():
    lines = brute_force_enum(4, 4)
    assert len(lines) == len(set(lines))
    assert all(om.endpoint() == (4, 4) for om in lines)


def test_brute_force_cap():
    with pytest.raises(ValueError):
        brute_force_enum(13, 2)


def test_symmetry(table8):
    for n1 in range(1, 9):
        for n2 in range(1, 9):
            for k in range(1, 11):
                assert table8.p(n1, n2, k) == table8.p(n2, n1, k)


def test_totals_match_sum_over_k(table8):
    for n1, n2 in [(3, 3), (6, 4), (8, 8)]:
        assert table8.total(n1, n2) == len(brute_force_enum(n1, n2))


def test_support_window(table8):
    # p(n,n;k) > 0 exactly for 1 <= k <= M(n,n)
    for n in (2, 3, 4, 5, 8):
        m = max_vertices(n, n)
        for k in range(1, 11):
            assert (table8.p(n, n, k) > 0) == (1 <= k <= m), (n, k)


def test_max_vertices_known_values():
    for (n1, n2), m in MAX_VERTICES_KNOWN.items():
        assert max_vertices(n1, n2) == m


def test_max_vertices_matches_brute_force():
    for n1, n2 in [(1, 1), (3, 2), (4, 4), (6, 5)]:
        best = max(om.vertex_count for om in brute_force_enum(n1, n2))
        assert max_vertices(n1, n2) == best


def test_resource_guard():
    with pytest.raises(ResourceWarning, match="budget"):
        count_lines_k(60, 60, 8, op_budget=1000)
    with pytest.raises(ResourceWarning):
        max_vertices(500, 500, op_budget=1000)


def test_erdos_lehner_trivial():
    assert erdos_lehner_ratio(1, 1) == 1.0


def test_two_edge_count_closed_form():
    # a 2-edge line is determined by its first edge (v, m): the remainder to
    # (n,n) then fixes the second edge, and the slope constraint reduces to
    # v1 > v2.  So p(n,n;2) = sum over primitive v1>v2 of floor(n/v1).
    for n in (10, 25, 60):
        expected = 0
        for v1 in range(1, n + 1):
            for v2 in range(v1):
                if math.gcd(v1, v2) == 1:
                    expected += n // v1
        assert count_lines_k(n, n, 2).p(n, n, 2) == expected


def test_frozen_counts_at_sixty():
    # frozen from two independent enumerations (closed-form first-edge sum for
    # k=2; first-edge x second-edge loop for k=3) that both match the table
    tab = count_lines_k(60, 60, 3)
    assert tab.p(60, 60, 2) == 1830
    assert tab.p(60, 60, 3) == 589670
    assert count_lines_k(30, 30, 3).p(30, 30, 3) == 39585


def test_erdos_lehner_uses_table():
    tab = count_lines_k(10, 10, 3)
    r = erdos_lehner_ratio(10, 2, table=tab)
    assert r == erdos_lehner_ratio(10, 2)
    assert 0.5 < r < 1.5


def test_count_by_length_smallest_bucket():
    assert count_by_length(1.5) == {(1, 1): 3}


def test_count_by_length_excludes_empty_line():
    buckets = count_by_length(3.2)
    assert all(k >= 1 for (_, k) in buckets)
    assert all(b >= 1 for (b, _) in buckets)  # bucket 0 empty: length >= 1


def test_count_by_length_order_invariance():
    assert count_by_length(10.0, "slope") == count_by_length(10.0, "length")


def test_count_by_length_caps():
    with pytest.raises(ValueError):
        count_by_length(20.0)
    with pytest.raises(ValueError):
        count_by_length(5.0, "sideways")
