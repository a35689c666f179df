import itertools
import math
from decimal import Decimal, getcontext

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from kuramoto_hardness.partition import (
    PartitionInstance,
    Side,
    Status,
    Variant,
    all_subsets_with_zero,
    balance_gap,
    kk_differencing,
    kuramoto_balance,
    kuramoto_partition_feasible,
    kuramoto_partition_terms,
    pinned_rank,
    solve_partition_bruteforce,
    solve_partition_dp,
    surd_gap_exact,
    surd_partition,
)

small_values = st.lists(st.integers(1, 12), min_size=1, max_size=9)


def naive_partitionable(values):
    total = sum(values)
    return total % 2 == 0 and any(
        2 * sum(c) == total for r in range(len(values) + 1) for c in itertools.combinations(values, r)
    )


# ---------------------------------------------------------------- integer

def test_dp_examples():
    assert solve_partition_dp([1, 1]).subset == (0,)
    assert solve_partition_dp([2, 1]) is None
    assert solve_partition_dp([3, 1, 1, 1]).subset == (0,)


def test_bruteforce_examples():
    assert solve_partition_bruteforce([1, 1]) is not None
    assert solve_partition_bruteforce([1, 2, 4]) is None
    assert solve_partition_bruteforce([3, 1, 1, 1]) is not None


@settings(max_examples=300, deadline=None)
@given(small_values)
def test_dp_bruteforce_and_naive_agree(values):
    dp = solve_partition_dp(values)
    bf = solve_partition_bruteforce(values)
    truth = naive_partitionable(values)
    assert (dp is not None) == (bf is not None) == truth
    for sol in (dp, bf):
        if sol is not None:
            assert 0 in sol.subset
            assert balance_gap(values, sol.subset) == 0


def test_dp_bound_and_validation():
    with pytest.raises(ValueError):
        solve_partition_dp([10**6, 10**6], bound=1000)
    with pytest.raises(ValueError):
        solve_partition_dp([1, 0])
    with pytest.raises(ValueError):
        solve_partition_bruteforce(list(range(1, 30)))


# ---------------------------------------------------------------- differencing

def test_kk_examples():
    subset, gap = kk_differencing([math.sqrt(3), math.sqrt(2), 1.0])
    assert gap == pytest.approx(1 + math.sqrt(2) - math.sqrt(3), abs=1e-12)
    assert kk_differencing([1, 1])[1] == 0
    subset, gap = kk_differencing([5, 4, 3, 2])
    assert gap == 0 and subset == (0, 3)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.0, 100.0), min_size=1, max_size=10))
def test_kk_gap_is_realized_and_bounded(values):
    subset, gap = kk_differencing(values)
    assert 0 in subset
    assert balance_gap(values, subset) == pytest.approx(gap, abs=1e-9)
    best = min(balance_gap(values, s) for s in all_subsets_with_zero(len(values)))
    assert best <= gap + 1e-9
    assert gap <= max(values) + 1e-9


# ---------------------------------------------------------------- kuramoto variant

def test_terms_examples():
    for b in (1, 2, 5, 7):
        expected = b / math.sqrt(1 + b * b)
        assert kuramoto_partition_terms(b, 0.0, Side.S) == pytest.approx(expected)
        assert kuramoto_partition_terms(b, 0.0, Side.SC) == pytest.approx(expected)
    assert kuramoto_partition_terms(2, 0.5, Side.S) == pytest.approx(math.sqrt(3 / 7), abs=1e-12)
    assert kuramoto_partition_terms(2, 0.5, Side.SC) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 8), st.data())
def test_terms_monotone_on_domain(n, data):
    b = data.draw(st.integers(2, n))
    e1, e2 = sorted(data.draw(st.lists(st.floats(0, 1 / n, exclude_max=True), min_size=2, max_size=2)))
    assume(e2 - e1 > 1e-9)
    assert kuramoto_partition_terms(b, e1, Side.S) > kuramoto_partition_terms(b, e2, Side.S)
    assert kuramoto_partition_terms(b, e1, Side.SC) < kuramoto_partition_terms(b, e2, Side.SC)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 5), st.data())
def test_balance_antisymmetry(n, data):
    values = sorted(data.draw(st.lists(st.integers(2, n), min_size=n, max_size=n))) + [n] * (2 * n)
    subset = data.draw(st.sets(st.integers(0, 3 * n - 1)))
    comp = [i for i in range(3 * n) if i not in subset]
    eps = data.draw(st.floats(0, 1 / n, exclude_max=True))
    assert kuramoto_balance(values, comp, -eps) == pytest.approx(-kuramoto_balance(values, subset, eps), abs=1e-12)


def _kuramoto_oracle(n, b, grid=400):
    """Independent scan: sign change of the ungrouped balance on an eps grid."""
    values = list(b) + [n] * (2 * n)
    eps = np.linspace(0, 1 / n, grid, endpoint=False)
    for r in range(len(values) + 1):
        for S in itertools.combinations(range(len(values)), r):
            inside = set(S)
            d = sum(
                kuramoto_partition_terms(v, eps, Side.S if i in inside else Side.SC) * (1 if i in inside else -1)
                for i, v in enumerate(values)
            )
            if abs(d[0]) < 1e-12 or np.any(np.sign(d[:-1]) != np.sign(d[1:])):
                return True
    return False


def test_kuramoto_examples():
    ans = kuramoto_partition_feasible(2, [2, 2])
    assert ans.status is Status.YES and len(ans.solution.subset) == 3 and ans.solution.epsilon == 0
    ans = kuramoto_partition_feasible(3, [3, 3, 3])
    assert ans.status is Status.NO and ans.exhaustive and ans.checked == 2**9


@pytest.mark.parametrize("n,b", [(2, [2, 2]), (3, [2, 2, 2]), (3, [2, 3, 3]), (3, [3, 3, 3]), (3, [2, 2, 3])])
def test_kuramoto_against_grid_oracle(n, b):
    ans = kuramoto_partition_feasible(n, b)
    assert (ans.status is Status.YES) == _kuramoto_oracle(n, b)
    if ans.solution is not None:
        assert abs(kuramoto_balance(list(b) + [n] * (2 * n), ans.solution.subset, ans.solution.epsilon)) < 1e-12
        assert 0 <= ans.solution.epsilon < 1 / n


def test_kuramoto_beam_fallback():
    ans = kuramoto_partition_feasible(4, [2, 2, 2, 2], exhaustive_limit=8)
    assert not ans.exhaustive and ans.status in (Status.YES, Status.NOT_FOUND)
    if ans.status is Status.YES:
        assert ans.solution.achieved_gap < 1e-12


def test_kuramoto_instance_validation():
    with pytest.raises(ValueError):
        kuramoto_partition_feasible(2, [1, 2])
    with pytest.raises(ValueError):
        kuramoto_partition_feasible(2, [2, 3])
    with pytest.raises(ValueError):
        PartitionInstance((3, 2, 2), Variant.KURAMOTO, 3)


# ---------------------------------------------------------------- surd variant

def test_surd_examples():
    ans = surd_partition(2, [1, 1])
    assert ans.status is Status.YES and ans.solution.subset == (0,) and ans.solution.achieved_gap == 0
    ans = surd_partition(3, [1, 2, 3])
    assert ans.status is Status.YES and ans.solution.subset == (0, 1)
    assert ans.solution.achieved_gap == pytest.approx(1 + math.sqrt(2) - math.sqrt(3), abs=1e-12)
    assert surd_partition(1, [1]).status is Status.NO


def test_surd_exact_boundary():
    # sqrt(1)*3 - sqrt(4) = 1 exactly: strict inequality fails
    assert surd_gap_exact([1, 1, 1, 4], (0, 1, 2)) == (0, 1.0)
    assert surd_partition(4, [1, 1, 1, 4]).status is Status.NO


def _decimal_gap(values, subset):
    getcontext().prec = 50
    return abs(sum((Decimal(v).sqrt() if i in subset else -Decimal(v).sqrt()) for i, v in enumerate(values)))


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 7), st.data())
def test_surd_matches_decimal_bruteforce(n, data):
    values = sorted(data.draw(st.lists(st.integers(1, n), min_size=n, max_size=n)))
    truth = any(_decimal_gap(values, set(S)) < 1 for S in all_subsets_with_zero(n))
    ans = surd_partition(n, values)
    assert (ans.status is Status.YES) == truth
    if ans.solution is not None:
        assert _decimal_gap(values, set(ans.solution.subset)) < 1


def test_pinned_rank_roundtrip():
    subsets = list(all_subsets_with_zero(5))
    assert len(subsets) == 16
    assert [pinned_rank(s) for s in subsets] == list(range(16))
