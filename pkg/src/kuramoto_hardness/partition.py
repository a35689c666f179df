"""Solvers for the three partition problems behind the gadget reductions.

* Integer partition: split positive integers into two equal-sum halves.
* Kuramoto partition: values ``b_i`` padded with ``n`` up to ``3n`` entries;
  find ``S`` and ``0 <= eps < 1/n`` balancing the surd terms
  ``sqrt(b^2 (1 - eps^2) / (1 + b^2 +/- 2 b eps))``.
* Surd partition: split ``sqrt(b_i)`` so the two sums differ by less than 1.

Subset searches enumerate in a fixed rank order (index 0 pinned into S,
remaining membership read from the bits of an increasing counter) so the
first witness found is deterministic.
"""
from __future__ import annotations

import enum
import heapq
import logging
import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from typing import Iterator, Sequence

import numpy as np

from ._roots import bisect_root

log = logging.getLogger(__name__)

DP_SUM_BOUND = 10**7
BRUTEFORCE_MAX = 24
EXHAUSTIVE_MAX = 24
KURAMOTO_EPS_TOL = 1e-12
SURD_GUARD = 1e-9
_CHUNK = 1 << 15


class Variant(str, enum.Enum):
    INTEGER = "integer"
    KURAMOTO = "kuramoto"
    SURD = "surd"


class Status(str, enum.Enum):
    YES = "Yes"
    NO = "No"
    NOT_FOUND = "NotFound"
    UNRESOLVED = "Unresolved"

    def __str__(self):
        return self.value


class Side(str, enum.Enum):
    S = "S"
    SC = "Sc"


@dataclass(frozen=True)
class PartitionInstance:
    values: tuple[int, ...]
    variant: Variant = Variant.INTEGER
    n: int | None = None

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "variant", Variant(self.variant))
        if not vals:
            raise ValueError("instance needs at least one value")
        if self.variant is Variant.INTEGER:
            if min(vals) < 1:
                raise ValueError("partition values must be positive integers")
            return
        n = len(vals) if self.n is None else int(self.n)
        object.__setattr__(self, "n", n)
        lo = 2 if self.variant is Variant.KURAMOTO else 1
        if len(vals) != n:
            raise ValueError(f"expected {n} values, got {len(vals)}")
        if list(vals) != sorted(vals):
            raise ValueError("values must be non-decreasing")
        if vals[0] < lo or vals[-1] > n:
            raise ValueError(f"values must lie in [{lo}, {n}]")

    def padded(self) -> tuple[int, ...]:
        """Kuramoto values extended with ``n`` up to length ``3n``."""
        if self.variant is not Variant.KURAMOTO:
            return self.values
        return self.values + (self.n,) * (2 * self.n)


@dataclass(frozen=True)
class PartitionSolution:
    subset: tuple[int, ...]
    epsilon: float | None = None
    achieved_gap: float = 0.0

    def complement(self, m: int) -> tuple[int, ...]:
        s = set(self.subset)
        return tuple(i for i in range(m) if i not in s)


@dataclass(frozen=True)
class PartitionAnswer:
    status: Status
    solution: PartitionSolution | None = None
    exhaustive: bool = True
    checked: int = 0

    def __bool__(self):
        return self.status is Status.YES


def _integer_values(inst) -> list[int]:
    if isinstance(inst, PartitionInstance):
        return list(inst.values)
    vals = [int(v) for v in inst]
    if not vals or min(vals) < 1:
        raise ValueError("partition values must be positive integers")
    return vals


def _pinned_subsets(m: int) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Chunks of (rank, membership) for subsets of range(m) containing 0."""
    free = m - 1
    total = 1 << free
    shifts = np.arange(free, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        ranks = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        member = np.ones((len(ranks), m), dtype=bool)
        member[:, 1:] = (ranks[:, None] >> shifts) & 1
        yield ranks, member


def _subset(member_row: np.ndarray) -> tuple[int, ...]:
    return tuple(int(i) for i in np.nonzero(member_row)[0])


# ------------------------------------------------------------ integer variant

def solve_partition_dp(inst, bound: int = DP_SUM_BOUND) -> PartitionSolution | None:
    """Subset-sum table up to half the total, with the witness read back.

    ``parent[s]`` is the item whose addition first made sum ``s`` reachable;
    the sum it extended was reachable before that item, so walking parents
    from the target visits strictly earlier, distinct items.
    """
    vals = _integer_values(inst)
    total = sum(vals)
    if total > bound:
        raise ValueError(f"sum {total} exceeds the configured bound {bound}")
    if total % 2:
        return None
    target = total // 2
    reach = np.zeros(target + 1, dtype=bool)
    reach[0] = True
    parent = np.full(target + 1, -1, dtype=np.int64)
    for i, a in enumerate(vals):
        if a > target:
            continue
        new = reach[: target + 1 - a] & ~reach[a:]
        idx = np.nonzero(new)[0] + a
        reach[idx] = True
        parent[idx] = i
        if reach[target]:
            break
    if not reach[target]:
        return None
    subset = []
    s = target
    while s > 0:
        i = int(parent[s])
        subset.append(i)
        s -= vals[i]
    if 0 not in subset:
        subset = [i for i in range(len(vals)) if i not in set(subset)]
    return PartitionSolution(tuple(sorted(subset)), None, 0.0)


def solve_partition_bruteforce(inst) -> PartitionSolution | None:
    vals = _integer_values(inst)
    m = len(vals)
    if m > BRUTEFORCE_MAX:
        raise ValueError(f"brute force is limited to {BRUTEFORCE_MAX} values, got {m}")
    total = sum(vals)
    if total % 2:
        return None
    a = np.array(vals, dtype=np.int64)
    for _, member in _pinned_subsets(m):
        hits = np.nonzero(2 * (member @ a) == total)[0]
        if hits.size:
            return PartitionSolution(_subset(member[hits[0]]), None, 0.0)
    return None


# ------------------------------------------------------------ differencing

def kk_differencing(values: Sequence[float]) -> tuple[tuple[int, ...], float]:
    """Largest differencing method.

    The two largest entries are repeatedly replaced by their difference,
    which commits them to opposite sides. Returns the side holding index 0
    and the final difference.
    """
    if len(values) == 0:
        raise ValueError("need at least one value")
    heap = [(-float(v), i, (i,), ()) for i, v in enumerate(values)]
    heapq.heapify(heap)
    counter = len(values)
    while len(heap) > 1:
        va, _, plus_a, minus_a = heapq.heappop(heap)
        vb, _, plus_b, minus_b = heapq.heappop(heap)
        # va <= vb as negatives: a is the larger value
        heapq.heappush(heap, (va - vb, counter, plus_a + minus_b, minus_a + plus_b))
        counter += 1
    value, _, plus, minus = heap[0]
    side = plus if 0 in plus else minus
    return tuple(sorted(side)), abs(value)


# ------------------------------------------------------------ Kuramoto variant

def kuramoto_partition_terms(b, eps, side: Side | str = Side.S):
    """One summand of the balance: ``sqrt(b^2 (1-eps^2) / (1 + b^2 + 2 s b eps))``.

    ``s = +1`` on the S side and ``-1`` on the complement. Vectorized.
    """
    sign = 1.0 if Side(side) is Side.S else -1.0
    b = np.asarray(b, dtype=float)
    eps = np.asarray(eps, dtype=float)
    out = np.sqrt(b * b * (1.0 - eps * eps) / (1.0 + b * b + sign * 2.0 * b * eps))
    return float(out) if out.ndim == 0 else out


def kuramoto_balance(values: Sequence[int], subset, eps: float) -> float:
    """``D(eps)``: S-side terms minus complement-side terms.

    Terms are grouped by distinct value with integer multiplicities, so a
    balance that cancels value-for-value comes out as exactly 0.
    """
    inside = set(int(i) for i in subset)
    counts: dict[int, list[int]] = {}
    for i, b in enumerate(values):
        c = counts.setdefault(int(b), [0, 0])
        c[0 if i in inside else 1] += 1
    total = 0.0
    for b, (cs, cc) in sorted(counts.items()):
        ts = kuramoto_partition_terms(b, eps, Side.S)
        tc = kuramoto_partition_terms(b, eps, Side.SC)
        if ts == tc:
            total += (cs - cc) * ts
        else:
            total += cs * ts - cc * tc
    return total


def _solve_eps(values, subset, n: int) -> float:
    d = lambda e: kuramoto_balance(values, subset, e)  # noqa: E731
    if abs(d(0.0)) < KURAMOTO_EPS_TOL:
        return 0.0
    return bisect_root(d, 0.0, 1.0 / n, ftol=KURAMOTO_EPS_TOL)


def _kuramoto_gate_tables(values: Sequence[int], n: int):
    distinct = sorted(set(values))
    onehot = np.array([[1 if v == d else 0 for d in distinct] for v in values], dtype=np.int64)
    d_arr = np.array(distinct, dtype=float)
    t0 = kuramoto_partition_terms(d_arr, 0.0, Side.S)
    ts1 = kuramoto_partition_terms(d_arr, 1.0 / n, Side.S)
    tc1 = kuramoto_partition_terms(d_arr, 1.0 / n, Side.SC)
    return onehot, np.atleast_1d(t0), np.atleast_1d(ts1), np.atleast_1d(tc1)


def kuramoto_partition_feasible(
    n: int,
    b: Sequence[int],
    exhaustive_limit: int = EXHAUSTIVE_MAX,
    beam_width: int = 512,
) -> PartitionAnswer:
    """Search for ``(S, eps)`` solving the Kuramoto partition balance.

    A subset qualifies when ``D(0) >= 0`` and ``D(1/n) < 0``; since ``D`` is
    continuous and decreasing on ``[0, 1/n]`` a root then exists and is
    located by bisection. Subsets are ranked with index 0 pinned; each rank
    is tried as S first, then as its complement. Exhaustive (definitive)
    when ``3n <= exhaustive_limit``; otherwise a differencing-guided beam
    that can only report Yes or NotFound.
    """
    inst = PartitionInstance(tuple(b), Variant.KURAMOTO, n)
    values = inst.padded()
    m = len(values)
    if m > exhaustive_limit:
        return _kuramoto_beam(values, n, beam_width)
    onehot, t0, ts1, tc1 = _kuramoto_gate_tables(values, n)
    total_counts = onehot.sum(axis=0)
    checked = 0
    for _, member in _pinned_subsets(m):
        cnt_s = member.astype(np.int64) @ onehot
        cnt_c = total_counts - cnt_s
        d0 = (cnt_s - cnt_c) @ t0
        d1_s = cnt_s @ ts1 - cnt_c @ tc1
        d1_c = cnt_c @ ts1 - cnt_s @ tc1
        ok_s = (d0 >= 0) & (d1_s < 0)
        ok_c = (-d0 >= 0) & (d1_c < 0)
        checked += 2 * len(member)
        hit = np.nonzero(ok_s | ok_c)[0]
        if hit.size:
            row = member[hit[0]]
            subset = _subset(row) if ok_s[hit[0]] else _subset(~row)
            eps = _solve_eps(values, subset, n)
            gap = abs(kuramoto_balance(values, subset, eps))
            return PartitionAnswer(Status.YES, PartitionSolution(subset, eps, gap), True, checked)
    return PartitionAnswer(Status.NO, None, True, checked)


def _kuramoto_beam(values: Sequence[int], n: int, width: int) -> PartitionAnswer:
    m = len(values)
    t0 = kuramoto_partition_terms(np.array(values, dtype=float), 0.0, Side.S)
    order = np.argsort(-t0, kind="stable")
    # partial assignments scored by |partial D(0)|
    beam: list[tuple[float, tuple[int, ...]]] = [(0.0, ())]
    for idx in order:
        grown = []
        for d, assigned in beam:
            grown.append((d + t0[idx], assigned + (int(idx),)))
            grown.append((d - t0[idx], assigned))
        grown.sort(key=lambda x: (abs(x[0]), x[1]))
        beam = grown[:width]
    kk_subset, _ = kk_differencing(t0)
    candidates = [tuple(sorted(a)) for _, a in beam] + [kk_subset]
    checked = 0
    for subset in candidates:
        comp = tuple(i for i in range(m) if i not in set(subset))
        for s in (subset, comp):
            checked += 1
            if kuramoto_balance(values, s, 0.0) >= 0 and kuramoto_balance(values, s, 1.0 / n) < 0:
                eps = _solve_eps(values, s, n)
                gap = abs(kuramoto_balance(values, s, eps))
                return PartitionAnswer(Status.YES, PartitionSolution(s, eps, gap), False, checked)
    return PartitionAnswer(Status.NOT_FOUND, None, False, checked)


# ------------------------------------------------------------ surd variant

def _squarefree_split(b: int) -> tuple[int, int]:
    """``(s, q)`` with ``b = s^2 q`` and ``q`` squarefree."""
    s, q = 1, b
    f = 2
    while f * f <= q:
        while q % (f * f) == 0:
            q //= f * f
            s *= f
        f += 1
    return s, q


def surd_gap_exact(values: Sequence[int], subset) -> tuple[int, float] | None:
    """Compare ``|sum_S sqrt(b) - sum_Sc sqrt(b)|`` against 1 without rounding doubt.

    Square roots of distinct squarefree integers are linearly independent
    over the rationals, so the signed sum equals +/-1 exactly only when every
    irrational coefficient cancels and the rational part is +/-1. Any other
    value is separated from 1 and is compared in 60-digit decimal
    arithmetic. Returns ``(sign of gap - 1, gap)`` or None when even that is
    too close to call.
    """
    inside = set(int(i) for i in subset)
    coeff: dict[int, int] = {}
    for i, b in enumerate(values):
        s, q = _squarefree_split(int(b))
        coeff[q] = coeff.get(q, 0) + (s if i in inside else -s)
    irrational = {q: c for q, c in coeff.items() if q != 1 and c != 0}
    rational = coeff.get(1, 0)
    if not irrational:
        gap = abs(rational)
        return (gap > 1) - (gap < 1), float(gap)
    with localcontext() as ctx:
        ctx.prec = 60
        total = Decimal(rational) + sum(Decimal(c) * Decimal(q).sqrt() for q, c in irrational.items())
        diff = abs(total) - 1
        if abs(diff) < Decimal("1e-50"):
            return None
        return (1 if diff > 0 else -1), float(abs(total))


def surd_partition(n: int, b: Sequence[int], exhaustive_limit: int = EXHAUSTIVE_MAX) -> PartitionAnswer:
    """First subset (in rank order) whose square-root sums differ by less than 1.

    Floating-point gaps within ``1e-9`` of 1 are re-decided by
    :func:`surd_gap_exact`. Instances longer than ``exhaustive_limit`` fall
    back to differencing and never answer No.
    """
    inst = PartitionInstance(tuple(b), Variant.SURD, n)
    values = inst.values
    m = len(values)
    roots = np.sqrt(np.array(values, dtype=float))
    unresolved = 0
    if m > exhaustive_limit:
        subset, gap = kk_differencing(roots)
        if gap < 1 - SURD_GUARD:
            return PartitionAnswer(Status.YES, PartitionSolution(subset, None, gap), False, 1)
        if gap < 1 + SURD_GUARD:
            exact = surd_gap_exact(values, subset)
            if exact is not None and exact[0] < 0:
                return PartitionAnswer(Status.YES, PartitionSolution(subset, None, exact[1]), False, 1)
        return PartitionAnswer(Status.NOT_FOUND, None, False, 1)

    total = roots.sum()
    checked = 0
    for _, member in _pinned_subsets(m):
        gaps = np.abs(2.0 * (member @ roots) - total)
        candidates = np.nonzero(gaps < 1 + SURD_GUARD)[0]
        for c in candidates:
            subset = _subset(member[c])
            if gaps[c] < 1 - SURD_GUARD:
                return PartitionAnswer(Status.YES, PartitionSolution(subset, None, float(gaps[c])), True,
                                       checked + int(c) + 1)
            exact = surd_gap_exact(values, subset)
            log.info("surd gap %.17g within guard band for S=%s; exact check -> %s", gaps[c], subset, exact)
            if exact is None:
                unresolved += 1
            elif exact[0] < 0:
                return PartitionAnswer(Status.YES, PartitionSolution(subset, None, exact[1]), True,
                                       checked + int(c) + 1)
        checked += len(member)
    if unresolved:
        return PartitionAnswer(Status.UNRESOLVED, None, True, checked)
    return PartitionAnswer(Status.NO, None, True, checked)


def pinned_rank(subset: Sequence[int]) -> int:
    """Rank of a subset containing 0 in the enumeration order used above."""
    if 0 not in subset:
        raise ValueError("rank is only defined for subsets containing index 0")
    return sum(1 << (i - 1) for i in subset if i > 0)


def all_subsets_with_zero(m: int) -> Iterator[tuple[int, ...]]:
    for _, member in _pinned_subsets(m):
        for row in member:
            yield _subset(row)


def balance_gap(values: Sequence[float], subset) -> float:
    inside = set(int(i) for i in subset)
    return abs(math.fsum(v if i in inside else -v for i, v in enumerate(values)))
