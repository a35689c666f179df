"""Reduction gadgets: graphs built from partition instances, their analytic
non-zero stable fixed points, and an end-to-end consistency check.

Weighted gadget for integers ``a_0..a_{m-1}`` with ``t = sum(a) / 2``::

    x --a_i-- u_i --a_i-- v_i --c*t*a_i-- y

Unweighted gadget for the padded Kuramoto values ``b_0..b_{3n-1}``::

    x -- u_i -- C_i (clique of b_i nodes) -- v_i -- y

with every clique node joined to both ``u_i`` and ``v_i``.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._roots import bisect_root
from .fixedpoint import (
    Classification,
    FixedPointRecord,
    SearchResult,
    make_record,
    multistart_search,
    residual,
)
from .graph import GadgetDescriptor, PhaseState, WeightedGraph, as_theta, circular_difference
from .partition import (
    PartitionInstance,
    PartitionSolution,
    Side,
    Status,
    Variant,
    kuramoto_balance,
    kuramoto_partition_feasible,
    kuramoto_partition_terms,
    solve_partition_dp,
)
from .stability import Verdict

DEFAULT_FACTOR = 2.0
BLOWUP_BOUND = 2000
WITNESS_RESIDUAL_TOL = 1e-9
EQ17_TOL = 1e-8
# structured seeds are enumerated only up to this many subsets
SEED_SUBSET_LIMIT = 4096


class InvalidWitnessError(ValueError):
    """A proposed witness does not produce a fixed point."""

    def __init__(self, message: str, residual_norm: float | None = None):
        super().__init__(message)
        self.residual_norm = residual_norm


class GadgetVariant(str, enum.Enum):
    WEIGHTED = "weighted"
    UNWEIGHTED = "unweighted"


# ------------------------------------------------------------ weighted gadget

def build_weighted_gadget(a: Sequence[int], factor: float = DEFAULT_FACTOR):
    inst = PartitionInstance(tuple(a))
    if not factor > 0:
        raise ValueError("factor must be positive")
    vals = inst.values
    m = len(vals)
    t = sum(vals) / 2.0
    x, y = 0, 2 * m + 1
    u = tuple(range(1, m + 1))
    v = tuple(range(m + 1, 2 * m + 1))
    edges = []
    for i, ai in enumerate(vals):
        edges.append((x, u[i], float(ai)))
        edges.append((u[i], v[i], float(ai)))
        edges.append((v[i], y, factor * t * ai))
    g = WeightedGraph(2 * m + 2, tuple(edges))
    desc = GadgetDescriptor("weighted", x, y, u, v, (), vals, t, float(factor))
    desc.check_cover(g.n)
    return g, desc


def weighted_balance_angle(t: float, factor: float = DEFAULT_FACTOR) -> float:
    """Angle ``alpha`` in (0, pi/2) with ``c t sin(pi - 2 alpha) = sin(alpha)``.

    Balance of forces at a ``v`` node. Closed form ``arccos(1 / (2 c t))``;
    solved by bisection here so the construction never leans on it.
    """
    ct = factor * t
    if not 2.0 * ct > 1.0:
        raise InvalidWitnessError(f"no non-zero balance angle when c*t = {ct} <= 1/2")
    f = lambda al: ct * math.sin(math.pi - 2.0 * al) - math.sin(al)  # noqa: E731
    return bisect_root(f, 1e-8, math.pi / 2, xtol=1e-16)


def weighted_placement(desc: GadgetDescriptor, subset) -> np.ndarray:
    """Phase angles of the analytic construction for any subset (not validated)."""
    inside = set(int(i) for i in subset)
    alpha = weighted_balance_angle(desc.param, desc.factor)
    theta = np.zeros(desc.node_count)
    theta[desc.y] = math.pi
    for i in range(len(desc.values)):
        sign = 1.0 if i in inside else -1.0
        theta[desc.u[i]] = sign * alpha
        theta[desc.v[i]] = sign * 2.0 * alpha
    return theta


def weighted_gadget_fixed_point(desc: GadgetDescriptor, subset) -> PhaseState:
    """x at 0, y at pi; ``u_i, v_i`` at ``alpha, 2 alpha`` for i in S, mirrored otherwise.

    Raises InvalidWitnessError if the state is not a fixed point, which
    happens exactly when S does not split the values evenly.
    """
    m = len(desc.values)
    if any(not 0 <= int(i) < m for i in subset):
        raise IndexError(f"subset indices must lie in [0, {m})")
    theta = weighted_placement(desc, subset)
    g, _ = build_weighted_gadget(desc.values, desc.factor)
    res = float(np.max(np.abs(residual(g, theta))))
    if not res < WITNESS_RESIDUAL_TOL:
        raise InvalidWitnessError(f"subset {tuple(subset)} is not a partition (residual {res:.3e})", res)
    return PhaseState(theta)


def build_clique_blowup(a: Sequence[int], bound: int = BLOWUP_BOUND) -> WeightedGraph:
    """Unit-weight graph with each ``u_i`` and ``v_i`` replaced by a clique of ``a_i`` nodes.

    Every copy keeps its original's neighbours: x joins all of U_i, y joins
    all of V_i, and U_i, V_i are joined completely.
    """
    vals = PartitionInstance(tuple(a)).values
    total = sum(vals)
    if total > bound:
        raise ValueError(f"sum {total} exceeds the configured bound {bound}")
    x = 0
    y = 1 + 2 * total
    # U cliques occupy 1..total and V cliques total+1..2*total, so all-ones
    # values reproduce the weighted gadget's numbering
    starts = np.cumsum([0] + list(vals[:-1])) + 1
    edges = []
    for ai, start in zip(vals, starts):
        U = list(range(int(start), int(start) + ai))
        V = [p + total for p in U]
        for group in (U, V):
            edges += [(p, q, 1.0) for p, q in itertools.combinations(group, 2)]
        edges += [(x, p, 1.0) for p in U]
        edges += [(p, q, 1.0) for p in U for q in V]
        edges += [(q, y, 1.0) for q in V]
    return WeightedGraph(2 + 2 * total, tuple(edges))


# ------------------------------------------------------------ unweighted gadget

def build_unweighted_gadget(n: int, b: Sequence[int]):
    inst = PartitionInstance(tuple(b), Variant.KURAMOTO, n)
    vals = inst.padded()
    N = len(vals)
    x = 0
    u = tuple(range(1, N + 1))
    v = tuple(range(N + 1, 2 * N + 1))
    y = 2 * N + 1
    nxt = y + 1
    cliques = []
    edges = []
    for i, bi in enumerate(vals):
        C = tuple(range(nxt, nxt + bi))
        nxt += bi
        cliques.append(C)
        edges.append((x, u[i], 1.0))
        edges.append((v[i], y, 1.0))
        edges += [(p, q, 1.0) for p, q in itertools.combinations(C, 2)]
        for c in C:
            edges.append((u[i], c, 1.0))
            edges.append((c, v[i], 1.0))
    g = WeightedGraph(nxt, tuple(edges))
    desc = GadgetDescriptor("unweighted", x, y, u, v, tuple(cliques), vals, float(n))
    desc.check_cover(g.n)
    return g, desc


def unweighted_angles(b, eps: float, side: Side | str):
    """``(gamma, alpha, beta)`` of the construction for one value ``b``."""
    gamma = 2.0 * math.acos(eps)
    alpha = math.asin(kuramoto_partition_terms(b, eps, side))
    if Side(side) is Side.S:
        beta = gamma / 2.0 - alpha
    else:
        beta = math.pi - gamma / 2.0 - alpha
    return gamma, alpha, beta


def unweighted_placement(desc: GadgetDescriptor, subset, eps: float) -> np.ndarray:
    """Phase angles of the construction for any ``(S, eps)`` (not validated)."""
    inside = set(int(i) for i in subset)
    theta = np.zeros(desc.node_count)
    gamma = 2.0 * math.acos(eps)
    theta[desc.y] = gamma
    for i, bi in enumerate(desc.values):
        if i in inside:
            _, al, be = unweighted_angles(bi, eps, Side.S)
            pos = (al, al + be, al + 2.0 * be)
        else:
            _, al, be = unweighted_angles(bi, eps, Side.SC)
            pos = (-al, -al - be, -al - 2.0 * be)
        theta[desc.u[i]] = pos[0]
        theta[list(desc.cliques[i])] = pos[1]
        theta[desc.v[i]] = pos[2]
    return theta


def unweighted_gadget_fixed_point(desc: GadgetDescriptor, subset, eps: float) -> PhaseState:
    """x at 0, y at ``gamma = 2 arccos(eps)``; path i bends through
    ``alpha_i``, ``alpha_i + beta_i``, ``alpha_i + 2 beta_i`` (mirrored for i
    outside S).

    Raises InvalidWitnessError when ``(S, eps)`` does not balance the surd
    terms to 1e-8, or when the resulting state is not a fixed point.
    """
    n = int(desc.param)
    N = len(desc.values)
    if any(not 0 <= int(i) < N for i in subset):
        raise IndexError(f"subset indices must lie in [0, {N})")
    if not 0.0 <= eps < 1.0 / n:
        raise InvalidWitnessError(f"eps = {eps} outside [0, 1/{n})")
    gap = kuramoto_balance(desc.values, subset, eps)
    if abs(gap) > EQ17_TOL:
        raise InvalidWitnessError(f"(S, eps) leaves a surd imbalance of {gap:.3e}")
    theta = unweighted_placement(desc, subset, eps)
    g, _ = build_unweighted_gadget(n, desc.values[:n])
    res = float(np.max(np.abs(residual(g, theta))))
    if not res < WITNESS_RESIDUAL_TOL:
        raise InvalidWitnessError(f"construction residual {res:.3e}", res)
    return PhaseState(theta)


# ------------------------------------------------------------ structure checks

def clique_spread(desc: GadgetDescriptor, s) -> float:
    """Largest circular spread of any clique's phases."""
    theta = as_theta(s)
    worst = 0.0
    for C in desc.cliques:
        d = circular_difference(theta[list(C)] - theta[C[0]])
        worst = max(worst, float(d.max() - d.min()))
    return worst


def chain_sine_mismatch(desc: GadgetDescriptor, s) -> float:
    """max_i |sin(v_i - C_i) - sin(C_i - u_i)| using the first node of each clique."""
    theta = as_theta(s)
    worst = 0.0
    for i, C in enumerate(desc.cliques):
        c = theta[C[0]]
        a = math.sin(theta[desc.v[i]] - c)
        b = math.sin(c - theta[desc.u[i]])
        worst = max(worst, abs(a - b))
    return worst


def arm_angle_excess(desc: GadgetDescriptor, s) -> float:
    """``max_i |theta[u_i] - theta[x]| - pi/2`` with the difference taken on the circle.

    Positive when some arm leaves x at an obtuse angle.
    """
    theta = as_theta(s)
    d = circular_difference(theta[list(desc.u)] - theta[desc.x])
    return float(np.max(np.abs(d))) - math.pi / 2


def padding_sides(desc: GadgetDescriptor, s) -> set[int]:
    """Which side of the x-y axis the padded paths ``i >= n`` bend to.

    Returns the set of signs of ``sin(theta[u_i] - theta[x])`` over padded
    indices; a proper split shows up as ``{-1, 1}``.
    """
    theta = as_theta(s)
    n = int(desc.param)
    signs = set()
    for i in range(n, len(desc.values)):
        d = circular_difference(theta[desc.u[i]] - theta[desc.x])
        signs.add(int(np.sign(d)))
    return signs


def structured_seeds(desc: GadgetDescriptor, limit: int = SEED_SUBSET_LIMIT) -> list[np.ndarray]:
    """Analytic placements for every subset containing index 0.

    These start the search right at (or near) each candidate geometry, so
    a yes-instance's non-zero stable point is found deterministically.
    """
    N = len(desc.values)
    if (1 << (N - 1)) > limit:
        return []
    seeds = []
    for rest in itertools.product((False, True), repeat=N - 1):
        subset = (0,) + tuple(i + 1 for i, on in enumerate(rest) if on)
        if desc.variant == "weighted":
            seeds.append(weighted_placement(desc, subset))
        else:
            n = int(desc.param)
            for eps in (0.0, 0.5 / n):
                seeds.append(unweighted_placement(desc, subset, eps))
    return seeds


# ------------------------------------------------------------ verification

@dataclass(frozen=True)
class ReductionReport:
    variant: GadgetVariant
    values: tuple[int, ...]
    param: float
    answer: Status
    solution: PartitionSolution | None
    analytic_fp: FixedPointRecord | None
    search: SearchResult
    stable_zero: int
    stable_nonzero: int
    consistent: bool | None
    anomalies: tuple[str, ...] = field(default=())

    @property
    def samples(self) -> int:
        return self.search.samples


def verify_reduction(
    variant: GadgetVariant | str,
    instance: Sequence[int],
    samples: int = 500,
    seed: int = 0,
    *,
    n: int | None = None,
    factor: float = DEFAULT_FACTOR,
    use_structured_seeds: bool = True,
    **search_kwargs,
) -> ReductionReport:
    """Check that the partition answer and the gadget's fixed points agree.

    Yes: the analytic witness must be a non-zero stable fixed point with
    residual below 1e-9. No: the multistart search must find no non-zero
    stable fixed point; this side is evidence over ``samples`` starts, not
    a proof.
    """
    variant = GadgetVariant(variant)
    analytic = None
    anomalies = []
    if variant is GadgetVariant.WEIGHTED:
        g, desc = build_weighted_gadget(instance, factor)
        sol = solve_partition_dp(instance)
        answer = Status.YES if sol is not None else Status.NO
        if sol is not None:
            try:
                analytic = make_record(g, weighted_gadget_fixed_point(desc, sol.subset))
            except InvalidWitnessError as exc:
                anomalies.append(f"analytic witness rejected: {exc}")
    else:
        n = len(instance) if n is None else n
        g, desc = build_unweighted_gadget(n, instance)
        ans = kuramoto_partition_feasible(n, instance)
        answer, sol = ans.status, ans.solution
        if sol is not None:
            try:
                analytic = make_record(g, unweighted_gadget_fixed_point(desc, sol.subset, sol.epsilon))
            except InvalidWitnessError as exc:
                anomalies.append(f"analytic witness rejected: {exc}")

    seeds = structured_seeds(desc) if use_structured_seeds else []
    search = multistart_search(g, None, samples, seed, extra_seeds=seeds, **search_kwargs)
    stable = [r for r in search.records if r.verdict is Verdict.STABLE]
    stable_zero = sum(1 for r in stable if r.classification is Classification.ZERO)
    stable_nonzero = len(stable) - stable_zero

    if variant is GadgetVariant.UNWEIGHTED:
        for r in stable:
            if clique_spread(desc, r.state) > 1e-6:
                anomalies.append(f"stable record with split clique (spread {clique_spread(desc, r.state):.2e})")
            if chain_sine_mismatch(desc, r.state) > 1e-6:
                anomalies.append("stable record violating chain sine equality")
            if arm_angle_excess(desc, r.state) > 1e-8:
                anomalies.append("stable record with an obtuse arm at x")
            if r.classification is Classification.NONZERO and len(padding_sides(desc, r.state)) < 2:
                anomalies.append("non-zero stable record with all padded paths on one side")

    if answer is Status.YES:
        consistent = (
            analytic is not None
            and analytic.classification is Classification.NONZERO
            and analytic.residual_norm < WITNESS_RESIDUAL_TOL
            and analytic.verdict is Verdict.STABLE
        )
    elif answer is Status.NO:
        consistent = stable_nonzero == 0
    else:
        consistent = None
    return ReductionReport(
        variant, tuple(int(v) for v in instance), desc.param, answer, sol, analytic,
        search, stable_zero, stable_nonzero, consistent, tuple(anomalies),
    )
