"""Locating, refining and classifying frequency fixed points.

The search is flow-then-Newton: RK4 integration of the model carries a
random start into an attractor basin, then Newton's method on the reduced
system (node 0 pinned at angle 0) polishes the point to machine accuracy.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dynamics import (
    DEFAULT_STEP,
    ModelParams,
    _params_for,
    coupling,
    integrate_batch,
    mean_frequency,
    stable_step,
)
from .graph import TWO_PI, PhaseState, WeightedGraph, as_theta, canonical_rotation, is_connected, spread, state_distance
from .stability import DEFAULT_STABILITY_TOL, Verdict, jacobian, stability_verdict

log = logging.getLogger(__name__)

DEFAULT_RESIDUAL_TOL = 1e-10
DEFAULT_CLASS_TOL = 1e-6
DEFAULT_DEDUP_TOL = 1e-5
# flow only has to reach the basin; Newton does the rest
DEFAULT_FLOW_TOL = 1e-6
DEFAULT_FLOW_STEPS = 50_000


class Classification(str, enum.Enum):
    ZERO = "Zero"
    NONZERO = "NonZero"

    def __str__(self):
        return self.value


class SingularJacobianError(ArithmeticError):
    """Reduced Jacobian is numerically singular; perturb the start and retry."""


class NewtonDivergenceError(ArithmeticError):
    pass


@dataclass(frozen=True, eq=False)
class FixedPointRecord:
    state: PhaseState
    residual_norm: float
    spectrum: np.ndarray = field(repr=False)
    verdict: Verdict
    classification: Classification
    iterations: int = 0

    @property
    def is_nonzero_stable(self) -> bool:
        return self.verdict is Verdict.STABLE and self.classification is Classification.NONZERO


def residual(g: WeightedGraph, s, p: ModelParams | None = None) -> np.ndarray:
    """``sum_j A_ij sin(theta_j - theta_i) - (mean(omega) - omega_i) / k``."""
    theta = as_theta(s)
    if theta.shape[-1] != g.n:
        raise ValueError(f"state has {theta.shape[-1]} angles, graph has {g.n} nodes")
    p = _params_for(g, p)
    return coupling(g, theta) - (mean_frequency(p) - p.omega) / p.k


def classify(r, class_tol: float = DEFAULT_CLASS_TOL) -> Classification:
    """Zero when every angle is within ``class_tol`` of one common angle.

    Accepts a record or anything state-like.
    """
    s = r.state if isinstance(r, FixedPointRecord) else r
    return Classification.ZERO if spread(s) < class_tol else Classification.NONZERO


def make_record(
    g: WeightedGraph,
    s,
    p: ModelParams | None = None,
    *,
    iterations: int = 0,
    stability_tol: float = DEFAULT_STABILITY_TOL,
    class_tol: float = DEFAULT_CLASS_TOL,
) -> FixedPointRecord:
    """Evaluate residual, spectrum, verdict and class of a state as given."""
    state = canonical_rotation(s, 0)
    res = float(np.max(np.abs(residual(g, state, p)))) if g.n else 0.0
    report = stability_verdict(g, state, stability_tol)
    return FixedPointRecord(state, res, report.spectrum, report.verdict, classify(state, class_tol), iterations)


def _newton(g: WeightedGraph, theta0: np.ndarray, p: ModelParams, tol: float, max_iter: int):
    theta = np.array(theta0, dtype=float) - theta0[0]
    scale = float(g.weighted_degree.max()) if g.m else 1.0
    for it in range(max_iter + 1):
        r = residual(g, theta, p)
        norm = float(np.max(np.abs(r))) if g.n else 0.0
        if not np.isfinite(norm):
            raise NewtonDivergenceError("residual became non-finite")
        if norm < tol:
            return theta, norm, it
        if it == max_iter:
            break
        J = jacobian(g, theta)[1:, 1:]
        sv = np.linalg.svd(J, compute_uv=False)
        if sv[-1] <= 1e-13 * max(sv[0], scale):
            raise SingularJacobianError(f"reduced Jacobian is singular at iteration {it}")
        theta[1:] -= np.linalg.solve(J, r[1:])
    raise NewtonDivergenceError(f"no convergence in {max_iter} iterations (residual {norm:.3e})")


def newton_refine(
    g: WeightedGraph,
    s0,
    p: ModelParams | None = None,
    tol: float = DEFAULT_RESIDUAL_TOL,
    max_iter: int = 50,
    *,
    stability_tol: float = DEFAULT_STABILITY_TOL,
    class_tol: float = DEFAULT_CLASS_TOL,
) -> FixedPointRecord:
    """Newton iteration on the residuals of nodes 1..n-1 with node 0 fixed at 0.

    The dropped equation is redundant because the residuals always sum to
    zero. Raises SingularJacobianError or NewtonDivergenceError.
    """
    if not is_connected(g):
        raise ValueError("newton_refine needs a connected graph")
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    p = _params_for(g, p)
    theta, _, iterations = _newton(g, as_theta(s0), p, tol, max_iter)
    return make_record(g, theta, p, iterations=iterations, stability_tol=stability_tol, class_tol=class_tol)


@dataclass(frozen=True)
class SearchResult:
    """Distinct fixed points found by :func:`multistart_search`, in discovery order."""

    records: tuple[FixedPointRecord, ...]
    samples: int
    seeds: int
    dropped_flow: int
    dropped_newton: int
    seed: int

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def stable(self) -> list[FixedPointRecord]:
        return [r for r in self.records if r.verdict is Verdict.STABLE]

    def count(self, verdict: Verdict, classification: Classification) -> int:
        return sum(1 for r in self.records if r.verdict is verdict and r.classification is classification)


def random_starts(n: int, samples: int, seed: int) -> np.ndarray:
    """Sample ``i`` is drawn from its own generator seeded with ``seed + i``."""
    starts = np.empty((samples, n))
    for i in range(samples):
        starts[i] = np.random.default_rng(seed + i).uniform(0.0, TWO_PI, n)
    return starts


def multistart_search(
    g: WeightedGraph,
    p: ModelParams | None = None,
    samples: int = 100,
    seed: int = 0,
    tol: float = DEFAULT_RESIDUAL_TOL,
    *,
    extra_seeds: Sequence = (),
    h: float = DEFAULT_STEP,
    flow_tol: float = DEFAULT_FLOW_TOL,
    max_steps: int = DEFAULT_FLOW_STEPS,
    dedup_tol: float = DEFAULT_DEDUP_TOL,
    class_tol: float = DEFAULT_CLASS_TOL,
    stability_tol: float = DEFAULT_STABILITY_TOL,
    max_iter: int = 50,
) -> SearchResult:
    """Survey the fixed points reachable from random (and optional given) starts.

    ``extra_seeds`` are processed first, then ``samples`` uniform random
    states. The RK4 step is capped by :func:`stable_step` so heavily
    weighted graphs do not blow up. Starts whose flow does not settle
    within ``max_steps`` or whose Newton polish fails are dropped and
    counted. Records closer than ``dedup_tol`` (modulo rotation) to an
    earlier record are discarded.
    """
    if samples < 0 or (samples == 0 and not len(extra_seeds)):
        raise ValueError("need at least one sample or explicit seed")
    if not is_connected(g):
        raise ValueError("multistart_search needs a connected graph")
    p = _params_for(g, p)
    starts = [np.asarray(as_theta(s), dtype=float).reshape(g.n) for s in extra_seeds]
    starts = np.vstack(starts + [random_starts(g.n, samples, seed)])
    h_eff = stable_step(g, p.k, h)
    finals, converged, _ = integrate_batch(g, starts, p, h_eff, flow_tol, max_steps)

    kept: list[np.ndarray] = []
    records: list[FixedPointRecord] = []
    dropped_newton = 0
    for theta, ok in zip(finals, converged):
        if not ok:
            continue
        try:
            refined, _, its = _newton(g, theta, p, tol, max_iter)
        except (SingularJacobianError, NewtonDivergenceError, np.linalg.LinAlgError):
            dropped_newton += 1
            continue
        if any(state_distance(refined, k) < dedup_tol for k in kept):
            continue
        kept.append(refined)
        records.append(
            make_record(g, refined, p, iterations=its, stability_tol=stability_tol, class_tol=class_tol)
        )
    dropped_flow = int(np.sum(~converged))
    if dropped_flow or dropped_newton:
        log.debug("multistart: %d flow and %d Newton failures out of %d starts",
                  dropped_flow, dropped_newton, len(starts))
    return SearchResult(tuple(records), samples, len(extra_seeds), dropped_flow, dropped_newton, seed)
