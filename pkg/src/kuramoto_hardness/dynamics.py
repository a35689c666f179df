"""Time evolution of the Kuramoto model on a weighted graph.

    d(theta_i)/dt = omega_i + k * sum_j A_ij * sin(theta_j - theta_i)

Integration is fixed-step classical RK4. Convergence is judged on the
instantaneous frequencies: a state has converged once every node's
frequency is within ``tol`` of the mean natural frequency.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .graph import PhaseState, WeightedGraph, as_theta, canonical_rotation

DEFAULT_STEP = 0.05
DEFAULT_TOL = 1e-10
DEFAULT_MAX_STEPS = 200_000


@dataclass(frozen=True, eq=False)
class ModelParams:
    omega: np.ndarray = field(repr=False)
    k: float = 1.0

    def __post_init__(self):
        omega = np.array(self.omega, dtype=float).reshape(-1)
        omega.flags.writeable = False
        object.__setattr__(self, "omega", omega)
        if not self.k > 0:
            raise ValueError(f"coupling constant must be positive, got {self.k}")

    @classmethod
    def homogeneous(cls, n: int) -> "ModelParams":
        return cls(np.zeros(n), 1.0)

    @property
    def is_homogeneous(self) -> bool:
        return bool(np.all(self.omega == self.omega[0])) if len(self.omega) else True


def _params_for(g: WeightedGraph, p: ModelParams | None) -> ModelParams:
    if p is None:
        return ModelParams.homogeneous(g.n)
    if len(p.omega) != g.n:
        raise ValueError(f"omega has length {len(p.omega)}, graph has {g.n} nodes")
    return p


def coupling(g: WeightedGraph, theta: np.ndarray) -> np.ndarray:
    """``sum_j A_ij sin(theta_j - theta_i)`` for a state or a batch of states."""
    I, J, W = g.edge_arrays
    flow = W * np.sin(theta[..., J] - theta[..., I])
    return flow @ g.incidence


def kuramoto_rhs(g: WeightedGraph, s, p: ModelParams | None = None) -> np.ndarray:
    theta = as_theta(s)
    if theta.shape[-1] != g.n:
        raise ValueError(f"state has {theta.shape[-1]} angles, graph has {g.n} nodes")
    p = _params_for(g, p)
    return p.omega + p.k * coupling(g, theta)


def mean_frequency(p: ModelParams) -> float:
    return float(np.mean(p.omega)) if len(p.omega) else 0.0


def energy(g: WeightedGraph, s) -> float:
    """Potential whose gradient flow is the homogeneous model with k = 1."""
    theta = as_theta(s)
    I, J, W = g.edge_arrays
    return float(-np.sum(W * np.cos(theta[J] - theta[I])))


def _rk4(f: Callable[[np.ndarray], np.ndarray], y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_rk4(g: WeightedGraph, s, p: ModelParams | None = None, h: float = DEFAULT_STEP) -> PhaseState:
    if not h > 0:
        raise ValueError("step size must be positive")
    p = _params_for(g, p)
    theta = as_theta(s)
    return PhaseState(_rk4(lambda y: kuramoto_rhs(g, y, p), theta, h))


def stable_step(g: WeightedGraph, k: float = 1.0, h: float = DEFAULT_STEP) -> float:
    """Largest step not exceeding ``h`` that keeps RK4 inside its stability region.

    The Jacobian spectrum lies in [-2 k d_max, 2 k d_max] (Gershgorin, with
    d_max the largest weighted degree); RK4 is stable for h*|lambda| < 2.78.
    """
    d_max = float(g.weighted_degree.max()) if g.m else 0.0
    if d_max == 0.0:
        return h
    return min(h, 1.0 / (k * d_max))


@dataclass(frozen=True)
class Trajectory:
    state: PhaseState
    converged: bool
    steps: int

    def __iter__(self):
        return iter((self.state, self.converged, self.steps))


def integrate_to_convergence(
    g: WeightedGraph,
    s0,
    p: ModelParams | None = None,
    h: float = DEFAULT_STEP,
    tol: float = DEFAULT_TOL,
    max_steps: int = DEFAULT_MAX_STEPS,
    on_step: Callable[[int, np.ndarray, np.ndarray], None] | None = None,
) -> Trajectory:
    """Integrate until the frequency spread ``max|rhs - mean(omega)|`` is below ``tol``.

    ``on_step(step, theta, rhs)`` is called before every step and once at the
    end. Returns the final state rotated so node 0 sits at angle 0.

    Raises FloatingPointError if the state stops being finite, which almost
    always means ``h`` is too large for the edge weights.
    """
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    if not h > 0:
        raise ValueError("step size must be positive")
    p = _params_for(g, p)
    wbar = mean_frequency(p)
    f = lambda y: kuramoto_rhs(g, y, p)  # noqa: E731
    theta = np.array(as_theta(s0), dtype=float)
    if theta.shape != (g.n,):
        raise ValueError(f"state has {theta.shape[0]} angles, graph has {g.n} nodes")

    step = 0
    while True:
        rhs = f(theta)
        if on_step is not None:
            on_step(step, theta, rhs)
        if np.max(np.abs(rhs - wbar)) < tol:
            converged = True
            break
        if step >= max_steps:
            converged = False
            break
        theta = _rk4(f, theta, h)
        step += 1
        if not np.all(np.isfinite(theta)):
            raise FloatingPointError(f"non-finite state after {step} steps (h={h} too large?)")
    return Trajectory(canonical_rotation(theta, 0), converged, step)


def integrate_batch(
    g: WeightedGraph,
    thetas: np.ndarray,
    p: ModelParams | None = None,
    h: float = DEFAULT_STEP,
    tol: float = DEFAULT_TOL,
    max_steps: int = DEFAULT_MAX_STEPS,
    check_every: int = 10,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Integrate many independent starting states at once.

    Same stopping rule as :func:`integrate_to_convergence`, evaluated every
    ``check_every`` steps; converged rows are frozen. Returns
    ``(thetas, converged, steps)`` with unwrapped angles.
    """
    p = _params_for(g, p)
    wbar = mean_frequency(p)
    f = lambda y: p.omega + p.k * coupling(g, y)  # noqa: E731
    thetas = np.array(thetas, dtype=float, ndmin=2)
    B = thetas.shape[0]
    converged = np.zeros(B, dtype=bool)
    steps = np.full(B, max_steps, dtype=np.int64)
    active = np.arange(B)
    y = thetas.copy()
    step = 0
    while active.size:
        spread = np.max(np.abs(f(y) - wbar), axis=1) if g.n else np.zeros(len(active))
        done = spread < tol
        if np.any(done):
            idx = active[done]
            thetas[idx] = y[done]
            converged[idx] = True
            steps[idx] = step
            active, y = active[~done], y[~done]
        if not active.size or step >= max_steps:
            break
        burst = min(check_every, max_steps - step)
        for _ in range(burst):
            y = _rk4(f, y, h)
        step += burst
        bad = ~np.all(np.isfinite(y), axis=1)
        if np.any(bad):
            raise FloatingPointError(f"non-finite state after {step} steps (h={h} too large?)")
    if active.size:
        thetas[active] = y
    return thetas, converged, steps
