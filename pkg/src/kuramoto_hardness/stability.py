"""Linear stability of fixed points and the cut conditions that go with it.

The stability matrix is the Jacobian of the homogeneous flow,

    M_ij = A_ij cos(theta_j - theta_i) - delta_ij * sum_k A_ik cos(theta_k - theta_i)

Its rows sum to zero, so the all-ones vector (global rotation) is always in
the kernel. A fixed point counts as stable when M is negative definite on
the complement of that direction.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .graph import WeightedGraph, as_theta, circular_difference, is_connected

DEFAULT_STABILITY_TOL = 1e-8


class Verdict(str, enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    MARGINAL = "Marginal"

    def __str__(self):
        return self.value


class EdgeAngleClass(str, enum.Enum):
    ALL_ACUTE = "AllAcute"
    ALL_OBTUSE = "AllObtuse"
    MIXED = "Mixed"

    def __str__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class StabilityReport:
    spectrum: np.ndarray = field(repr=False)
    zero_mode_count: int
    verdict: Verdict


class NotSymmetricError(ValueError):
    pass


def jacobian(g: WeightedGraph, s) -> np.ndarray:
    theta = as_theta(s)
    if theta.shape != (g.n,):
        raise ValueError(f"state has {theta.shape[0]} angles, graph has {g.n} nodes")
    C = g.adjacency * np.cos(theta[None, :] - theta[:, None])
    M = C.copy()
    M[np.diag_indices(g.n)] = -C.sum(axis=1)
    return M


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairings of 0..n-1 into disjoint (p, q) pairs; every pair occurs once per sweep."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a >= 0 and b >= 0]
        rounds.append((np.array([a for a, _ in pairs]), np.array([b for _, b in pairs])))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def eigen_symmetric(M, off_tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by Jacobi rotations, ascending.

    Rotations are scheduled round-robin so each round acts on disjoint
    index pairs and is applied in one vectorized update. Sweeps stop when
    the off-diagonal Frobenius norm drops below ``off_tol * max(1, ||M||_F)``.
    """
    A = np.array(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotSymmetricError(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    scale = max(1.0, float(np.max(np.abs(A)))) if n else 1.0
    if n and np.max(np.abs(A - A.T)) > 1e-12 * scale:
        raise NotSymmetricError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    target = off_tol * max(1.0, float(np.linalg.norm(A)))
    rounds = _round_robin(n)

    for _ in range(max_sweeps):
        if np.linalg.norm(A - np.diag(np.diag(A))) < target:
            break
        for P, Q in rounds:
            apq = A[P, Q]
            live = np.abs(apq) > 1e-300
            if not live.any():
                continue
            P, Q, apq = P[live], Q[live], apq[live]
            theta = (A[Q, Q] - A[P, P]) / (2.0 * apq)
            with np.errstate(over="ignore"):
                t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t = np.where(theta == 0, 1.0, t)
            big = np.abs(theta) > 1e150
            t[big] = 0.5 / theta[big]
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            cols_p, cols_q = A[:, P].copy(), A[:, Q].copy()
            A[:, P] = c * cols_p - s * cols_q
            A[:, Q] = s * cols_p + c * cols_q
            rows_p, rows_q = A[P, :].copy(), A[Q, :].copy()
            A[P, :] = c[:, None] * rows_p - s[:, None] * rows_q
            A[Q, :] = s[:, None] * rows_p + c[:, None] * rows_q
            A[P, Q] = 0.0
            A[Q, P] = 0.0
    else:
        raise ArithmeticError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    return np.sort(np.diag(A))


def verdict_from_spectrum(spectrum: np.ndarray, tol: float = DEFAULT_STABILITY_TOL) -> Verdict:
    if len(spectrum) <= 1:
        return Verdict.STABLE
    # drop the rotation mode: the eigenvalue closest to zero
    rest = np.delete(spectrum, int(np.argmin(np.abs(spectrum))))
    top = rest.max()
    if top < -tol:
        return Verdict.STABLE
    if top > tol:
        return Verdict.UNSTABLE
    return Verdict.MARGINAL


def stability_verdict(g: WeightedGraph, s, tol: float = DEFAULT_STABILITY_TOL) -> StabilityReport:
    if not is_connected(g):
        raise ValueError("stability is only defined here for connected graphs")
    spectrum = eigen_symmetric(jacobian(g, s))
    zero_modes = int(np.sum(np.abs(spectrum) <= tol))
    return StabilityReport(spectrum, zero_modes, verdict_from_spectrum(spectrum, tol))


def cut_check(g: WeightedGraph, s, X: Iterable[int]) -> tuple[float, float]:
    """Weighted sine and cosine sums over edges leaving ``X``.

    Each crossing edge contributes ``w * sin(theta_j - theta_i)`` and
    ``w * cos(theta_j - theta_i)`` with ``i`` in X and ``j`` outside.
    """
    theta = as_theta(s)
    inside = np.zeros(g.n, dtype=bool)
    for i in X:
        if not 0 <= int(i) < g.n:
            raise IndexError(f"node {i} out of range")
        inside[int(i)] = True
    if not inside.any() or inside.all():
        raise ValueError("X must be a proper nonempty subset of the nodes")
    I, J, W = g.edge_arrays
    cross = inside[I] != inside[J]
    src = np.where(inside[I], I, J)[cross]
    dst = np.where(inside[I], J, I)[cross]
    d = theta[dst] - theta[src]
    w = W[cross]
    return float(np.sum(w * np.sin(d))), float(np.sum(w * np.cos(d)))


def edge_angle_check(g: WeightedGraph, s) -> EdgeAngleClass:
    theta = as_theta(s)
    I, J, _ = g.edge_arrays
    mag = np.abs(circular_difference(theta[J] - theta[I]))
    half = math.pi / 2
    if np.all(mag < half):
        return EdgeAngleClass.ALL_ACUTE
    if np.all(mag > half):
        return EdgeAngleClass.ALL_OBTUSE
    return EdgeAngleClass.MIXED
