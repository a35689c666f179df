import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kuramoto_hardness.dynamics import (
    ModelParams,
    _rk4,
    energy,
    integrate_batch,
    integrate_to_convergence,
    kuramoto_rhs,
    mean_frequency,
    stable_step,
    step_rk4,
)
from kuramoto_hardness.fixedpoint import Classification, classify
from kuramoto_hardness.graph import WeightedGraph, circular_difference, state_distance

from conftest import complete, ring, twist


def random_graph(rng, n, p=0.6):
    edges = [(i, j, float(rng.uniform(0.2, 3.0))) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    edges += [(i, i + 1, 1.0) for i in range(n - 1) if not any(e[:2] == (i, i + 1) for e in edges)]
    return WeightedGraph(n, tuple(edges))


def naive_rhs(g, theta, omega, k):
    out = np.array(omega, dtype=float)
    for i, j, w in g.edges:
        out[i] += k * w * math.sin(theta[j] - theta[i])
        out[j] += k * w * math.sin(theta[i] - theta[j])
    return out


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 9), st.floats(0.1, 5.0))
def test_rhs_matches_edge_loop(seed, n, k):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n)
    theta = rng.uniform(0, 2 * math.pi, n)
    omega = rng.normal(size=n)
    assert np.allclose(kuramoto_rhs(g, theta, ModelParams(omega, k)), naive_rhs(g, theta, omega, k), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 10))
def test_mean_frequency_conserved(seed, n):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n)
    p = ModelParams(rng.normal(size=n), float(rng.uniform(0.1, 4)))
    rhs = kuramoto_rhs(g, rng.uniform(0, 2 * math.pi, n), p)
    assert abs(rhs.mean() - mean_frequency(p)) < 1e-12


def test_hexagon_twist_is_equilibrium(hexagon, hex_twist):
    assert np.max(np.abs(kuramoto_rhs(hexagon, hex_twist))) < 1e-12
    assert energy(hexagon, hex_twist) == pytest.approx(-3.0)


def test_energy_gradient_matches_rhs():
    rng = np.random.default_rng(3)
    g = random_graph(rng, 6)
    theta = rng.uniform(0, 2 * math.pi, 6)
    h = 1e-6
    grad = np.array([(energy(g, theta + h * e) - energy(g, theta - h * e)) / (2 * h) for e in np.eye(6)])
    assert np.allclose(-grad, kuramoto_rhs(g, theta), atol=1e-8)


@pytest.mark.parametrize("seed", range(5))
def test_energy_non_increasing_along_flow(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, 7)
    energies = []
    integrate_to_convergence(
        g, rng.uniform(0, 2 * math.pi, 7), h=stable_step(g), tol=1e-8, max_steps=5000,
        on_step=lambda step, th, rhs: energies.append(energy(g, th)),
    )
    assert np.all(np.diff(energies) <= 1e-12)


def _order_factor(g, p, theta, h):
    def err(step):
        ref = theta.copy()
        fine = 400
        for _ in range(fine):
            ref = _rk4(lambda y: kuramoto_rhs(g, y, p), ref, step / fine)
        one = _rk4(lambda y: kuramoto_rhs(g, y, p), theta, step)
        return np.linalg.norm(one - ref)

    return err(h) / err(h / 2)


@pytest.mark.parametrize("seed", range(3))
def test_rk4_local_order_factor(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, 6)
    p = ModelParams(rng.normal(size=6), 1.0)
    h = 0.05 / (p.k * g.weighted_degree.max())
    factor = _order_factor(g, p, rng.uniform(0, 2 * math.pi, 6), h)
    assert 24 <= factor <= 40


def test_step_rotation_equivariant():
    rng = np.random.default_rng(11)
    g = random_graph(rng, 5)
    theta = rng.uniform(0, 2 * math.pi, 5)
    a = step_rk4(g, theta, h=0.05)
    b = step_rk4(g, theta + 0.7, h=0.05)
    assert np.allclose(circular_difference(b.theta - a.theta - 0.7), 0, atol=1e-12)


def test_hexagon_converges_from_near_twist(hexagon, hex_twist):
    rng = np.random.default_rng(0)
    traj = integrate_to_convergence(hexagon, hex_twist + rng.normal(scale=0.05, size=6))
    assert traj.converged
    assert state_distance(traj.state, hex_twist) < 1e-8


def test_complete_graph_converges_to_zero():
    g = complete(3)
    traj = integrate_to_convergence(g, np.random.default_rng(5).uniform(0, 2 * math.pi, 3))
    assert traj.converged and classify(traj.state) is Classification.ZERO


def test_batch_matches_single():
    g = ring(5)
    starts = np.random.default_rng(2).uniform(0, 2 * math.pi, (4, 5))
    thetas, conv, steps = integrate_batch(g, starts, tol=1e-9, check_every=1)
    for row, c, s, start in zip(thetas, conv, steps, starts):
        single = integrate_to_convergence(g, start, tol=1e-9)
        assert c == single.converged and s == single.steps
        assert state_distance(row, single.state) < 1e-12


def test_stiff_step_needs_cap():
    g = WeightedGraph(2, ((0, 1, 1000.0),))
    assert not integrate_to_convergence(g, [0.0, 2.0], h=0.05, max_steps=2000).converged
    assert integrate_to_convergence(g, [0.0, 2.0], h=stable_step(g)).converged


def test_invalid_params():
    with pytest.raises(ValueError):
        ModelParams(np.zeros(3), 0.0)
    with pytest.raises(ValueError):
        kuramoto_rhs(ring(4), np.zeros(3))
