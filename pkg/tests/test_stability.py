import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kuramoto_hardness.fixedpoint import residual
from kuramoto_hardness.graph import WeightedGraph
from kuramoto_hardness.stability import (
    EdgeAngleClass,
    NotSymmetricError,
    Verdict,
    cut_check,
    edge_angle_check,
    eigen_symmetric,
    jacobian,
    stability_verdict,
    verdict_from_spectrum,
)

from conftest import complete, ring, twist

K2 = WeightedGraph(2, ((0, 1, 1.0),))


def test_jacobian_k2():
    assert np.allclose(jacobian(K2, [0, 0]), [[-1, 1], [1, -1]])
    assert np.allclose(jacobian(K2, [0, math.pi]), [[1, -1], [-1, 1]])


def test_jacobian_hexagon_circulant(hexagon, hex_twist):
    M = jacobian(hexagon, hex_twist)
    assert np.allclose(np.diag(M), -1)
    for i in range(6):
        assert M[i, (i + 1) % 6] == pytest.approx(0.5)
        assert M[i, (i - 1) % 6] == pytest.approx(0.5)


def test_hexagon_spectrum_matches_circulant_formula(hexagon, hex_twist):
    M = jacobian(hexagon, hex_twist)
    formula = np.sort([math.cos(2 * math.pi * q / 6) - 1 for q in range(6)])
    charpoly = np.sort(np.roots(np.poly(M)).real)
    spec = eigen_symmetric(M)
    assert np.allclose(spec, formula, atol=1e-12)
    assert np.allclose(charpoly, formula, atol=1e-6)
    assert np.allclose(spec, [-2, -1.5, -1.5, -0.5, -0.5, 0], atol=1e-12)


def test_eigen_small_examples():
    assert np.allclose(eigen_symmetric([[-1, 1], [1, -1]]), [-2, 0])
    assert np.allclose(eigen_symmetric(np.diag([3.0, 1.0, 2.0])), [1, 2, 3])
    assert eigen_symmetric(np.zeros((0, 0))).shape == (0,)


def test_eigen_rejects_asymmetric():
    with pytest.raises(NotSymmetricError):
        eigen_symmetric([[0, 1], [0, 0]])
    with pytest.raises(NotSymmetricError):
        eigen_symmetric(np.zeros((2, 3)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 40))
def test_eigen_matches_lapack(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n)) * rng.choice([1e-3, 1.0, 1e3])
    A = A + A.T
    ref = np.linalg.eigvalsh(A)
    assert np.allclose(eigen_symmetric(A), ref, atol=1e-10 * max(1.0, np.abs(ref).max()))


def test_eigen_degenerate_spectrum():
    Q, _ = np.linalg.qr(np.random.default_rng(0).normal(size=(8, 8)))
    A = Q @ np.diag([1, 1, 1, 2, 2, -3, -3, 0.0]) @ Q.T
    A = 0.5 * (A + A.T)
    assert np.allclose(eigen_symmetric(A), [-3, -3, 0, 1, 1, 1, 2, 2], atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.integers(2, 8))
def test_jacobian_matches_finite_differences(seed, n):
    rng = np.random.default_rng(seed)
    edges = tuple((i, j, float(rng.uniform(0.1, 3))) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.7)
    g = WeightedGraph(n, edges)
    theta = rng.uniform(0, 2 * math.pi, n)
    h = 1e-6
    fd = np.column_stack([(residual(g, theta + h * e) - residual(g, theta - h * e)) / (2 * h) for e in np.eye(n)])
    assert np.max(np.abs(fd - jacobian(g, theta))) < 1e-6


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.integers(2, 8))
def test_rows_sum_to_zero_and_ones_in_kernel(seed, n):
    rng = np.random.default_rng(seed)
    g = complete(n)
    M = jacobian(g, rng.uniform(0, 2 * math.pi, n))
    assert np.allclose(M @ np.ones(n), 0, atol=1e-12)
    assert np.allclose(M, M.T)


def test_verdicts():
    assert stability_verdict(K2, [0, 0]).verdict is Verdict.STABLE
    assert stability_verdict(K2, [0, math.pi]).verdict is Verdict.UNSTABLE
    report = stability_verdict(ring(6), twist(6))
    assert report.verdict is Verdict.STABLE and report.zero_mode_count == 1


def test_ring_twist_stability_by_winding():
    # |q| < n/4 is stable, beyond that unstable
    for q in range(0, 4):
        v = stability_verdict(ring(12), twist(12, q)).verdict
        assert v is (Verdict.STABLE if q < 3 else Verdict.MARGINAL)
    assert stability_verdict(ring(12), twist(12, 4)).verdict is Verdict.UNSTABLE


def test_verdict_from_spectrum_bands():
    assert verdict_from_spectrum(np.array([-1.0, 0.0])) is Verdict.STABLE
    assert verdict_from_spectrum(np.array([-1.0, 0.0, 1e-10])) is Verdict.MARGINAL
    assert verdict_from_spectrum(np.array([-1.0, 0.0, 1e-3])) is Verdict.UNSTABLE
    assert verdict_from_spectrum(np.array([0.0])) is Verdict.STABLE


def test_disconnected_graph_rejected():
    with pytest.raises(ValueError):
        stability_verdict(WeightedGraph(3, ((0, 1, 1.0),)), [0, 0, 0])


def test_cut_check_examples(hexagon, hex_twist):
    assert cut_check(K2, [0, math.pi], [0]) == pytest.approx((0.0, -1.0), abs=1e-15)
    s, c = cut_check(hexagon, hex_twist, [0])
    assert abs(s) < 1e-12 and c == pytest.approx(1.0)
    g = complete(5)
    assert cut_check(g, np.zeros(5), [0, 3]) == pytest.approx((0.0, 6.0))


def test_cut_check_rejects_improper_subsets():
    with pytest.raises(ValueError):
        cut_check(K2, [0, 0], [])
    with pytest.raises(ValueError):
        cut_check(K2, [0, 0], [0, 1])
    with pytest.raises(IndexError):
        cut_check(K2, [0, 0], [5])


def test_edge_angle_classes(hexagon, hex_twist):
    assert edge_angle_check(hexagon, hex_twist) is EdgeAngleClass.ALL_ACUTE
    assert edge_angle_check(K2, [0, math.pi]) is EdgeAngleClass.ALL_OBTUSE
    path = WeightedGraph(3, ((0, 1, 1.0), (1, 2, 1.0)))
    assert edge_angle_check(path, [0, math.pi / 4, math.pi]) is EdgeAngleClass.MIXED


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000), st.integers(2, 7))
def test_all_obtuse_never_stable(seed, n):
    # an all-obtuse state makes the Laplacian-like form positive on some direction
    rng = np.random.default_rng(seed)
    g = WeightedGraph(n, tuple((i, i + 1, float(rng.uniform(0.5, 2))) for i in range(n - 1)))
    steps = rng.uniform(math.pi / 2 + 0.01, 3 * math.pi / 2 - 0.01, n - 1)
    theta = np.concatenate([[0.0], np.cumsum(steps)])
    assert edge_angle_check(g, theta) is EdgeAngleClass.ALL_OBTUSE
    assert stability_verdict(g, theta).verdict is not Verdict.STABLE
