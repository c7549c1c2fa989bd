import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from paramkl import (
    CorrelationMatrix, ParameterGrid, SnapshotSet, apply_adjoint, apply_map,
    correlation, kernel_gram, rkhs_reproduce,
)
from conftest import random_set, unit_set


def test_grid_validation():
    with pytest.raises(ValueError, match="strictly positive"):
        ParameterGrid([[0.0], [1.0]], [1.0, 0.0])
    with pytest.raises(ValueError, match="coincide"):
        ParameterGrid([[0.0], [0.0]], [1.0, 1.0])
    with pytest.raises(ValueError, match="differ in length"):
        ParameterGrid([[0.0], [1.0]], [1.0])
    g = ParameterGrid.uniform(np.arange(4.0)[:, None])
    assert np.allclose(g.weights, 0.25)


def test_snapshot_validation():
    g = ParameterGrid([[0.0], [1.0]], [1.0, 1.0])
    with pytest.raises(ValueError, match="non-finite"):
        SnapshotSet([[1.0, np.nan]], g)
    with pytest.raises(ValueError, match="does not match grid"):
        SnapshotSet(np.ones((2, 3)), g)


def test_apply_map_examples(rng):
    assert np.array_equal(apply_map(unit_set(np.eye(2)), [1, 0]), [1, 0])
    assert np.array_equal(apply_map(unit_set([[2, 0], [0, 1]]), [1, 1]), [2, 1])
    s = random_set(rng, 4, 3)
    u = rng.standard_normal(4)
    oracle = [sum(s.values[i, j] * u[i] for i in range(4)) for j in range(3)]
    assert np.allclose(apply_map(s, u), oracle, rtol=0, atol=1e-13)
    with pytest.raises(ValueError, match="expected 4"):
        apply_map(s, np.ones(3))


def test_apply_adjoint_examples(rng):
    assert np.array_equal(apply_adjoint(unit_set(np.eye(2)), [1, 0]), [1, 0])
    single = SnapshotSet([[3.0], [4.0]], ParameterGrid([[0.0]], [2.0]))
    assert np.array_equal(apply_adjoint(single, [1.0]), [6, 8])
    s = random_set(rng, 5, 4)
    u, phi = rng.standard_normal(5), rng.standard_normal(4)
    lhs = np.sum(s.weights * apply_map(s, u) * phi)
    rhs = u @ apply_adjoint(s, phi)
    assert abs(lhs - rhs) <= 1e-12 * abs(lhs)


def test_correlation_examples(rng):
    single = SnapshotSet([[1.0], [0.0]], ParameterGrid([[0.0]], [1.0]))
    assert np.array_equal(correlation(single).entries, [[1, 0], [0, 0]])
    assert np.array_equal(correlation(unit_set([[2, 0], [0, 1]])).entries, [[4, 0], [0, 1]])
    s = random_set(rng, 6, 10)
    oracle = np.zeros((6, 6))
    for a in range(6):
        for b in range(6):
            for j in range(10):
                oracle[a, b] += s.weights[j] * s.values[a, j] * s.values[b, j]
    c = correlation(s).entries
    assert np.linalg.norm(c - oracle) <= 1e-12 * np.linalg.norm(oracle)


def test_kernel_gram_examples(rng):
    q, _ = np.linalg.qr(rng.standard_normal((5, 3)))
    assert np.allclose(kernel_gram(unit_set(q)).entries, np.eye(3), atol=1e-15)
    single = SnapshotSet([[3.0], [4.0]], ParameterGrid([[0.0]], [1.0]))
    assert kernel_gram(single).entries[0, 0] == 25.0
    s = random_set(rng, 4, 5)
    k = kernel_gram(s).entries
    for i in range(5):
        for j in range(5):
            assert k[i, j] == pytest.approx(np.dot(s.values[:, i], s.values[:, j]), abs=1e-13)


def test_kernel_gram_permutation_equivariance(rng):
    s = random_set(rng, 4, 6)
    order = rng.permutation(6)
    p = np.eye(6)[:, order]
    assert np.allclose(kernel_gram(s.permuted(order)).entries, p.T @ kernel_gram(s).entries @ p,
                       rtol=0, atol=1e-13)


def test_correlation_type_rejects_indefinite():
    with pytest.raises(ValueError, match="not positive semi-definite"):
        CorrelationMatrix([[1.0, 2.0], [2.0, 1.0]])


def test_rkhs_reproduce_examples(rng):
    s = unit_set(np.eye(2))
    assert rkhs_reproduce(s, apply_map(s, [0, 1]), 1) == pytest.approx(1.0, abs=1e-14)
    s = random_set(rng, 5, 3)
    phi = apply_map(s, rng.standard_normal(5))
    for i in range(3):
        assert rkhs_reproduce(s, phi, i) == pytest.approx(phi[i], abs=1e-10 * np.abs(phi).max())
    assert all(rkhs_reproduce(s, np.zeros(3), i) == 0.0 for i in range(3))


def test_rkhs_reproduce_rejects_out_of_range(rng):
    s = random_set(rng, 2, 4)  # range of R is 2-dimensional inside R^4
    with pytest.raises(ValueError, match="not in the range"):
        rkhs_reproduce(s, rng.standard_normal(4), 0)


def test_mass_matrix_ingestion(rng):
    a = rng.standard_normal((3, 3))
    mass = a @ a.T + 3 * np.eye(3)
    vals = rng.standard_normal((3, 2))
    s = SnapshotSet.with_mass_matrix(vals, ParameterGrid([[0.0], [1.0]], [1.0, 1.0]), mass)
    assert np.allclose(kernel_gram(s).entries, vals.T @ mass @ vals)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 8), m=st.integers(1, 8), seed=st.integers(0, 2 ** 32 - 1))
def test_operator_identities(n, m, seed):
    rng = np.random.default_rng(seed)
    s = random_set(rng, n, m)
    u, phi = rng.standard_normal(n), rng.standard_normal(m)
    # adjointness
    lhs = np.sum(s.weights * apply_map(s, u) * phi)
    rhs = u @ apply_adjoint(s, phi)
    scale = np.linalg.norm(s.values) ** 2 * np.linalg.norm(u) * np.linalg.norm(phi) * s.weights.max()
    assert abs(lhs - rhs) <= 1e-12 * scale
    # C u = R* R u
    c = correlation(s).entries
    back = apply_adjoint(s, apply_map(s, u))
    assert np.linalg.norm(c @ u - back) <= 1e-12 * max(np.linalg.norm(back), 1e-300) + 1e-14 * scale
    # nuclear trace
    tr = np.sum(s.weights * np.sum(s.values ** 2, axis=0))
    assert abs(np.trace(c) - tr) <= 1e-12 * tr
    # reproducing property on full-column-rank sets
    if m <= n:
        phi = apply_map(s, u)
        i = int(rng.integers(m))
        assert rkhs_reproduce(s, phi, i) == pytest.approx(phi[i], abs=1e-9 * max(np.abs(phi).max(), 1e-300))
