import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from paramkl import (
    ParameterGrid, SPDFieldSet, SnapshotSet, VectorFieldSet, decompose, matrix_exp_skew,
    matrix_exp_sym, matrix_log_spd, spd_field_reduce, vector_kl,
)
from paramkl.fields import pack_sym, unpack_sym
from paramkl.spectral import ReducedModel, reconstruct_all
from conftest import random_set


def random_spd(rng, n):
    a = rng.standard_normal((n, n))
    return a @ a.T + 0.1 * np.eye(n)


def test_exp_log_examples(rng):
    assert np.array_equal(matrix_exp_sym(np.zeros((3, 3))), np.eye(3))
    assert np.allclose(matrix_log_spd(np.eye(3)), 0, atol=1e-15)
    assert np.allclose(matrix_log_spd(np.diag([np.e, np.e ** 2])), np.diag([1.0, 2.0]), atol=1e-14)
    h = rng.standard_normal((4, 4))
    h = h + h.T
    assert np.linalg.norm(matrix_log_spd(matrix_exp_sym(h)) - h) <= 1e-10 * np.linalg.norm(h)
    a = random_spd(rng, 4)
    assert np.linalg.norm(matrix_exp_sym(matrix_log_spd(a)) - a) <= 1e-10 * np.linalg.norm(a)


def test_log_rejects_non_spd():
    with pytest.raises(ValueError, match="-1.000e\\+00"):
        matrix_log_spd(np.diag([2.0, -1.0]))
    with pytest.raises(ValueError, match="symmetric"):
        matrix_exp_sym(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_exp_skew_examples(rng):
    assert np.allclose(matrix_exp_skew(np.zeros((3, 3))), np.eye(3), atol=1e-15)
    t = np.pi / 3
    q = matrix_exp_skew(np.array([[0.0, t], [-t, 0.0]]))
    assert q[0, 0] == pytest.approx(0.5, abs=1e-14)
    assert np.allclose(q, [[np.cos(t), np.sin(t)], [-np.sin(t), np.cos(t)]], atol=1e-14)
    a = rng.standard_normal((5, 5))
    q = matrix_exp_skew(a - a.T)
    assert np.max(np.abs(q.T @ q - np.eye(5))) <= 1e-10
    assert np.linalg.det(q) == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ValueError, match="skew"):
        matrix_exp_skew(np.eye(2))


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2 ** 32 - 1))
def test_packing_is_a_frobenius_isometry(n, seed):
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((n, n))
    h = h + h.T
    x = pack_sym(h)
    assert abs(np.linalg.norm(x) - np.linalg.norm(h)) <= 1e-14 * max(np.linalg.norm(h), 1)
    assert np.array_equal(unpack_sym(x, n), h) or np.allclose(unpack_sym(x, n), h, atol=1e-15)


def test_vector_kl_degenerate_case(rng):
    s = random_set(rng, 5, 4)
    a = vector_kl(VectorFieldSet(s, 1)).spectral
    b = decompose(s)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)


def test_vector_kl_block_diagonal(rng):
    nodes, m1, m2 = 4, 3, 5
    c1 = rng.standard_normal((nodes, m1))
    c2 = rng.standard_normal((nodes, m2))
    vals = np.zeros((nodes, 2, m1 + m2))
    vals[:, 0, :m1] = c1
    vals[:, 1, m1:] = c2
    w = rng.uniform(0.5, 1.5, m1 + m2)
    grid = ParameterGrid(np.arange(m1 + m2, dtype=float), w)
    kl = vector_kl(VectorFieldSet(SnapshotSet(vals.reshape(2 * nodes, -1), grid), 2))
    s1 = decompose(SnapshotSet(c1, ParameterGrid(np.arange(m1, dtype=float), w[:m1])))
    s2 = decompose(SnapshotSet(c2, ParameterGrid(np.arange(m2, dtype=float), w[m1:])))
    union = np.sort(np.concatenate([s1.eigenvalues, s2.eigenvalues]))[::-1]
    assert np.allclose(kl.spectral.eigenvalues, union, rtol=1e-10)
    modes = kl.component_modes()
    assert modes.shape == (nodes, 2, union.size)


def test_vector_kl_reconstruction_and_kernel_blocks(rng):
    s = random_set(rng, 2 * 6, 5)
    v = VectorFieldSet(s, 2)
    kl = vector_kl(v)
    rm = ReducedModel.full(kl.spectral)
    assert np.linalg.norm(reconstruct_all(rm) - s.values) <= 1e-8 * np.linalg.norm(s.values)
    coeff = s.values.reshape(6, 2, 5)
    for i, j in [(0, 0), (1, 3), (4, 2)]:
        block = v.kernel_block(i, j)
        oracle = np.array([[coeff[:, k, i] @ coeff[:, l, j] for l in range(2)] for k in range(2)])
        assert np.allclose(block, oracle, rtol=1e-12, atol=1e-14)


def test_vector_kl_orthogonal_basis_invariance(rng):
    s = random_set(rng, 3 * 4, 6)
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    a = vector_kl(VectorFieldSet(s, 3)).spectral.eigenvalues
    b = vector_kl(VectorFieldSet(s, 3, q)).spectral.eigenvalues
    assert np.allclose(np.sort(a), np.sort(b), rtol=1e-10)


def test_vector_layout_errors(rng):
    with pytest.raises(ValueError, match="cannot be split"):
        VectorFieldSet(random_set(rng, 5, 3), 2)
    with pytest.raises(ValueError, match="full-rank"):
        VectorFieldSet(random_set(rng, 4, 3), 2, np.ones((2, 2)))


def test_spd_constant_field(rng):
    a0 = random_spd(rng, 3)
    grid = ParameterGrid.uniform(np.arange(6.0))
    model = spd_field_reduce(SPDFieldSet(np.repeat(a0[None], 6, axis=0)), grid)
    assert model.rank == 0
    for j in range(6):
        assert np.allclose(model.evaluate(j), a0, rtol=1e-12, atol=1e-12)


def test_spd_diagonal_single_mode(rng):
    c = rng.standard_normal(8)
    mats = np.array([np.diag([np.exp(cj), 1.0]) for cj in c])
    model = spd_field_reduce(SPDFieldSet(mats), ParameterGrid.uniform(np.arange(8.0)))
    assert model.rank == 1
    for j in range(8):
        assert np.allclose(model.evaluate(j), mats[j], rtol=1e-12)


def test_spd_random_fields(rng):
    mats = np.array([random_spd(rng, 3) for _ in range(20)])
    f = SPDFieldSet(mats)
    grid = ParameterGrid(rng.uniform(size=(20, 2)), rng.uniform(0.5, 1.5, 20))
    full = spd_field_reduce(f, grid)
    assert full.rank == 6
    for j in range(20):
        assert np.linalg.norm(full.evaluate(j) - mats[j]) <= 1e-8 * np.linalg.norm(mats[j])
    for n in range(full.rank + 1):
        model = spd_field_reduce(f, grid, rank=n)
        for j in range(20):
            a = model.evaluate(j)
            assert np.array_equal(a, a.T)
            assert np.linalg.eigvalsh(a).min() > 0
    with pytest.raises(ValueError, match="exceeds"):
        spd_field_reduce(f, grid, rank=7)


def test_spd_ingestion_rejects_indefinite():
    with pytest.raises(ValueError, match="sample 1"):
        SPDFieldSet(np.array([np.eye(2), np.diag([1.0, -1.0])]))
