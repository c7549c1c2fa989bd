import itertools

import numpy as np
import pytest

from paramkl import (
    FullTensor, ParameterGrid, SnapshotSet, TTRepresentation, assemble_tensor, decompose,
    tt_decompose, tt_error_bound, tt_eval, tt_reconstruct,
)


def random_tt(rng, dims, ranks):
    r = (1,) + tuple(ranks) + (1,)
    return TTRepresentation(tuple(rng.standard_normal((r[k], n, r[k + 1])) for k, n in enumerate(dims)))


def loop_contract(factors, coeff):
    dims = [f.shape[0] for f in factors]
    out = np.zeros(dims)
    for idx in itertools.product(*map(range, dims)):
        for lidx in itertools.product(*map(range, coeff.shape)):
            term = coeff[lidx]
            for f, i, l in zip(factors, idx, lidx):
                term *= f[i, l]
            out[idx] += term
    return out


def test_full_tensor_validation():
    with pytest.raises(ValueError, match="at least two"):
        FullTensor((3,), np.zeros(3))
    with pytest.raises(ValueError, match="does not match"):
        FullTensor((2, 3), np.zeros(5))


def test_assemble_examples(rng):
    coeff = rng.standard_normal((2, 3, 4))
    out = assemble_tensor([np.eye(2), np.eye(3), np.eye(4)], coeff)
    assert np.array_equal(out.array(), coeff)

    cols = [rng.standard_normal((n, 1)) for n in (3, 4, 2)]
    out = assemble_tensor(cols, np.ones((1, 1, 1)))
    assert np.allclose(out.array(), np.einsum("i,j,k->ijk", *(c[:, 0] for c in cols)))

    factors = [rng.standard_normal((n, l)) for n, l in ((3, 2), (2, 3), (4, 2))]
    coeff = rng.standard_normal((2, 3, 2))
    got = assemble_tensor(factors, coeff).array()
    oracle = loop_contract(factors, coeff)
    assert np.max(np.abs(got - oracle)) <= 1e-12 * np.max(np.abs(oracle))
    with pytest.raises(ValueError, match="factor 1"):
        assemble_tensor([np.eye(2), np.eye(4), np.eye(4)], coeff)


def test_rank_one_tensor(rng):
    a, b, c = rng.standard_normal(3), rng.standard_normal(4), rng.standard_normal(5)
    t = FullTensor.from_array(np.einsum("i,j,k->ijk", a, b, c))
    tt = tt_decompose(t)
    assert tt.ranks == (1, 1)
    assert np.allclose(tt_reconstruct(tt).data, t.data, atol=1e-14)
    for idx in [(0, 0, 0), (2, 3, 4), (1, 2, 3)]:
        assert tt_eval(tt, idx) == pytest.approx(a[idx[0]] * b[idx[1]] * c[idx[2]], rel=1e-12)


def test_exact_round_trip(rng):
    t = FullTensor.from_array(rng.standard_normal((4, 5, 6)))
    tt = tt_decompose(t, tol=0.0)
    assert np.linalg.norm(tt_reconstruct(tt).data - t.data) <= 1e-12 * t.norm
    assert tt.left_orthogonality_defect() <= 1e-10


def test_known_ranks_recovered(rng):
    tt0 = random_tt(rng, (4, 5, 6), (2, 3))
    t = tt_reconstruct(tt0)
    tt = tt_decompose(t)
    assert all(r <= r0 for r, r0 in zip(tt.ranks, (2, 3)))
    assert np.linalg.norm(tt_reconstruct(tt).data - t.data) <= 1e-12 * t.norm


def test_reconstruct_and_eval(rng):
    a, b = rng.standard_normal(3), rng.standard_normal(4)
    tt = TTRepresentation((a.reshape(1, 3, 1), b.reshape(1, 4, 1)))
    assert np.allclose(tt_reconstruct(tt).array(), np.outer(a, b))
    zero = TTRepresentation((np.zeros((1, 3, 2)), np.zeros((2, 4, 1))))
    assert not np.any(tt_reconstruct(zero).data)
    assert tt_eval(zero, (1, 1)) == 0.0
    tt = random_tt(rng, (3, 4, 5, 2), (2, 3, 2))
    full = tt_reconstruct(tt).array()
    for _ in range(100):
        idx = tuple(int(rng.integers(n)) for n in full.shape)
        assert tt_eval(tt, idx) == pytest.approx(full[idx], abs=1e-12 * np.abs(full).max())
    with pytest.raises(IndexError):
        tt_eval(tt, (3, 0, 0, 0))


def test_memory_guard():
    tt = TTRepresentation((np.zeros((1, 10 ** 4, 1)), np.zeros((1, 10 ** 4, 1)), np.zeros((1, 2, 1))))
    with pytest.raises(MemoryError):
        tt_reconstruct(tt)


def test_error_bound_examples(rng):
    assert tt_error_bound([np.array([]), np.array([])]) == 0.0
    assert tt_error_bound([np.array([0.5])]) == 0.5
    # matrix case: bound is exact
    u, _ = np.linalg.qr(rng.standard_normal((4, 2)))
    v, _ = np.linalg.qr(rng.standard_normal((3, 2)))
    t = FullTensor.from_array(u @ np.diag([2.0, 0.5]) @ v.T)
    tt = tt_decompose(t, max_rank=1)
    assert tt_error_bound(tt) == pytest.approx(0.5, rel=1e-12)
    assert np.linalg.norm(tt_reconstruct(tt).data - t.data) == pytest.approx(0.5, rel=1e-10)


def test_tolerance_target_and_monotonicity(rng):
    t = FullTensor.from_array(rng.standard_normal((5, 6, 4, 3)))
    for tol in (0.05, 0.2, 0.5):
        tt = tt_decompose(t, tol)
        assert np.linalg.norm(tt_reconstruct(tt).data - t.data) <= tol * t.norm
    errs = [np.linalg.norm(tt_reconstruct(tt_decompose(t, max_rank=r)).data - t.data) for r in range(1, 8)]
    assert all(b <= a + 1e-12 * t.norm for a, b in zip(errs, errs[1:]))


def test_matrix_case_matches_spectral(rng):
    a = rng.standard_normal((7, 5))
    tt = tt_decompose(FullTensor.from_array(a))
    assert tt.ranks == (np.linalg.matrix_rank(a),)
    sd = decompose(SnapshotSet(a, ParameterGrid(np.arange(5.0), np.ones(5))))
    sig = np.linalg.norm(tt.cores[1].reshape(tt.ranks[0], -1), axis=1)
    assert np.allclose(sig, sd.singular_values, rtol=1e-10)
