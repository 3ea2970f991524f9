import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cloakmat import (Permutation, RankOnePerturbation, ScaledPermutation, SecretMatrix, apply_perm,
                      apply_rank_one, apply_secret, count_multiplications, keygen_scaled_permutation,
                      keygen_secret, make_rng)
from cloakmat.errors import IllConditionedKeyError, InvalidDimensionError, ParameterError
from conftest import WORKED_X, WORKED_X_ENC
from oracles import dense_h, dense_perm, dense_secret, lu_inverse, rel_fro


def test_worked_example_steps(worked_lei_key):
    step = apply_perm(worked_lei_key.p1, WORKED_X, "left")
    assert step.tolist() == [[0, 3, 4], [2, 0, 4]]
    out = apply_perm(worked_lei_key.p2, step, "right", inverse=True)
    assert np.max(np.abs(out - WORKED_X_ENC)) <= 1e-12


@pytest.mark.parametrize("side", ["left", "right"])
@pytest.mark.parametrize("inverse", [False, True])
def test_identity_permutation_is_noop(side, inverse, rng):
    t = rng.standard_normal((4, 4))
    ident = ScaledPermutation(Permutation.identity(4), np.ones(4))
    assert np.array_equal(apply_perm(ident, t, side, inverse), t)


@pytest.mark.parametrize("side", ["left", "right"])
def test_perm_then_inverse(side, rng):
    p = keygen_scaled_permutation(6, 16, rng)
    t = rng.standard_normal((6, 6))
    back = apply_perm(p, apply_perm(p, t, side), side, inverse=True)
    assert rel_fro(back, t) <= 1e-12


def test_rank_one_small_cases():
    h = RankOnePerturbation(np.array([1.0, 1.0]))
    t = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert apply_rank_one(h, t, "left").tolist() == [[4, 6], [4, 6]]
    assert apply_rank_one(h, t, "right").tolist() == [[3, 3], [7, 7]]


def test_rank_one_against_dense(rng):
    h = RankOnePerturbation(rng.uniform(1, 2, 5))
    t = rng.standard_normal((5, 3))
    assert np.max(np.abs(apply_rank_one(h, t, "left") - dense_h(h.h) @ t)) <= 1e-12


def test_secret_of_identity_is_toy_matrix():
    p = ScaledPermutation(Permutation.from_forward([2, 1, 0]), np.array([1.0, 2.0, 3.0]))
    m = SecretMatrix(p, RankOnePerturbation(np.array([4.0, 5.0, 6.0])))
    assert apply_secret(m, np.eye(3), "left").tolist() == [[4, 4, 5], [5, 7, 5], [9, 6, 6]]


def _oracle(kind, key, side, inverse):
    if kind == "perm":
        d = dense_perm(key.perm.forward, key.scale)
    elif kind == "rank1":
        d = dense_h(key.h)
    else:
        d = dense_secret(key)
    return lu_inverse(d) if inverse else d


def _kernel(kind, key, t, side, inverse):
    if kind == "perm":
        return apply_perm(key, t, side, inverse)
    if kind == "rank1":
        return apply_rank_one(key, t, side)
    return apply_secret(key, t, side, inverse)


PATHS = [("perm", False), ("perm", True), ("rank1", False), ("secret", False), ("secret", True)]


@pytest.mark.parametrize("side", ["left", "right"])
@pytest.mark.parametrize("kind,inverse", PATHS)
def test_kernels_match_dense_oracle(kind, inverse, side, rng):
    for _ in range(40):
        n, k = rng.integers(1, 49, 2)
        if kind == "perm":
            key = keygen_scaled_permutation(n, 16, rng)
        elif kind == "rank1":
            key = RankOnePerturbation(rng.uniform(1, 2, n) * rng.choice([-1, 1], n))
        else:
            key = keygen_secret(n, 16, rng)
        t = rng.standard_normal((n, k) if side == "left" else (k, n))
        d = _oracle(kind, key, side, inverse)
        want = d @ t if side == "left" else t @ d
        assert rel_fro(_kernel(kind, key, t, side, inverse), want) <= 1e-9


def test_inverse_against_lu(rng):
    m = keygen_secret(12, 16, rng)
    t = rng.standard_normal((12, 5))
    assert rel_fro(apply_secret(m, t, "left", inverse=True), lu_inverse(dense_secret(m)) @ t) <= 1e-8


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 64), st.integers(1, 20), st.sampled_from(["left", "right"]), st.integers(0, 2**32))
def test_sherman_morrison_round_trip(n, k, side, seed):
    r = make_rng(seed)
    m = keygen_secret(n, 16, r)
    t = r.standard_normal((n, k) if side == "left" else (k, n))
    back = apply_secret(m, apply_secret(m, t, side), side, inverse=True)
    assert np.linalg.norm(back - t) <= 1e-9 * np.linalg.norm(t)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.integers(1, 10), st.booleans(), st.integers(0, 2**32))
def test_transpose_duality(n, k, inverse, seed):
    """Right-multiplying T^T by M, transposed back, is M^T T (not M T)."""
    r = make_rng(seed)
    m = keygen_secret(n, 16, r)
    t = r.standard_normal((n, k))
    d = dense_secret(m)
    d = lu_inverse(d) if inverse else d
    got = apply_secret(m, t.T, "right", inverse).T
    assert rel_fro(got, d.T @ t) <= 1e-9


def test_vectors_keep_their_shape(rng):
    m = keygen_secret(4, 16, rng)
    v = rng.standard_normal(4)
    for side in ("left", "right"):
        for inv in (False, True):
            out = apply_secret(m, v, side, inv)
            assert out.shape == (4,)
    assert np.allclose(apply_secret(m, v, "left"), dense_secret(m) @ v)
    assert np.allclose(apply_secret(m, v, "right"), v @ dense_secret(m))


def test_operation_count_linear(rng):
    for n in (16, 64, 200):
        m = keygen_secret(n, 16, rng)
        t = rng.standard_normal((n, n))
        for side in ("left", "right"):
            for inv in (False, True):
                with count_multiplications() as tally:
                    apply_secret(m, t, side, inv)
                assert 0 < tally[0] <= 8 * n * n


def test_count_is_scoped(rng):
    m = keygen_secret(5, 16, rng)
    with count_multiplications() as outer:
        apply_secret(m, np.ones((5, 5)))
        with count_multiplications() as inner:
            apply_secret(m, np.ones((5, 5)))
    assert inner[0] == outer[0] == 50


def test_ill_conditioned_inverse_refused():
    p = ScaledPermutation(Permutation.from_forward([2, 1, 0]), np.array([1.0, 2.0, 3.0]))
    m = SecretMatrix(p, RankOnePerturbation(np.array([-1.0, -1.0, 1.5])))
    apply_secret(m, np.eye(3))  # forward is fine
    with pytest.raises(IllConditionedKeyError):
        apply_secret(m, np.eye(3), inverse=True)


def test_dimension_and_side_errors(rng):
    m = keygen_secret(3, 16, rng)
    with pytest.raises(InvalidDimensionError):
        apply_secret(m, np.ones((4, 3)), "left")
    with pytest.raises(InvalidDimensionError):
        apply_perm(m.p, np.ones((3, 4)), "right")
    with pytest.raises(ParameterError):
        apply_secret(m, np.ones((3, 3)), "top")


def test_results_are_fresh_arrays(rng):
    m = keygen_secret(3, 16, rng)
    t = rng.standard_normal((3, 3))
    keep = t.copy()
    for inv in (False, True):
        out = apply_secret(m, t, "left", inv)
        assert out is not t
    assert np.array_equal(t, keep)


def test_bitwise_reproducible(rng):
    m = keygen_secret(30, 16, rng)
    t = rng.standard_normal((30, 30))
    a = apply_secret(m, t, "right", True)
    b = apply_secret(m, t, "right", True)
    assert a.tobytes() == b.tobytes()
