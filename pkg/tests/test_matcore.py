import itertools
import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from cloakmat import (Permutation, as_matrix, from_mxb_bytes, gen_permutation, make_rng,
                      mat_mul_naive, parse_text, read_matrix, to_mxb_bytes, write_matrix, format_text)
from cloakmat.errors import (InvalidDimensionError, MalformedHeaderError, MalformedValueError,
                             NonFiniteValueError, ParameterError, TruncatedPayloadError)
from oracles import column_major_product, rel_fro


def test_permutation_of_one_is_identity():
    for seed in range(5):
        assert gen_permutation(1, make_rng(seed)).forward.tolist() == [0]


def test_permutation_deterministic_per_seed():
    a = gen_permutation(3, make_rng(11)).forward
    b = gen_permutation(3, make_rng(11)).forward
    assert a.tolist() == b.tolist()
    assert sorted(a.tolist()) == [0, 1, 2]


def test_permutation_zero_size_rejected():
    with pytest.raises(InvalidDimensionError):
        gen_permutation(0, make_rng(0))


def test_fisher_yates_uniform_over_s5():
    rng = make_rng(5)
    counts = dict.fromkeys(itertools.permutations(range(5)), 0)
    draws = 10000
    for _ in range(draws):
        counts[tuple(gen_permutation(5, rng).forward.tolist())] += 1
    freqs = np.array(list(counts.values())) / draws
    assert len(counts) == 120
    assert np.all(np.abs(freqs - 1 / 120) <= 0.01)
    # chi-square with 119 dof: mean 119, sd ~15.4; 6 sd is a generous ceiling
    expected = draws / 120
    chi2 = float(np.sum((np.array(list(counts.values())) - expected) ** 2 / expected))
    assert chi2 < 119 + 6 * 15.4


def test_permutation_invariants_enforced():
    with pytest.raises(ParameterError):
        Permutation.from_forward([0, 0, 1])
    p = Permutation.from_forward([2, 0, 1])
    assert np.array_equal(p.inverse[p.forward], np.arange(3))


def test_naive_product_small():
    out = mat_mul_naive([[1, 2], [3, 4]], [[5, 6], [7, 8]])
    assert out.tolist() == [[19, 22], [43, 50]]


def test_naive_product_identity(rng):
    a = rng.standard_normal((4, 4))
    assert np.array_equal(mat_mul_naive(a, np.eye(4)), a)


def test_naive_product_against_other_loop_order(rng):
    a, b = rng.standard_normal((8, 9)), rng.standard_normal((9, 7))
    assert rel_fro(mat_mul_naive(a, b), column_major_product(a, b)) <= 1e-12


def test_naive_product_dimension_mismatch():
    with pytest.raises(InvalidDimensionError):
        mat_mul_naive(np.ones((2, 3)), np.ones((2, 3)))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 32), st.integers(1, 32), st.integers(1, 32), st.integers(1, 32), st.integers(0, 2**32))
def test_naive_product_associative(m, n, s, t, seed):
    r = np.random.default_rng(seed)
    a, b, c = (r.uniform(-1e3, 1e3, shape) for shape in ((m, n), (n, s), (s, t)))
    left = mat_mul_naive(mat_mul_naive(a, b), c)
    right = mat_mul_naive(a, mat_mul_naive(b, c))
    assert rel_fro(left, right) <= 1e-9


def test_as_matrix_rejects_bad_input():
    with pytest.raises(InvalidDimensionError):
        as_matrix(np.empty((0, 3)))
    with pytest.raises(ParameterError):
        as_matrix([[1.0, np.nan]])


def test_binary_round_trip_bit_exact(tmp_path, rng):
    a = rng.standard_normal((3, 2))
    path = tmp_path / "a.mxb"
    write_matrix(path, a)
    raw = path.read_bytes()
    b = read_matrix(path)
    assert b.shape == (3, 2)
    assert b.tobytes() == a.tobytes()
    write_matrix(tmp_path / "b.mxb", b)
    assert (tmp_path / "b.mxb").read_bytes() == raw


def test_binary_layout():
    blob = to_mxb_bytes(np.array([[1.0, 2.0]]))
    assert blob[:4] == b"MXB1"
    assert struct.unpack("<QQ", blob[4:20]) == (1, 2)
    assert struct.unpack("<2d", blob[20:]) == (1.0, 2.0)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)),
              elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_binary_round_trip_property(a):
    assert from_mxb_bytes(to_mxb_bytes(a)).tobytes() == np.ascontiguousarray(a).tobytes()


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)),
              elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_text_round_trip_property(a):
    assert np.array_equal(parse_text(format_text(a)), a)


def test_read_worked_text_file(tmp_path):
    path = tmp_path / "x.txt"
    path.write_text("1,0,2\n0,3,4")
    assert read_matrix(path).tolist() == [[1, 0, 2], [0, 3, 4]]


def test_header_promises_more_than_payload():
    blob = b"MXB1" + struct.pack("<QQ", 2, 2) + struct.pack("<3d", 1, 2, 3)
    with pytest.raises(TruncatedPayloadError):
        from_mxb_bytes(blob)


@pytest.mark.parametrize("blob", [b"MXB", b"XXXX" + bytes(16), b"MXB1" + struct.pack("<QQ", 0, 3)])
def test_malformed_headers(blob):
    with pytest.raises(MalformedHeaderError):
        from_mxb_bytes(blob)


def test_nonfinite_payload_rejected():
    blob = b"MXB1" + struct.pack("<QQ", 1, 2) + struct.pack("<2d", 1.0, float("inf"))
    with pytest.raises(NonFiniteValueError):
        from_mxb_bytes(blob)


def test_text_errors():
    with pytest.raises(TruncatedPayloadError):
        parse_text("1,2\n3")
    with pytest.raises(MalformedValueError):
        parse_text("1,abc")
    with pytest.raises(NonFiniteValueError):
        parse_text("1,nan")


def test_rng_streams_reproducible():
    assert np.array_equal(make_rng(3).random(5), make_rng(3).random(5))
    with pytest.raises(ParameterError):
        make_rng(-1)
