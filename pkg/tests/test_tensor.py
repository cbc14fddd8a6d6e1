import itertools
from math import sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tnn.fixtures import binary_cubic_a, sym_abc
from tnn.tensor import (COMPLEX, REAL, NuclearDecomposition, SymmetryError, SymTensor, Term, hs_inner, hs_norm,
                        reconstruct, symmetrize3)

CUBIC_A_REAL_COLUMNS = np.array([[0.0000, -0.7937, 0.7937],
                              [-0.5774, 0.4582, 0.4582]])


def random_tensor(rng, m, n, field=REAL):
    T = SymTensor.zeros(m, n, field)
    re = rng.standard_normal(len(T.monomials))
    im = rng.standard_normal(len(T.monomials)) if field == COMPLEX else None
    return SymTensor(m, n, field, re, im)


def test_from_dense_picks_orbit_values():
    A = np.zeros((2, 2, 2))
    A[0, 0, 1] = A[0, 1, 0] = A[1, 0, 0] = 1 / sqrt(3)
    T = SymTensor.from_dense(A)
    assert T.monomials == [(3, 0), (2, 1), (1, 2), (0, 3)]
    assert T.a_re == pytest.approx([0, 0.57735, 0, 0], abs=1e-5)
    assert T.field == REAL


def test_from_dense_zero():
    T = SymTensor.from_dense(np.zeros((3, 3, 3)))
    assert T.is_zero


def test_from_dense_rejects_asymmetry_and_names_indices():
    with pytest.raises(SymmetryError, match=r"\(2, 1\)|\(1, 2\)"):
        SymTensor.from_dense(np.array([[1.0, 2.0], [3.0, 4.0]]))


def test_from_dense_options():
    A = np.array([[1.0, 2.0], [4.0, 5.0]])
    assert SymTensor.from_dense(A, symmetrize=True).a_re.tolist() == [1.0, 3.0, 5.0]
    assert SymTensor.from_dense(A, representative=True).a_re.tolist() == [1.0, 2.0, 5.0]
    with pytest.raises(ValueError):
        SymTensor.from_dense(A, symmetrize=True, representative=True)
    with pytest.raises(ValueError):
        SymTensor.from_dense(np.zeros((2, 3)))


def test_from_poly_examples():
    T = SymTensor.from_poly({(1, 1, 1): 1.0}, 3, 3)
    pos = T.monomials.index((1, 1, 1))
    assert T.a_re[pos] == pytest.approx(1 / 6)
    assert np.count_nonzero(T.a_re) == 1
    assert SymTensor.from_poly({(3, 0, 0): 1.0}, 3, 3).a_re[0] == 1.0
    T = SymTensor.from_poly({(2, 2): 1.0}, 4, 2)
    assert T.a_re[T.monomials.index((2, 2))] == pytest.approx(1 / 6)
    with pytest.raises(ValueError):
        SymTensor.from_poly({(2, 0): 1.0, (1, 0): 1.0}, 2, 2)


def test_evaluate_matches_polynomial():
    T = SymTensor.from_poly({(1, 1, 1): 1.0}, 3, 3)
    x = np.array([0.3, -0.5, 2.0])
    assert T.evaluate(x) == pytest.approx(0.3 * -0.5 * 2.0)


def test_dense_round_trip():
    rng = np.random.default_rng(3)
    for field in (REAL, COMPLEX):
        T = random_tensor(rng, 4, 3, field)
        back = SymTensor.from_dense(T.to_dense(), field)
        assert np.array_equal(back.a_re, T.a_re) and np.array_equal(back.a_im, T.a_im)


def test_reconstruct_single_term():
    d = NuclearDecomposition([Term(1.0, np.array([1.0, 0, 0]), np.zeros(3))], REAL, 3, 3)
    T = reconstruct(d)
    assert T.a_re[0] == 1.0 and np.count_nonzero(T.a_re) == 1


def test_reconstruct_empty_is_zero():
    assert reconstruct(NuclearDecomposition([], REAL, 3, 2)).is_zero


def test_reconstruct_reference_real_decomposition():
    d = NuclearDecomposition.from_unnormalized(CUBIC_A_REAL_COLUMNS, 3)
    assert hs_norm(reconstruct(d) - binary_cubic_a()) <= 5e-4
    assert d.mass == pytest.approx(sqrt(3), abs=1e-3)


def test_decomposition_invariants():
    with pytest.raises(ValueError):
        NuclearDecomposition([Term(1.0, np.array([1.0, 1.0]), np.zeros(2))], REAL, 3, 2)
    with pytest.raises(ValueError):
        NuclearDecomposition([Term(0.0, np.array([1.0, 0.0]), np.zeros(2))], REAL, 3, 2)


def test_hs_norm_examples():
    e1 = SymTensor.from_poly({(3, 0): 1.0}, 3, 2)
    assert hs_norm(e1) == pytest.approx(1.0)
    T = SymTensor.from_poly({(1, 1, 1): 1.0}, 3, 3)
    dense = T.to_dense()
    assert hs_norm(T) == pytest.approx(1 / sqrt(6))
    assert hs_norm(T) == pytest.approx(np.sqrt(np.sum(dense ** 2)))


def test_hs_inner_shape_mismatch():
    with pytest.raises(ValueError):
        hs_inner(SymTensor.zeros(3, 2), SymTensor.zeros(3, 3))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(2, 2), (3, 2), (3, 3), (4, 2)]))
def test_hs_inner_properties(seed, shape):
    m, n = shape
    rng = np.random.default_rng(seed)
    A, B, C = (random_tensor(rng, m, n, COMPLEX) for _ in range(3))
    assert hs_inner(A, B) == pytest.approx(np.conj(hs_inner(B, A)))
    a, b = 0.7, -1.3
    assert hs_inner(A * a + B * b, C) == pytest.approx(a * hs_inner(A, C) + b * hs_inner(B, C))
    assert hs_inner(A, A).real == pytest.approx(hs_norm(A) ** 2)
    assert np.sum(np.abs(A.to_dense()) ** 2) == pytest.approx(hs_norm(A) ** 2)


def test_symmetrize3():
    e1 = np.array([1.0, 0, 0])
    assert hs_norm(symmetrize3(e1, e1, e1) - SymTensor.from_poly({(3, 0, 0): 1.0}, 3, 3)) < 1e-15
    a, b, c = np.array([1.0, 0, 0]), np.array([1.0, 1, 0]), np.array([1.0, 1, 1])
    S = symmetrize3(a, b, c)
    for perm in itertools.permutations((a, b, c)):
        assert hs_norm(symmetrize3(*perm) - S) < 1e-15
    assert hs_norm(S - sym_abc()) < 1e-15


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
def test_phase_rotation_leaves_tensor_unchanged(seed, m):
    rng = np.random.default_rng(seed)
    n, r = 3, 3
    W = rng.standard_normal((r, n)) + 1j * rng.standard_normal((r, n))
    W /= np.linalg.norm(W, axis=1, keepdims=True)
    lam = rng.random(r) + 0.1
    tau = np.exp(2j * np.pi * rng.integers(0, m, size=r) / m)
    d1 = NuclearDecomposition([Term(l, w.real, w.imag) for l, w in zip(lam, W)], COMPLEX, m, n)
    d2 = NuclearDecomposition([Term(l, (t * w).real, (t * w).imag) for l, w, t in zip(lam, W, tau)], COMPLEX, m, n)
    assert hs_norm(reconstruct(d1) - reconstruct(d2)) < 1e-12


def test_poly_of_reconstruct_round_trip():
    rng = np.random.default_rng(11)
    W = rng.standard_normal((4, 3))
    W /= np.linalg.norm(W, axis=1, keepdims=True)
    d = NuclearDecomposition([Term(1.0 + i, w, np.zeros(3)) for i, w in enumerate(W)], REAL, 4, 3)
    T = reconstruct(d)
    coeffs = dict(zip(T.monomials, T.poly_coeffs().real))
    assert hs_norm(SymTensor.from_poly(coeffs, 4, 3) - T) < 1e-13


def test_arithmetic_and_fields():
    A = SymTensor.from_avector([1.0, 2.0, 3.0], 2, 2)
    B = SymTensor.from_avector([1j, 0, 0], 2, 2)
    assert (A + B).field == COMPLEX
    assert (A - A).is_zero
    assert (-A).a_re.tolist() == [-1.0, -2.0, -3.0]
    with pytest.raises(ValueError):
        SymTensor(2, 2, REAL, [1, 2, 3], [0, 1, 0])
    with pytest.raises(ValueError):
        SymTensor(2, 2, "quaternion", [1, 2, 3], None)
