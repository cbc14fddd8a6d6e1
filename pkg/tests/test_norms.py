from math import sqrt

import numpy as np
import pytest

from tnn.extract import Support
from tnn.fixtures import poly_pair_squares, poly_x1x2x3
from tnn.moments import SPHERE
from tnn.norms import (CERTIFIED, LOWER_BOUND, NonsymDecomposition, NonsymTerm, Options, dual_form_values,
                       nuclear_norm, nuclear_norm_complex, nuclear_norm_nonsym3, nuclear_norm_real,
                       polish_symmetric, shorten_nonsym, spectral_norm_bound, verify, verify_nonsym,
                       workspace_bytes)
from tnn.relax import build_complex
from tnn.tensor import COMPLEX, REAL, NuclearDecomposition, SymTensor, Term, reconstruct


def e1_cubed(n=3):
    return SymTensor.from_poly({(3,) + (0,) * (n - 1): 1.0}, 3, n)


def test_rank_one_real():
    rep = nuclear_norm_real(e1_cubed())
    assert rep.certified and rep.value == pytest.approx(1.0, abs=1e-7)
    assert len(rep.decomposition) == 1
    assert rep.residual < 1e-8
    assert rep.trace[0][0] == rep.order == 2


def test_rank_one_complex():
    w = np.array([1.0, 1j]) / sqrt(2)
    A = reconstruct(NuclearDecomposition([Term(2.0, w.real, w.imag)], COMPLEX, 3, 2))
    rep = nuclear_norm_complex(A)
    assert rep.certified
    assert rep.value == pytest.approx(2.0, abs=1e-6)
    res, mass = verify(A, rep.decomposition)
    assert res < 1e-8 and mass == pytest.approx(2.0, abs=1e-6)


def test_zero_tensor_is_trivial():
    for field in (REAL, COMPLEX):
        rep = nuclear_norm(SymTensor.zeros(3, 2), field)
        assert rep.value == 0.0 and rep.status == CERTIFIED and rep.method == "trivial"


def test_even_order_signed_decomposition():
    # x1^4 - x2^4 needs a negative term in the real field
    A = SymTensor.from_poly({(4, 0): 1.0, (0, 4): -1.0}, 4, 2)
    rep = nuclear_norm_real(A)
    assert rep.certified and rep.value == pytest.approx(2.0, abs=1e-6)
    assert sorted(t.sign for t in rep.decomposition.terms) == [-1, 1]


def test_force_even_agrees_on_odd_order():
    A = poly_x1x2x3()
    a = nuclear_norm_real(A)
    b = nuclear_norm_real(A, Options(force_even=True))
    assert a.value == pytest.approx(b.value, abs=1e-6)


def test_workspace_guard_stops_the_loop():
    rep = nuclear_norm_real(poly_pair_squares(), Options(max_bytes=1.0))
    assert rep.status == LOWER_BOUND and rep.order == 2
    assert len(rep.trace) == 1 and rep.value <= 2.0 + 1e-6
    assert workspace_bytes(build_complex(e1_cubed(2), 2)) > 0


def test_k_max_window():
    A = poly_pair_squares()
    rep = nuclear_norm_real(A, Options(k_max=2))
    assert rep.order == 2 and rep.status == LOWER_BOUND
    with pytest.raises(ValueError):
        nuclear_norm_real(A, Options(k_min=3, k_max=2))


def test_field_and_type_errors():
    Ac = SymTensor.from_avector([1j, 0, 0, 0], 3, 2)
    with pytest.raises(ValueError):
        nuclear_norm_real(Ac)
    with pytest.raises(ValueError):
        nuclear_norm(e1_cubed(), "quaternion")
    with pytest.raises(ValueError):
        nuclear_norm_nonsym3(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        verify(e1_cubed(2), NuclearDecomposition([], REAL, 3, 3))


def test_nonsym_rank_one_and_zero():
    a, b, c = np.array([1.0, 0]), np.array([0.6, 0.8]), np.array([0.0, 0, 1])
    A = 3 * np.einsum("i,j,k->ijk", a, b, c)
    rep = nuclear_norm_nonsym3(A)
    assert rep.certified and rep.value == pytest.approx(3.0, abs=1e-6)
    res, mass = verify_nonsym(A, rep.decomposition)
    assert res < 1e-8
    zero = nuclear_norm_nonsym3(np.zeros((2, 2, 2)))
    assert zero.value == 0 and len(zero.decomposition) == 0


def test_nonsym_decomposition_array():
    d = NonsymDecomposition([NonsymTerm(2.0, (np.array([1.0, 0]), np.array([0, 1.0]), np.array([1.0])))], (2, 2, 1))
    arr = d.to_array()
    assert arr[0, 1, 0] == 2.0 and arr.sum() == 2.0 and d.mass == 2.0


def test_polish_reduces_residual():
    U = np.array([[1.0, 0.0], [0.6, 0.8]])
    A = reconstruct(NuclearDecomposition([Term(1.0, u, np.zeros(2)) for u in U], REAL, 3, 2))
    noisy = U + 1e-4 * np.array([[0.3, -0.2], [0.1, 0.4]])
    noisy /= np.linalg.norm(noisy, axis=1, keepdims=True)
    d = NuclearDecomposition([Term(1.0 + 1e-4, u, np.zeros(2)) for u in noisy], REAL, 3, 2)
    before, _ = verify(A, d)
    after, _ = verify(A, polish_symmetric(A, d, Support(SPHERE, 2, 3)))
    assert after < 1e-3 * before


def test_dual_form_is_bounded_on_sphere():
    for field in (REAL, COMPLEX):
        A = poly_x1x2x3()
        rep = nuclear_norm(A, field, Options(k_max=2))
        vals = dual_form_values(rep, A, samples=20_000)
        assert vals.max() <= 1 + 1e-5


def test_dual_form_needs_a_dual():
    rep = nuclear_norm(SymTensor.zeros(3, 2), REAL)
    with pytest.raises(ValueError):
        dual_form_values(rep, SymTensor.zeros(3, 2))


def test_spectral_bound_examples():
    sb = spectral_norm_bound(e1_cubed())
    assert sb.upper == pytest.approx(1.0, abs=1e-6) and sb.lower == pytest.approx(1.0, abs=1e-6)
    A = poly_x1x2x3()
    # max of x1 x2 x3 on the unit sphere
    want = 1 / (3 * sqrt(3))
    sb = spectral_norm_bound(A)
    assert sb.lower <= want + 1e-9 and want <= sb.upper + 1e-9
    assert sb.upper == pytest.approx(want, rel=1e-5)


def test_seed_reproducibility():
    A = poly_x1x2x3()
    a = nuclear_norm_complex(A, Options(seed=3, k_max=2))
    b = nuclear_norm_complex(A, Options(seed=3, k_max=2))
    assert a.value == b.value and a.trace == b.trace


def test_shorten_nonsym_merges_repeated_terms():
    u, v, w = np.array([0.6, 0.8]), np.array([1.0, 0.0]), np.array([0.0, 1.0])
    A = np.einsum("i,j,k->ijk", u, v, w)
    d = NonsymDecomposition([NonsymTerm(0.5, (u, v, w)), NonsymTerm(0.5, (u, v, w))], (2, 2, 2))
    short = shorten_nonsym(A, d)
    res, mass = verify_nonsym(A, short)
    assert len(short) == 1 and res < 1e-10 and mass == pytest.approx(1.0)


def test_shorten_nonsym_keeps_a_minimal_decomposition():
    e1, e2 = np.eye(2)
    A = np.einsum("i,j,k->ijk", e1, e1, e1) + np.einsum("i,j,k->ijk", e2, e2, e2)
    d = NonsymDecomposition([NonsymTerm(1.0, (e1, e1, e1)), NonsymTerm(1.0, (e2, e2, e2))], (2, 2, 2))
    assert len(shorten_nonsym(A, d)) == 2
