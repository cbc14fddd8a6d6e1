import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tnn.extract import (NO, YES, AtomicMeasure, ExtractionError, Support, certify_membership,
                         extract_atoms, flat_truncation, numeric_rank, random_objective)
from tnn.mindex import EXACT, ZERO_AND_EXACT, Tms, basis, enumerate_indices
from tnn.moments import COMPLEX_SECTOR, HALF_SPHERE, PRODUCT_SPHERES, SPHERE


def sphere_atoms(rng, r, n):
    X = rng.standard_normal((r, n))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def match(mu, X, w):
    """Max distance from each true atom to the nearest extracted atom, and weight error."""
    order = [int(np.argmin(np.linalg.norm(mu.atoms - x, axis=1))) for x in X]
    return (max(np.linalg.norm(mu.atoms[j] - x) for j, x in zip(order, X)),
            float(np.max(np.abs(mu.weights[order] - w))))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 3), st.integers(1, 3))
def test_round_trip_on_synthetic_measures(seed, n, r):
    rng = np.random.default_rng(seed)
    X = sphere_atoms(rng, r, n)
    if r > 1 and min(np.linalg.norm(X[i] - X[j]) for i in range(r) for j in range(i)) < 0.2:
        X[1:] = np.roll(np.eye(n), 1, axis=0)[: r - 1]  # keep atoms well separated
    w = rng.random(r) + 0.2
    z = Tms.from_atoms(X, w, 6)
    fl = flat_truncation(z, 3)
    assert fl.flat and fl.rank == r
    mu = extract_atoms(z, fl.t, fl.rank, Support(SPHERE, n))
    back = mu.moments(6)
    assert np.max(np.abs(back.values - z.values)) <= 1e-6
    assert len(mu) == r


def test_extract_recovers_atoms_and_weights():
    X = np.array([[1.0, 0.0], [0.6, 0.8], [0.0, -1.0]])
    w = np.array([0.5, 1.0, 2.0])
    z = Tms.from_atoms(X, w, 6)
    mu = extract_atoms(z, 3, 3, Support(SPHERE, 2), polish=False)
    d, dw = match(mu, X, w)
    assert d < 1e-10 and dw < 1e-10


def test_flat_truncation_reports_rank():
    X = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    z = Tms.from_atoms(X, np.ones(2), 4)
    fl = flat_truncation(z, 2)
    assert fl == (True, 2, 2)
    with pytest.raises(ValueError):
        flat_truncation(z, 3)


def test_non_flat_vector():
    # the uniform distribution on the circle is never flat
    th = np.linspace(0, 2 * np.pi, 200, endpoint=False)
    X = np.c_[np.cos(th), np.sin(th)]
    z = Tms.from_atoms(X, np.full(200, 1 / 200), 6)
    assert not flat_truncation(z, 3).flat


def test_extract_rejects_bad_requests():
    z = Tms.from_atoms(np.array([[1.0, 0.0]]), np.ones(1), 4)
    with pytest.raises(ExtractionError):
        extract_atoms(z, 2, 3)
    with pytest.raises(ExtractionError):
        extract_atoms(z, 0, 1)
    assert len(extract_atoms(z, 2, 0)) == 0


def test_numeric_rank():
    assert numeric_rank(np.diag([1.0, 1e-3, 1e-9])) == 2
    assert numeric_rank(np.zeros((2, 2))) == 0


def test_support_canonicalize_half_sphere_and_sector():
    hs = Support(HALF_SPHERE, 2, m=4)
    out = hs.canonicalize(np.array([[-0.6, -0.8]]))
    assert out.tolist() == [[0.6, 0.8]]
    with pytest.raises(ExtractionError):
        Support(HALF_SPHERE, 2, m=3).canonicalize(np.array([[-0.6, -0.8]]))
    sec = Support(COMPLEX_SECTOR, 4, m=3)
    rng = np.random.default_rng(0)
    for _ in range(10):
        w = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        w /= np.linalg.norm(w)
        c = sec.canonicalize(np.r_[w.real, w.imag][None, :])
        assert sec.violation(c) < 1e-12
        u = c[0, :2] + 1j * c[0, 2:]
        assert np.allclose(u ** 3 / w ** 3, 1.0)


def test_support_validation():
    with pytest.raises(ValueError):
        Support("torus", 2)
    with pytest.raises(ValueError):
        Support(COMPLEX_SECTOR, 3, m=3)
    with pytest.raises(ValueError):
        Support(PRODUCT_SPHERES, 4, dims=(2, 3))
    assert Support(PRODUCT_SPHERES, 5, dims=(2, 3)).min_order == 2


def test_atomic_measure_checks():
    with pytest.raises(ValueError):
        AtomicMeasure(np.ones((2, 2)), np.ones(3), SPHERE)
    with pytest.raises(ValueError):
        AtomicMeasure(np.ones((1, 2)), np.zeros(1), SPHERE)
    assert AtomicMeasure(np.ones((2, 2)), np.array([1.0, 2.0]), SPHERE).mass == 3.0


def test_random_objective_is_positive_and_seeded():
    a = random_objective(3, 2, 2, seed=5)
    assert np.array_equal(a, random_objective(3, 2, 2, seed=5))
    assert not np.array_equal(a, random_objective(3, 2, 2, seed=6))
    rng = np.random.default_rng(1)
    for _ in range(10):
        x = rng.standard_normal(3)
        assert a @ Tms.dirac(x, 4).values > 0


def _y(X, w, m):
    z = Tms.from_atoms(X, w, m)
    return z.values[basis(X.shape[1], m).positions(enumerate_indices(X.shape[1], m, ZERO_AND_EXACT))]


def test_membership_yes_for_a_measure():
    X = np.array([[1.0, 0.0], [0.6, -0.8]])
    w = np.array([1.0, 0.5])
    res = certify_membership(_y(X, w, 3), Support(SPHERE, 2, m=3), 4)
    assert res.member == YES
    assert res.measure.moments(3).values[basis(2, 3).degree_slice(3)] == pytest.approx(
        _y(X, w, 3)[1:], abs=1e-6)


def test_membership_no_when_mass_is_too_small():
    y = np.r_[0.1, 1.0, np.zeros(len(enumerate_indices(2, 3, EXACT)) - 1)]
    member, measure = certify_membership(y, Support(SPHERE, 2, m=3), 3)
    assert member == NO
    assert measure is None


def test_membership_zero_vector_and_bad_input():
    res = certify_membership(np.zeros(5), Support(SPHERE, 2, m=3), 3)
    assert res.member == YES and len(res.measure) == 0
    with pytest.raises(ValueError):
        certify_membership(np.zeros(4), Support(SPHERE, 2, m=3), 3)
    with pytest.raises(ValueError):
        certify_membership(np.full(5, np.nan), Support(SPHERE, 2, m=3), 3)
