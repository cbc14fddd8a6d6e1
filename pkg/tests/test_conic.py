import io

import numpy as np
import pytest
import scipy.sparse as sp

from tnn import conic
from tnn.conic import (INFEASIBLE, OPTIMAL, PSD, UNBOUNDED, ZERO, CertificateUnavailable, ConeBlock, ConicProgram,
                       Settings, dual_certificate, solve)
from tnn.conic.cvxopt_backend import available as cvxopt_available

BACKENDS = ["builtin"] + (["cvxopt"] if cvxopt_available() else [])

# x = (X11, X12, X22) laid out row-major into a 2x2 block
SYM2 = sp.csr_matrix(np.array([[1, 0, 0], [0, 1, 0], [0, 1, 0], [0, 0, 1]], dtype=float))


def min_eig_program(C):
    c = np.array([C[0, 0], 2 * C[0, 1], C[1, 1]])
    return ConicProgram(c, sp.csr_matrix([[1.0, 0, 1.0]]), [1.0], [ConeBlock(PSD, 2, SYM2, "X")],
                        meta={"tensor_rows": [0], "scale": 1.0})


@pytest.mark.parametrize("backend", BACKENDS)
def test_min_eigenvalue_sdp(backend):
    C = np.array([[2.0, 1.0], [1.0, 3.0]])
    sol = solve(min_eig_program(C), Settings(backend=backend))
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(np.linalg.eigvalsh(C)[0], abs=1e-7)
    assert sol.dual_objective == pytest.approx(sol.objective, abs=1e-7)
    X = SYM2.toarray() @ sol.x
    assert np.linalg.eigvalsh(X.reshape(2, 2))[0] > -1e-8


def test_dual_certificate_of_min_eigenvalue():
    C = np.array([[0.0, 1.0], [1.0, 0.0]])
    prog = min_eig_program(C)
    sol = solve(prog)
    p, value = dual_certificate(sol, prog)
    # the multiplier of trace(X) = 1 equals the optimum
    assert value == pytest.approx(-1.0, abs=1e-7)
    Z = sol.psd_duals[0]
    assert np.linalg.eigvalsh(Z)[0] > -1e-8
    assert np.trace(Z @ (SYM2.toarray() @ sol.x).reshape(2, 2)) == pytest.approx(0.0, abs=1e-7)


def test_certificate_unavailable_when_not_optimal():
    prog = ConicProgram([0, 0, 0.0], sp.csr_matrix([[1.0, 0, 1.0]]), [-1.0], [ConeBlock(PSD, 2, SYM2)],
                        meta={"tensor_rows": [0]})
    sol = solve(prog)
    assert sol.status == INFEASIBLE
    with pytest.raises(CertificateUnavailable):
        dual_certificate(sol, prog)


@pytest.mark.parametrize("backend", BACKENDS)
def test_detects_infeasibility(backend):
    # trace(X) = -1 with X PSD
    prog = ConicProgram([1.0, 0, 1.0], sp.csr_matrix([[1.0, 0, 1.0]]), [-1.0], [ConeBlock(PSD, 2, SYM2)])
    assert solve(prog, Settings(backend=backend)).status == INFEASIBLE


def test_inconsistent_equalities_are_infeasible():
    A = sp.csr_matrix([[1.0, 0, 0], [1.0, 0, 0]])
    prog = ConicProgram([1.0, 0, 1.0], A, [1.0, 2.0], [ConeBlock(PSD, 2, SYM2)])
    assert solve(prog).status == INFEASIBLE


@pytest.mark.parametrize("backend", BACKENDS)
def test_detects_unboundedness(backend):
    # minimize -X11 over PSD matrices with X22 = 1
    prog = ConicProgram([-1.0, 0, 0], sp.csr_matrix([[0, 0, 1.0]]), [1.0], [ConeBlock(PSD, 2, SYM2)])
    assert solve(prog, Settings(backend=backend)).status == UNBOUNDED


def test_zero_block_acts_as_equalities():
    # X12 forced to zero via a 1x1 zero block
    zero = ConeBlock(ZERO, 1, sp.csr_matrix([[0, 1.0, 0]]), "z")
    C = np.array([[2.0, 1.0], [1.0, 3.0]])
    base = min_eig_program(C)
    prog = ConicProgram(base.c, base.A, base.b, base.blocks + [zero])
    sol = solve(prog)
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(2.0, abs=1e-7)
    assert abs(sol.x[1]) < 1e-7


def test_constant_term_in_block():
    # [[1, x], [x, 1]] PSD, minimize x  ->  -1
    coef = sp.csr_matrix(np.array([[0.0], [1.0], [1.0], [0.0]]))
    blk = ConeBlock(PSD, 2, coef, "c", const=np.eye(2))
    sol = solve(ConicProgram([1.0], None, np.zeros(0), [blk]))
    assert sol.status == OPTIMAL
    assert sol.x[0] == pytest.approx(-1.0, abs=1e-7)


def test_program_validation():
    with pytest.raises(ValueError):
        ConicProgram([1.0, 0, 1.0], sp.csr_matrix([[1.0, 0]]), [1.0], [ConeBlock(PSD, 2, SYM2)])
    with pytest.raises(ValueError):
        ConicProgram([1.0, 0, 1.0], None, np.zeros(0), [ConeBlock(ZERO, 2, SYM2)])
    with pytest.raises(ValueError):
        ConicProgram([np.inf, 0, 1.0], None, np.zeros(0), [ConeBlock(PSD, 2, SYM2)])


def test_unknown_backend():
    with pytest.raises(ValueError):
        solve(min_eig_program(np.eye(2)), Settings(backend="mosek"))


def test_dump_lists_every_nonzero():
    buf = io.StringIO()
    min_eig_program(np.array([[2.0, 1.0], [1.0, 3.0]])).dump(buf)
    lines = [ln for ln in buf.getvalue().splitlines() if not ln.startswith("#")]
    assert "A 0 0 1.0" in lines and "b 0 0 1.0" in lines
    assert sum(ln.startswith("psd0.") for ln in lines) == 4
    assert sum(ln.startswith("c ") for ln in lines) == 3


@pytest.mark.skipif(not cvxopt_available(), reason="cvxopt not installed")
def test_backends_agree_on_random_sdps():
    rng = np.random.default_rng(4)
    for _ in range(5):
        B = rng.standard_normal((2, 2))
        C = B + B.T
        prog = min_eig_program(C)
        a = solve(prog, Settings(backend="builtin"))
        b = solve(prog, Settings(backend="cvxopt"))
        assert a.objective == pytest.approx(b.objective, abs=1e-6)


def test_public_names():
    assert set(conic.BACKENDS) == {"builtin", "cvxopt"}
