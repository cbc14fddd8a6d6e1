"""Moment relaxations of tensor nuclear norms as conic programs.

Every builder returns a :class:`~tnn.conic.ConicProgram` whose ``meta`` dict
records how to read the solution back:

``kind``          relaxation family tag
``k``             relaxation order
``scale``         the tensor was divided by this before building
``tensor_rows``   equality rows that pin the tensor entries
``cones``         list of ``(offset, ConeSpec)`` for the stacked variables
"""

from __future__ import annotations

from math import ceil, comb

import numpy as np
import scipy.sparse as sp

from .conic import PSD, ZERO, ConeBlock, ConicProgram
from .mindex import EXACT, basis, enumerate_indices
from .moments import (ConeSpec, cone_complex_sector, cone_half_sphere, cone_product_spheres,
                      cone_real_sphere)
from .tensor import COMPLEX, SymTensor, hs_norm

ODD_REAL = "odd-real"
EVEN_REAL = "even-real"
COMPLEX_KIND = "complex"
NONSYM3 = "nonsym3"
KINDS = (ODD_REAL, EVEN_REAL, COMPLEX_KIND, NONSYM3)


def min_order(m: int) -> int:
    return ceil(m / 2)


def _check_k(m: int, k: int):
    if k < min_order(m):
        raise ValueError(f"relaxation order k={k} is below ceil(m/2)={min_order(m)} for order-{m} tensors")


def _scale(nrm: float, normalize: bool) -> float:
    return nrm if (normalize and nrm > 0) else 1.0


def _blocks(cone: ConeSpec, offset: int, ncols: int, tag: str, reduce: bool) -> list:
    if reduce:
        cone = cone.reduced()
    out = []
    for i, L in enumerate(cone.psd):
        out.append(ConeBlock(PSD, L.size, L.lifted(offset, ncols), f"{tag}psd{i}"))
    for i, L in enumerate(cone.zero):
        out.append(ConeBlock(ZERO, L.size, L.lifted(offset, ncols), f"{tag}zero{i}"))
    return out


def _real_entries(A: SymTensor) -> np.ndarray:
    if A.field == COMPLEX and np.any(A.a_im != 0):
        raise ValueError("this relaxation needs a real tensor; use the complex relaxation")
    return A.a_re


def build_odd_real(A: SymTensor, k: int, *, normalize: bool = True, reduce: bool = False) -> ConicProgram:
    """``min z_0`` over the sphere moment cone with the degree-m moments fixed."""
    m, n = A.order, A.dim
    if m % 2 == 0:
        raise ValueError(f"order {m} is even; use build_even_real for even orders")
    _check_k(m, k)
    a = _real_entries(A)
    scale = _scale(hs_norm(A), normalize)
    cone = cone_real_sphere(n, k)
    tms = basis(n, 2 * k)
    L = len(tms)
    rows = tms.positions(A.monomials)
    Aeq = sp.csr_matrix((np.ones(len(rows)), (np.arange(len(rows)), rows)), shape=(len(rows), L))
    c = np.zeros(L)
    c[0] = 1.0
    meta = {"kind": ODD_REAL, "k": k, "scale": scale, "tensor_rows": np.arange(len(rows)),
            "cones": [(0, cone)], "order": m, "dim": n}
    return ConicProgram(c, Aeq, a / scale, _blocks(cone, 0, L, "", reduce), meta)


def build_even_real(A: SymTensor, k: int, *, normalize: bool = True, reduce: bool = False) -> ConicProgram:
    """``min z+_0 + z-_0`` with ``z+ - z-`` matching the tensor, both on the half sphere."""
    m, n = A.order, A.dim
    _check_k(m, k)
    a = _real_entries(A)
    scale = _scale(hs_norm(A), normalize)
    cone = cone_half_sphere(n, k)
    tms = basis(n, 2 * k)
    L = len(tms)
    rows = tms.positions(A.monomials)
    r = np.arange(len(rows))
    Aeq = sp.csr_matrix((np.r_[np.ones(len(rows)), -np.ones(len(rows))], (np.r_[r, r], np.r_[rows, rows + L])),
                        shape=(len(rows), 2 * L))
    c = np.zeros(2 * L)
    c[0] = c[L] = 1.0
    blocks = _blocks(cone, 0, 2 * L, "+", reduce) + _blocks(cone, L, 2 * L, "-", reduce)
    meta = {"kind": EVEN_REAL, "k": k, "scale": scale, "tensor_rows": r,
            "cones": [(0, cone), (L, cone)], "order": m, "dim": n}
    return ConicProgram(c, Aeq, a / scale, blocks, meta)


def realify_terms(alpha) -> tuple[dict, dict]:
    """Real and imaginary parts of ``prod_j (x_j + i x_{n+j})^{alpha_j}`` as ``{gamma: int}``."""
    n = len(alpha)
    terms = {((0,) * (2 * n), 0): 1}  # (exponent, power of i) -> coefficient
    for j, aj in enumerate(alpha):
        nxt = {}
        for (g, ipow), cf in terms.items():
            for t in range(aj + 1):
                e = list(g)
                e[j] += aj - t
                e[n + j] += t
                key = (tuple(e), (ipow + t) % 4)
                nxt[key] = nxt.get(key, 0) + cf * comb(aj, t)
        terms = nxt
    re, im = {}, {}
    for (g, ipow), cf in terms.items():
        sign = 1 if ipow in (0, 1) else -1
        tgt = re if ipow % 2 == 0 else im
        tgt[g] = tgt.get(g, 0) + sign * cf
    return ({g: v for g, v in re.items() if v}, {g: v for g, v in im.items() if v})


def realify(alpha) -> tuple[np.ndarray, np.ndarray]:
    """``(R_alpha, T_alpha)`` as coefficient vectors over the exact-degree monomials in ``2n`` variables."""
    n, m = len(alpha), int(sum(alpha))
    idx = {g: i for i, g in enumerate(enumerate_indices(2 * n, m, EXACT))}
    out = []
    for part in realify_terms(alpha):
        v = np.zeros(len(idx))
        for g, cf in part.items():
            v[idx[g]] = float(cf)
        out.append(v)
    return out[0], out[1]


def build_complex(A: SymTensor, k: int, *, variant: str = "lemma51", normalize: bool = True,
                  reduce: bool = False) -> ConicProgram:
    """Realified relaxation over ``R^{2n}`` with real and imaginary parts pinned."""
    m, n = A.order, A.dim
    _check_k(m, k)
    scale = _scale(hs_norm(A), normalize)
    cone = cone_complex_sector(n, m, k, variant)
    tms = basis(2 * n, 2 * k)
    L = len(tms)
    rr, cc, vv = [], [], []
    mons = A.monomials
    nm = len(mons)
    for i, alpha in enumerate(mons):
        re, im = realify_terms(alpha)
        for row, part in ((i, re), (nm + i, im)):
            for g, cf in part.items():
                rr.append(row)
                cc.append(tms.position(g))
                vv.append(float(cf))
    Aeq = sp.csr_matrix((vv, (rr, cc)), shape=(2 * nm, L))
    b = np.r_[A.a_re, A.a_im] / scale
    c = np.zeros(L)
    c[0] = 1.0
    meta = {"kind": COMPLEX_KIND, "k": k, "scale": scale, "tensor_rows": np.arange(2 * nm),
            "cones": [(0, cone)], "order": m, "dim": n, "variant": variant}
    return ConicProgram(c, Aeq, b, _blocks(cone, 0, L, "", reduce), meta)


def build_nonsym3(A, dims=None, k: int = 2, *, normalize: bool = True, reduce: bool = False) -> ConicProgram:
    """Relaxation over a product of three spheres for a real order-3 array."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 3:
        raise ValueError(f"expected an order-3 array, got {A.ndim} dimensions")
    dims = tuple(A.shape) if dims is None else tuple(int(d) for d in dims)
    if dims != A.shape:
        raise ValueError(f"dims {dims} do not match array shape {A.shape}")
    nrm = float(np.linalg.norm(A))
    scale = _scale(nrm, normalize)
    cone = cone_product_spheres(dims, k)
    N = sum(dims)
    tms = basis(N, 2 * k)
    L = len(tms)
    o2, o3 = dims[0], dims[0] + dims[1]
    cols = []
    for i in range(dims[0]):
        for j in range(dims[1]):
            for l in range(dims[2]):
                e = [0] * N
                e[i] += 1
                e[o2 + j] += 1
                e[o3 + l] += 1
                cols.append(tms.position(tuple(e)))
    ne = len(cols)
    Aeq = sp.csr_matrix((np.ones(ne), (np.arange(ne), cols)), shape=(ne, L))
    c = np.zeros(L)
    c[0] = 1.0
    meta = {"kind": NONSYM3, "k": k, "scale": scale, "tensor_rows": np.arange(ne),
            "cones": [(0, cone)], "order": 3, "dims": dims}
    return ConicProgram(c, Aeq, A.ravel() / scale, _blocks(cone, 0, L, "", reduce), meta)


def build(A: SymTensor, k: int, kind: str, **kw) -> ConicProgram:
    if kind == ODD_REAL:
        return build_odd_real(A, k, **kw)
    if kind == EVEN_REAL:
        return build_even_real(A, k, **kw)
    if kind == COMPLEX_KIND:
        return build_complex(A, k, **kw)
    raise ValueError(f"unknown relaxation kind {kind!r}; expected one of {KINDS[:3]}")


def moment_vectors(prog: ConicProgram, x: np.ndarray) -> list:
    """Unscaled moment vectors, one per stacked variable, from a solver primal."""
    scale = prog.meta["scale"]
    out = []
    for off, cone in prog.meta["cones"]:
        L = len(cone.tms)
        out.append(np.asarray(x[off:off + L]) * scale)
    return out
