"""Moment and localizing matrices as sparse linear maps on moment vectors.

A :class:`LinearMatrixMap` stores, for every cell ``(beta, beta')`` of an
``s x s`` matrix, the coefficients ``q_gamma`` of the entry
``sum_gamma q_gamma z_{beta + beta' + gamma}``. The table is a sparse
``(s*s, len(z))`` matrix so that ``coef @ z`` is the row-major flattened
matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import ceil, cos, pi, sin

import numpy as np
import scipy.sparse as sp

from .mindex import Basis, basis

Poly = dict  # {multi-index tuple: coefficient}

SPHERE = "sphere"
HALF_SPHERE = "half-sphere"
COMPLEX_SECTOR = "complex-sector"
PRODUCT_SPHERES = "product-spheres"

SECTOR_VARIANTS = ("lemma51", "eq510")


def poly_degree(q: Poly) -> int:
    return max((sum(a) for a, c in q.items() if c != 0), default=0)


def poly_eval(q: Poly, x: np.ndarray) -> np.ndarray:
    """Evaluate a dict polynomial at a point ``(N,)`` or batch ``(P, N)``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    out = np.zeros(len(x))
    for alpha, c in q.items():
        out += c * np.prod(x ** np.asarray(alpha), axis=1)
    return out


class LinearMatrixMap:
    """Symmetric matrix-valued linear map ``z -> L_q(z)``."""

    def __init__(self, q: Poly, nvars: int, k: int):
        dq = poly_degree(q)
        if dq > 2 * k:
            raise ValueError(f"localizing polynomial degree {dq} exceeds 2k = {2 * k}")
        self.q = {tuple(a): float(c) for a, c in q.items() if c != 0}
        self.nvars = nvars
        self.k = k
        self.rows: Basis = basis(nvars, k - ceil(dq / 2))
        self.tms: Basis = basis(nvars, 2 * k)
        self.coef = self._full = _build_coef(self.q, self.rows, self.tms)
        self.keep = np.arange(len(self.rows))
        self.offset = 0
        self.ncols = len(self.tms)

    @property
    def size(self) -> int:
        return len(self.keep)

    @property
    def row_indices(self) -> list:
        return [self.rows.indices[i] for i in self.keep]

    def restrict(self, keep) -> "LinearMatrixMap":
        """Principal submatrix on the row-basis positions ``keep``, as a new map."""
        keep = np.asarray(keep, dtype=np.int64)
        s = len(self.rows)
        out = object.__new__(LinearMatrixMap)
        out.__dict__.update(self.__dict__)
        out.coef = self._full[(keep[:, None] * s + keep[None, :]).ravel()]
        out.keep = keep
        return out

    def evaluate(self, z) -> np.ndarray:
        z = getattr(z, "values", z)
        s = self.size
        return np.asarray(self.coef @ np.asarray(z, dtype=float)).reshape(s, s)

    def lifted(self, offset: int, ncols: int) -> sp.csr_matrix:
        """Coefficient table embedded in a stacked variable of width ``ncols``."""
        c = self.coef.tocoo()
        return sp.csr_matrix((c.data, (c.row, c.col + offset)), shape=(c.shape[0], ncols))

    def cell(self, i: int, j: int) -> list:
        """``[(gamma, q_gamma), ...]`` pairs for cell ``(i, j)`` as moment indices."""
        row = self.coef.getrow(i * self.size + j).tocoo()
        return [(self.tms.indices[c], v) for c, v in zip(row.col, row.data)]

    def __repr__(self) -> str:
        return f"LinearMatrixMap(size={self.size}, nvars={self.nvars}, k={self.k}, q={self.q})"


def _build_coef(q: Poly, rows: Basis, tms: Basis) -> sp.csr_matrix:
    s = len(rows)
    radix = tms.maxdeg + 1
    weights = radix ** np.arange(rows.nvars, dtype=np.int64)
    tms_keys = tms.exponents.astype(np.int64) @ weights
    order = np.argsort(tms_keys)
    sorted_keys = tms_keys[order]
    pair = (rows.exponents[:, None, :] + rows.exponents[None, :, :]).reshape(s * s, -1).astype(np.int64)
    rr, cc, vv = [], [], []
    for gamma, qg in q.items():
        keys = (pair + np.asarray(gamma, dtype=np.int64)) @ weights
        loc = np.searchsorted(sorted_keys, keys)
        rr.append(np.arange(s * s))
        cc.append(order[loc])
        vv.append(np.full(s * s, qg))
    if not rr:
        return sp.csr_matrix((s * s, len(tms)))
    m = sp.csr_matrix((np.concatenate(vv), (np.concatenate(rr), np.concatenate(cc))), shape=(s * s, len(tms)))
    m.sum_duplicates()
    m.eliminate_zeros()
    return m


def moment_matrix(n: int, k: int) -> LinearMatrixMap:
    """``M_k(z)`` with cell ``(alpha, beta) = z_{alpha + beta}``."""
    return LinearMatrixMap({(0,) * n: 1.0}, n, k)


def localizing_matrix(q: Poly, n: int, k: int) -> LinearMatrixMap:
    return LinearMatrixMap(q, n, k)


# polynomials describing the support sets ---------------------------------------


def _lin(n: int, coeffs) -> Poly:
    out = {}
    for i, c in enumerate(coeffs):
        if c != 0:
            e = [0] * n
            e[i] = 1
            out[tuple(e)] = float(c)
    return out


def sphere_poly(n: int, idx=None) -> Poly:
    """``1 - sum_{i in idx} x_i^2`` (all variables by default)."""
    idx = range(n) if idx is None else idx
    q = {(0,) * n: 1.0}
    for i in idx:
        e = [0] * n
        e[i] = 2
        q[tuple(e)] = -1.0
    return q


def sector_polys(n: int, m: int, variant: str = "lemma51") -> tuple[Poly, Poly]:
    """The two phase-wedge forms on ``x = (x_re, x_im)`` in ``R^{2n}``."""
    if variant not in SECTOR_VARIANTS:
        raise ValueError(f"sector variant must be one of {SECTOR_VARIANTS}")
    s, c = sin(2 * pi / m), cos(2 * pi / m)
    ones = np.ones(n)
    g1 = _lin(2 * n, np.r_[0 * ones, ones])
    if variant == "lemma51":
        g2 = _lin(2 * n, np.r_[s * ones, -c * ones])
    else:
        g2 = _lin(2 * n, np.r_[-c * ones, s * ones])
    return g1, g2


@dataclass
class ConeSpec:
    """Outer approximation of the moment cone of a support set at order ``k``.

    ``psd`` maps must be positive semidefinite and ``zero`` maps vanish.
    ``eqs``/``ineqs`` are the defining polynomials of the support set, kept for
    feasibility checks of extracted atoms.
    """

    nvars: int
    k: int
    support: str
    psd: list
    zero: list
    eqs: list = field(default_factory=list)
    ineqs: list = field(default_factory=list)
    blocks: tuple = ()  # variable groups for product supports
    pivots: tuple = ()  # one variable per sphere equation, used by ``reduced``

    def reduced(self) -> "ConeSpec":
        """Same cone with psd blocks restricted to standard monomials.

        Each sphere equation lets ``x_p^2`` be rewritten through the other
        variables, so the moment and localizing matrices vanish on the span of
        the multiples of ``h``. Given the zero blocks, a psd block is PSD iff
        its principal submatrix on the monomials with every pivot exponent at
        most one is PSD. The reduced blocks have an interior, which the
        interior-point solver needs for accurate late iterations.
        """
        if not self.pivots:
            return self
        psd = []
        for L in self.psd:
            ex = L.rows.exponents
            keep = np.flatnonzero(np.all(ex[:, list(self.pivots)] <= 1, axis=1))
            psd.append(L.restrict(keep))
        return replace(self, psd=psd)

    @property
    def tms(self) -> Basis:
        return basis(self.nvars, 2 * self.k)

    def residuals(self, z) -> tuple[float, float]:
        """(most negative psd eigenvalue, largest zero-block entry) at ``z``."""
        mineig = min(float(np.linalg.eigvalsh(L.evaluate(z))[0]) for L in self.psd)
        zmax = max((float(np.max(np.abs(L.evaluate(z)))) for L in self.zero), default=0.0)
        return mineig, zmax


def cone_real_sphere(n: int, k: int) -> ConeSpec:
    h = sphere_poly(n)
    return ConeSpec(n, k, SPHERE, [moment_matrix(n, k)], [localizing_matrix(h, n, k)], eqs=[h], pivots=(n - 1,))


def cone_half_sphere(n: int, k: int) -> ConeSpec:
    h = sphere_poly(n)
    g = _lin(n, np.ones(n))
    return ConeSpec(n, k, HALF_SPHERE, [moment_matrix(n, k), localizing_matrix(g, n, k)],
                    [localizing_matrix(h, n, k)], eqs=[h], ineqs=[g], pivots=(n - 1,))


def cone_complex_sector(n: int, m: int, k: int, variant: str = "lemma51") -> ConeSpec:
    N = 2 * n
    h = {a: -c for a, c in sphere_poly(N).items()}  # x^T x - 1
    g1, g2 = sector_polys(n, m, variant)
    return ConeSpec(N, k, COMPLEX_SECTOR,
                    [moment_matrix(N, k), localizing_matrix(g1, N, k), localizing_matrix(g2, N, k)],
                    [localizing_matrix(h, N, k)], eqs=[h], ineqs=[g1, g2], pivots=(N - 1,))


def cone_product_spheres(dims, k: int) -> ConeSpec:
    dims = tuple(int(d) for d in dims)
    if k < 2:
        raise ValueError("the product-of-spheres cone needs k >= 2")
    N = sum(dims)
    starts = np.cumsum((0,) + dims)
    groups = tuple(tuple(range(starts[j], starts[j + 1])) for j in range(len(dims)))
    hs = [sphere_poly(N, g) for g in groups]
    return ConeSpec(N, k, PRODUCT_SPHERES, [moment_matrix(N, k)],
                    [localizing_matrix(h, N, k) for h in hs], eqs=hs, blocks=groups,
                    pivots=tuple(g[-1] for g in groups))


def zero_rows(maps, ncols: int | None = None, offset: int = 0) -> sp.csr_matrix:
    """Scalar equalities for ``L = 0`` blocks, one per distinct cell value."""
    mats = []
    for L in maps:
        s = L.size
        iu = np.triu_indices(s)
        sel = (iu[0] * s + iu[1])
        width = ncols if ncols is not None else L.coef.shape[1]
        mats.append(L.lifted(offset, width)[sel])
    if not mats:
        return sp.csr_matrix((0, ncols or 0))
    return dedup_rows(sp.vstack(mats).tocsr())


def dedup_rows(m: sp.csr_matrix, return_index: bool = False):
    """Drop zero rows and exact duplicate rows, keeping first occurrences."""
    m = m.tocsr()
    m.sum_duplicates()
    m.sort_indices()
    seen = set()
    keep = []
    for i in range(m.shape[0]):
        lo, hi = m.indptr[i], m.indptr[i + 1]
        if hi == lo:
            continue
        key = (m.indices[lo:hi].tobytes(), m.data[lo:hi].tobytes())
        if key in seen:
            continue
        seen.add(key)
        keep.append(i)
    return (m[keep], np.asarray(keep, dtype=np.int64)) if return_index else m[keep]
