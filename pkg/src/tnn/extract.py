"""Flat truncation, atom extraction and moment-cone membership.

A moment vector ``z`` of degree ``2k`` is *flat* at level ``t`` when
``rank M_{t-d0}(z) = rank M_t(z)``; it then has a unique ``r``-atomic
representing measure, ``r`` being that rank. The atoms are the joint
eigenvalues of the multiplication operators obtained from a rank-``r``
factor of ``M_t(z)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import ceil, cos, pi, sin
from typing import NamedTuple

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.optimize import least_squares, nnls

from . import conic
from .mindex import ZERO_AND_EXACT, Tms, basis, enumerate_indices, monomial_table
from .moments import (COMPLEX_SECTOR, HALF_SPHERE, PRODUCT_SPHERES, SECTOR_VARIANTS, SPHERE, ConeSpec,
                      cone_complex_sector, cone_half_sphere, cone_product_spheres, cone_real_sphere,
                      moment_matrix)

log = logging.getLogger(__name__)

RANK_TOL = 1e-6
WEIGHT_TOL = 1e-7
EXTRACT_TOL = 1e-5

YES, NO, INCONCLUSIVE = "yes", "no", "inconclusive"


class ExtractionError(RuntimeError):
    """Atoms could not be read off a moment vector to the requested accuracy."""


@dataclass(frozen=True)
class Support:
    """A support set for atomic measures.

    ``m`` is the tensor order; it selects the sector wedge for complex
    supports and whether half-sphere atoms may be flipped.
    """

    tag: str
    nvars: int
    m: int = 0
    variant: str = "lemma51"
    dims: tuple = ()

    def __post_init__(self):
        if self.tag not in (SPHERE, HALF_SPHERE, COMPLEX_SECTOR, PRODUCT_SPHERES):
            raise ValueError(f"unknown support {self.tag!r}")
        if self.tag == COMPLEX_SECTOR and (self.nvars % 2 or self.m < 1):
            raise ValueError("a complex sector needs an even number of real variables and m >= 1")
        if self.tag == PRODUCT_SPHERES and sum(self.dims) != self.nvars:
            raise ValueError(f"block sizes {self.dims} do not add up to {self.nvars}")
        if self.variant not in SECTOR_VARIANTS:
            raise ValueError(f"sector variant must be one of {SECTOR_VARIANTS}")

    @property
    def groups(self) -> list:
        if self.tag == PRODUCT_SPHERES:
            starts = np.cumsum((0,) + tuple(self.dims))
            return [np.arange(starts[j], starts[j + 1]) for j in range(len(self.dims))]
        return [np.arange(self.nvars)]

    @property
    def min_order(self) -> int:
        return 2 if self.tag == PRODUCT_SPHERES else max(1, ceil(self.m / 2))

    def cone(self, k: int) -> ConeSpec:
        if self.tag == SPHERE:
            return cone_real_sphere(self.nvars, k)
        if self.tag == HALF_SPHERE:
            return cone_half_sphere(self.nvars, k)
        if self.tag == COMPLEX_SECTOR:
            return cone_complex_sector(self.nvars // 2, self.m, k, self.variant)
        return cone_product_spheres(self.dims, k)

    def project(self, atoms: np.ndarray) -> np.ndarray:
        out = np.array(atoms, dtype=float)
        for g in self.groups:
            nrm = np.linalg.norm(out[:, g], axis=1, keepdims=True)
            if np.any(nrm == 0):
                raise ExtractionError("an extracted atom vanishes on a sphere block")
            out[:, g] /= nrm
        return out

    def canonicalize(self, atoms: np.ndarray) -> np.ndarray:
        """Move atoms into the support using the symmetries of ``w -> w^(x)m``."""
        out = np.array(atoms, dtype=float)
        if self.tag == HALF_SPHERE:
            for j, v in enumerate(out):
                if v.sum() < -1e-8:
                    if self.m % 2:
                        raise ExtractionError("half-sphere atom with negative coordinate sum for odd order")
                    out[j] = -v
        elif self.tag == COMPLEX_SECTOR:
            n = self.nvars // 2
            g1, g2 = _sector_forms(n, self.m, self.variant)
            roots = np.exp(2j * np.pi * np.arange(self.m) / self.m)
            for j, v in enumerate(out):
                w = v[:n] + 1j * v[n:]
                cands = [np.r_[(r * w).real, (r * w).imag] for r in roots]
                score = [min(g1 @ c, g2 @ c) for c in cands]
                out[j] = cands[int(np.argmax(score))]
        return out

    def violation(self, atoms: np.ndarray) -> float:
        """Largest violation of the support equations or inequalities."""
        atoms = np.atleast_2d(atoms)
        worst = 0.0
        for g in self.groups:
            worst = max(worst, float(np.max(np.abs(np.sum(atoms[:, g] ** 2, axis=1) - 1.0), initial=0.0)))
        if self.tag == HALF_SPHERE:
            worst = max(worst, float(np.max(-atoms.sum(axis=1), initial=0.0)))
        if self.tag == COMPLEX_SECTOR:
            n = self.nvars // 2
            for g in _sector_forms(n, self.m, self.variant):
                worst = max(worst, float(np.max(-(atoms @ g), initial=0.0)))
        return worst


def _sector_forms(n: int, m: int, variant: str) -> tuple[np.ndarray, np.ndarray]:
    s, c = sin(2 * pi / m), cos(2 * pi / m)
    one = np.ones(n)
    g1 = np.r_[0 * one, one]
    g2 = np.r_[s * one, -c * one] if variant == "lemma51" else np.r_[-c * one, s * one]
    return g1, g2


@dataclass
class AtomicMeasure:
    """``sum_j weights[j] * delta_{atoms[j]}`` on a support set."""

    atoms: np.ndarray
    weights: np.ndarray
    support: str
    residual: float = float("nan")

    def __post_init__(self):
        self.atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        if len(self.weights) == 0:
            self.atoms = self.atoms.reshape(0, self.atoms.shape[-1] if self.atoms.size else 0)
        if len(self.atoms) != len(self.weights):
            raise ValueError(f"{len(self.atoms)} atoms but {len(self.weights)} weights")
        if np.any(self.weights <= 0):
            raise ValueError("atomic weights must be positive")

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def moments(self, maxdeg: int, nvars: int | None = None) -> Tms:
        nvars = self.atoms.shape[1] if nvars is None else nvars
        if len(self) == 0:
            return Tms(nvars, maxdeg, np.zeros(len(basis(nvars, maxdeg))))
        return Tms.from_atoms(self.atoms, self.weights, maxdeg)


class FlatResult(NamedTuple):
    flat: bool
    rank: int
    t: int


def numeric_rank(M: np.ndarray, rank_tol: float = RANK_TOL) -> int:
    sv = la.svdvals(M)
    if len(sv) == 0 or sv[0] <= 0:
        return 0
    return int(np.sum(sv > rank_tol * sv[0]))


def _mm(z: Tms, t: int) -> np.ndarray:
    L = moment_matrix(z.nvars, t)
    return L.evaluate(z.values[: len(L.tms)])


def flat_truncation(z: Tms, k: int, shift: int = 1, rank_tol: float = RANK_TOL,
                    t_min: int | None = None) -> FlatResult:
    """Smallest ``t <= k`` with ``rank M_{t-shift}(z) = rank M_t(z)``.

    ``t_min`` raises the first level tried; certification passes
    ``ceil(m/2)`` so that the measure also covers the degree-``m`` moments.
    """
    if 2 * k > z.maxdeg:
        raise ValueError(f"moments of degree {z.maxdeg} do not reach M_{k}")
    start = max(shift, t_min if t_min is not None else shift)
    ranks = {}

    def rank(t):
        if t not in ranks:
            ranks[t] = numeric_rank(_mm(z, t), rank_tol)
        return ranks[t]

    for t in range(start, k + 1):
        if rank(t - shift) == rank(t):
            return FlatResult(True, rank(t), t)
    return FlatResult(False, rank(k) if k >= 0 else 0, k)


def _fit_positions(nvars: int, m: int | None, maxdeg: int) -> np.ndarray:
    b = basis(nvars, maxdeg)
    if m is None:
        return np.arange(len(b))
    return b.positions(enumerate_indices(nvars, m, ZERO_AND_EXACT))


def extract_atoms(z: Tms, t: int, r: int, support: Support | None = None, *, m: int | None = None,
                  seed: int = 0, weight_tol: float = WEIGHT_TOL, extract_tol: float = EXTRACT_TOL,
                  polish: bool = True) -> AtomicMeasure:
    """Read an ``r``-atomic measure off a moment vector that is flat at level ``t``.

    Weights are fitted on the moments of degree ``0`` and ``m`` when ``m`` is
    given, otherwise on every moment of degree at most ``2t``. With
    ``polish`` the atoms and weights are then refined jointly by local least
    squares on the same moments, which removes most of the error the
    eigenvalue step inherits from an inexact ``z``.

    Raises
    ------
    ExtractionError
        If the rank-``r`` factor is degenerate or the refitted measure misses
        the moments by more than ``extract_tol * ||z||``.
    """
    N = z.nvars
    if r == 0:
        return AtomicMeasure(np.zeros((0, N)), np.zeros(0), support.tag if support else SPHERE, 0.0)
    if t < 1:
        raise ExtractionError("extraction needs a flat level t >= 1")
    Mt = _mm(z, t)
    evals, evecs = la.eigh(Mt)
    lam = evals[::-1][:r]
    if lam[-1] <= 0:
        raise ExtractionError(f"moment matrix has fewer than {r} positive eigenvalues")
    V = evecs[:, ::-1][:, :r] * np.sqrt(lam)
    rows = basis(N, t)
    lower = basis(N, t - 1)
    s1 = len(lower)
    V1 = V[:s1]
    if numeric_rank(V1, RANK_TOL) < r:
        raise ExtractionError("lower block of the moment factor is rank deficient")
    V1p = la.pinv(V1)
    mult = []
    for i in range(N):
        shifted = lower.exponents.copy()
        shifted[:, i] += 1
        pos = rows.positions(map(tuple, shifted))
        Ni = V1p @ V[pos]
        mult.append(0.5 * (Ni + Ni.T))
    rng = np.random.default_rng(seed)
    coef = rng.random(N) + 0.5
    coef /= coef.sum()
    _, Q = la.eigh(sum(c * Ni for c, Ni in zip(coef, mult)))
    atoms = np.stack([np.einsum("ij,ik,kj->j", Q, Ni, Q) for Ni in mult], axis=1)
    if support is not None:
        atoms = support.project(atoms)
    pos = _fit_positions(N, m, 2 * t)
    target = z.values[pos]
    design = monomial_table(atoms, basis(N, 2 * t).exponents[pos]).T
    w, _ = nnls(design, target)
    resid = float(np.linalg.norm(design @ w - target))
    nz = max(1.0, float(np.linalg.norm(target)))
    if polish and resid > 1e-13 * nz:
        atoms, w, resid = _polish(atoms, w, basis(N, 2 * t).exponents[pos], target, support, resid)
    if resid > extract_tol * nz:
        raise ExtractionError(f"refitted measure misses the moments by {resid:.3e} (limit {extract_tol * nz:.3e})")
    keep = w > weight_tol * max(1.0, float(z.values[0]))
    atoms, w = atoms[keep], w[keep]
    if support is not None and m is not None:
        atoms = support.canonicalize(atoms)
    tag = support.tag if support is not None else SPHERE
    return AtomicMeasure(atoms, w, tag, resid)


def _polish(atoms, w, exps, target, support, resid0):
    if not np.any(w > 0):
        return atoms, w, resid0
    X0, w0 = atoms, np.maximum(w, 1e-6 * w.max())
    r, N = X0.shape
    project = support.project if support is not None else (lambda a: a)

    def unpack(p):
        return project(p[: r * N].reshape(r, N)), p[r * N:] ** 2

    def fun(p):
        X, lam = unpack(p)
        return monomial_table(X, exps).T @ lam - target

    try:
        res = least_squares(fun, np.r_[X0.ravel(), np.sqrt(w0)], method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                            max_nfev=50)
    except (ValueError, ExtractionError):
        return atoms, w, resid0
    X, lam = unpack(res.x)
    resid = float(np.linalg.norm(fun(res.x)))
    if not np.all(np.isfinite(X)) or resid >= resid0:
        return atoms, w, resid0
    return X, lam, resid


@dataclass
class Membership:
    member: str
    measure: AtomicMeasure | None = None
    order: int | None = None
    info: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.member, self.measure))


def random_objective(N: int, d: int, k: int, seed: int) -> np.ndarray:
    """Coefficients of ``[x]_d' J [x]_d`` over ``basis(N, 2k)`` with ``J`` seeded and PD."""
    rng = np.random.default_rng(seed)
    L = moment_matrix(N, d)
    s = L.size
    G = rng.standard_normal((s, s))
    J = G @ G.T / s + np.eye(s)
    c = np.asarray(L.coef.T @ J.ravel()).ravel()
    out = np.zeros(len(basis(N, 2 * k)))
    out[: len(c)] = c
    return out


def certify_membership(y, support: Support, k_max: int, *, m: int | None = None, k_min: int | None = None,
                       seed: int = 0, settings: conic.Settings | None = None, objective_degree: int = -1,
                       rank_tol: float = RANK_TOL, weight_tol: float = WEIGHT_TOL,
                       extract_tol: float = EXTRACT_TOL) -> Membership:
    """Decide whether ``y`` (degree ``0`` and ``m`` moments) has a representing measure.

    For each order ``k'`` a random strictly positive objective
    ``[x]_d' J [x]_d`` with ``d = k' + objective_degree`` is minimized over the
    support cone subject to ``z|_{0,m} = y``. Infeasibility proves ``no``;
    a flat optimizer proves ``yes``.
    """
    m = support.m if m is None else m
    N = support.nvars
    pos_y = enumerate_indices(N, m, ZERO_AND_EXACT)
    y = np.asarray(y, dtype=float).ravel()
    if len(y) != len(pos_y):
        raise ValueError(f"expected {len(pos_y)} moments of degree 0 and {m}, got {len(y)}")
    if not np.all(np.isfinite(y)):
        raise ValueError("moments must be finite")
    scale = float(np.max(np.abs(y)))
    if scale == 0:
        return Membership(YES, AtomicMeasure(np.zeros((0, N)), np.zeros(0), support.tag, 0.0), None)
    k0 = max(support.min_order, ceil(m / 2)) if k_min is None else k_min
    trace = []
    for k in range(k0, k_max + 1):
        cone = support.cone(k)
        tms = basis(N, 2 * k)
        L = len(tms)
        cols = tms.positions(pos_y)
        A = sp.csr_matrix((np.ones(len(cols)), (np.arange(len(cols)), cols)), shape=(len(cols), L))
        c = random_objective(N, max(0, k + objective_degree), k, seed + k)
        blocks = [conic.ConeBlock(conic.PSD, Lm.size, Lm.coef, f"psd{i}") for i, Lm in enumerate(cone.psd)]
        blocks += [conic.ConeBlock(conic.ZERO, Lm.size, Lm.coef, f"zero{i}") for i, Lm in enumerate(cone.zero)]
        prog = conic.ConicProgram(c, A, y / scale, blocks, {"kind": "membership", "k": k})
        sol = conic.solve(prog, settings)
        trace.append((k, sol.status))
        if sol.status == conic.INFEASIBLE:
            return Membership(NO, None, k, {"trace": trace})
        if sol.status != conic.OPTIMAL:
            return Membership(INCONCLUSIVE, None, k, {"trace": trace, "reason": sol.info.get("reason")})
        z = Tms(N, 2 * k, sol.x * scale)
        fl = flat_truncation(z, k, 1, rank_tol, t_min=max(1, ceil(m / 2)))
        if not fl.flat:
            continue
        try:
            mu = extract_atoms(z, fl.t, fl.rank, support, m=m, seed=seed, weight_tol=weight_tol,
                               extract_tol=extract_tol)
        except ExtractionError as exc:
            log.debug("extraction failed at order %d: %s", k, exc)
            trace.append((k, f"extraction failed: {exc}"))
            continue
        return Membership(YES, mu, k, {"trace": trace})
    return Membership(INCONCLUSIVE, None, k_max, {"trace": trace})

