"""Nuclear-norm drivers: relaxation loop, certification and decomposition assembly.

Each driver walks the relaxation order ``k`` upward. At every order the
relaxation value is a lower bound on the nuclear norm; an atomic measure
that reproduces the pinned moments turns it into an exact value together
with a decomposition. Certification tries, in order,

1. flat truncation of the relaxation optimizer itself,
2. moment-cone membership of its degree-``{0, m}`` part, and
3. re-solving with a small random strictly positive term added to the
   objective, which selects a low-rank optimizer among many optimal ones.

Any measure accepted in step 3 must reproduce the tensor and carry a mass
within ``value_tol`` of the unperturbed optimum, so it certifies the value
exactly as in steps 1 and 2.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from math import ceil

import numpy as np
import scipy.sparse as sp
from scipy.optimize import least_squares

from . import conic
from .extract import (EXTRACT_TOL, RANK_TOL, WEIGHT_TOL, YES, AtomicMeasure, ExtractionError, Support,
                      certify_membership, extract_atoms, flat_truncation, random_objective)
from .mindex import EXACT, Tms, enumerate_indices, monomial_table, multinomial, truncate
from .moments import COMPLEX_SECTOR, HALF_SPHERE, PRODUCT_SPHERES, SPHERE, cone_real_sphere
from .relax import (COMPLEX_KIND, EVEN_REAL, NONSYM3, ODD_REAL, build_complex, build_even_real, build_nonsym3,
                    build_odd_real, moment_vectors, realify)
from .tensor import COMPLEX, REAL, NuclearDecomposition, SymTensor, Term, hs_norm, reconstruct

log = logging.getLogger(__name__)

CERTIFIED = "certified"
LOWER_BOUND = "lower-bound"


class SolverFailure(RuntimeError):
    """The first relaxation could not be solved, so no bound is available."""


@dataclass
class Options:
    """Knobs shared by the drivers.

    ``k_max`` defaults to ``ceil(m/2) + 3``. ``value_tol`` bounds the relative
    gap between the relaxation value and the mass of an accepted measure.
    ``selection_weights`` are the perturbation sizes tried in step 3.
    Orders whose solver workspace would exceed ``max_bytes`` are skipped and
    end the loop.
    """

    k_min: int | None = None
    k_max: int | None = None
    seed: int = 0
    settings: conic.Settings | None = None
    variant: str = "lemma51"
    rank_tol: float = RANK_TOL
    weight_tol: float = WEIGHT_TOL
    extract_tol: float = EXTRACT_TOL
    value_tol: float = 1e-5
    membership: bool = True
    selection_weights: tuple = (1e-3, 1e-2)
    selection_degrees: tuple = (0, -1)
    force_even: bool = False
    reduce: bool = False
    max_bytes: float = 2e9


@dataclass
class NonsymTerm:
    lam: float
    factors: tuple  # one unit vector per mode


@dataclass
class NonsymDecomposition:
    """``sum_i lam_i v_i1 (x) v_i2 (x) v_i3`` for a real order-3 array."""

    terms: list
    dims: tuple

    @property
    def mass(self) -> float:
        return float(sum(t.lam for t in self.terms))

    def __len__(self) -> int:
        return len(self.terms)

    def to_array(self) -> np.ndarray:
        out = np.zeros(self.dims)
        for t in self.terms:
            out += t.lam * np.einsum("i,j,k->ijk", *t.factors)
        return out


@dataclass
class NormReport:
    value: float
    status: str
    order: int
    field: str
    kind: str
    decomposition: NuclearDecomposition | NonsymDecomposition | None = None
    dual: np.ndarray | None = None
    trace: list = field(default_factory=list)  # (k, value) per solved order
    timings: dict = field(default_factory=dict)
    method: str | None = None
    residual: float = float("nan")
    solver: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.status == CERTIFIED


# ---------------------------------------------------------------- verification

def verify(A: SymTensor, d: NuclearDecomposition) -> tuple[float, float]:
    """``(residual, mass)`` with the residual relative to ``max(1, ||A||)``."""
    if (A.order, A.dim) != (d.order, d.dim):
        raise ValueError(f"tensor is order {A.order} on dim {A.dim}, decomposition order {d.order} on dim {d.dim}")
    B = reconstruct(d)
    if A.field != B.field:
        A, B = A.as_complex(), B.as_complex()
    return hs_norm(A - B) / max(1.0, hs_norm(A)), d.mass


def verify_nonsym(A, d: NonsymDecomposition) -> tuple[float, float]:
    A = np.asarray(A, dtype=float)
    if A.shape != tuple(d.dims):
        raise ValueError(f"array shape {A.shape} does not match decomposition dims {d.dims}")
    return float(np.linalg.norm(A - d.to_array())) / max(1.0, float(np.linalg.norm(A))), d.mass


def _lsq(fun, p0):
    r0 = float(np.linalg.norm(fun(p0)))
    if r0 == 0:
        return p0
    try:
        res = least_squares(fun, p0, method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=100 * len(p0))
    except ValueError:
        return p0
    return res.x if np.all(np.isfinite(res.x)) and float(np.linalg.norm(fun(res.x))) < r0 else p0


def polish_symmetric(A: SymTensor, d: NuclearDecomposition, support: Support | None = None) -> NuclearDecomposition:
    """Refine unit atoms and weights of ``d`` by least squares on the tensor entries.

    Signs are kept. The residual is weighted by multinomial coefficients so
    that it is the Hilbert-Schmidt distance.
    """
    if not d.terms:
        return d
    n, cplx = d.dim, d.field == COMPLEX
    alphas = np.array(A.monomials, dtype=np.int64)
    wts = np.sqrt([float(multinomial(a)) for a in A.monomials])
    signs = np.array([t.sign for t in d.terms], dtype=float)
    target = np.r_[A.a_re, A.a_im] if cplx else A.a_re
    if cplx:
        wts = np.r_[wts, wts]
    D = 2 * n if cplx else n
    r = len(d.terms)

    def unpack(p):
        W = p[: r * D].reshape(r, D)
        W = W / np.linalg.norm(W, axis=1, keepdims=True)
        return W, p[r * D:] ** 2

    def fun(p):
        W, lam = unpack(p)
        atoms = W[:, :n] + 1j * W[:, n:] if cplx else W
        b = (signs * lam) @ monomial_table(atoms, alphas)
        return wts * ((np.r_[b.real, b.imag] if cplx else b.real) - target)

    W0 = np.stack([np.r_[t.atom_re, t.atom_im] if cplx else np.asarray(t.atom_re) for t in d.terms])
    W, lam = unpack(_lsq(fun, np.r_[W0.ravel(), np.sqrt([t.lam for t in d.terms])]))
    if support is not None and support.tag in (COMPLEX_SECTOR, HALF_SPHERE):
        W = support.canonicalize(W)
    terms = [Term(float(l), w[:n].copy(), w[n:].copy() if cplx else np.zeros(n), int(s))
             for w, l, s in zip(W, lam, signs) if l > 0]
    return NuclearDecomposition(terms, d.field, d.order, n)


def polish_nonsym(A, d: NonsymDecomposition, mass: float | None = None) -> NonsymDecomposition:
    """Least-squares refinement of ``d`` against ``A``.

    With ``mass`` set, the total weight is pinned to that value by an extra
    residual, which keeps the fit on the nuclear-norm face.
    """
    if not d.terms:
        return d
    A = np.asarray(A, dtype=float)
    dims, r = tuple(d.dims), len(d.terms)
    starts = np.cumsum((0,) + dims)
    D = starts[-1]

    def unpack(p):
        V = p[: r * D].reshape(r, D)
        parts = [V[:, starts[j]:starts[j + 1]] / np.linalg.norm(V[:, starts[j]:starts[j + 1]], axis=1, keepdims=True)
                 for j in range(3)]
        return parts, p[r * D:] ** 2

    def fun(p):
        (X, Y, Z), lam = unpack(p)
        out = (np.einsum("s,si,sj,sk->ijk", lam, X, Y, Z) - A).ravel()
        return out if mass is None else np.r_[out, lam.sum() - mass]

    V0 = np.stack([np.concatenate(t.factors) for t in d.terms])
    (X, Y, Z), lam = unpack(_lsq(fun, np.r_[V0.ravel(), np.sqrt([t.lam for t in d.terms])]))
    terms = [NonsymTerm(float(lam[i]), (X[i].copy(), Y[i].copy(), Z[i].copy())) for i in range(r) if lam[i] > 0]
    return NonsymDecomposition(terms, dims)


def shorten_nonsym(A, d: NonsymDecomposition, tol: float = 1e-10) -> NonsymDecomposition:
    """Drop terms from a nuclear decomposition while it stays one.

    Nuclear decompositions of nonsymmetric arrays are rarely unique, and the
    extracted one can be longer than needed. Each candidate omits one term,
    rescales the rest to the same mass and is refitted; it is kept only if
    it reconstructs ``A`` to ``tol`` without increasing the mass.
    """
    A = np.asarray(A, dtype=float)
    target = d.mass
    while len(d.terms) > 1:
        for drop in np.argsort([t.lam for t in d.terms]):
            rest = [t for i, t in enumerate(d.terms) if i != drop]
            f = target / sum(t.lam for t in rest)
            trial = NonsymDecomposition([NonsymTerm(t.lam * f, t.factors) for t in rest], d.dims)
            trial = polish_nonsym(A, trial, mass=target)
            resid, got = verify_nonsym(A, trial)
            if resid <= tol and got <= target * (1 + tol):
                d = trial
                break
        else:
            break
    return d


# ------------------------------------------------------------ shared machinery

def workspace_bytes(prog: conic.ConicProgram) -> float:
    """Rough peak memory of the built-in solver on ``prog``.

    The Schur assembly holds about four dense copies of each block's
    per-variable table at once.
    """
    total = 0.0
    for blk in prog.psd_blocks:
        total += 4 * np.unique(blk.coef.indices).size * blk.size ** 2 * 8.0
    nx = prog.nvars
    return total + 3 * nx * nx * 8.0


def _stats(sol: conic.ConicSolution) -> dict:
    return {"status": sol.status, "iterations": sol.iterations, "residual": sol.residual,
            "dual_residual": sol.dual_residual, "gap": sol.gap}


def _measures_from(zs, supports, k, m, opts, *, use_membership):
    """Try to represent every moment vector in ``zs``; ``None`` on failure."""
    total = sum(max(z[0], 0.0) for z in zs)
    out = []
    for z, sup in zip(zs, supports):
        if z[0] <= opts.weight_tol * max(total, 1e-300):
            out.append(AtomicMeasure(np.zeros((0, sup.nvars)), np.zeros(0), sup.tag, 0.0))
            continue
        t = Tms(sup.nvars, 2 * k, z)
        fl = flat_truncation(t, k, 1, opts.rank_tol, t_min=max(1, sup.min_order))
        mu = None
        if fl.flat:
            try:
                mu = extract_atoms(t, fl.t, fl.rank, sup, m=m, seed=opts.seed, weight_tol=opts.weight_tol,
                                   extract_tol=opts.extract_tol)
            except ExtractionError as exc:
                log.debug("extraction at order %d failed: %s", k, exc)
        if mu is None and use_membership:
            res = certify_membership(truncate(t, m), sup, k, m=m, seed=opts.seed, settings=opts.settings,
                                     rank_tol=opts.rank_tol, weight_tol=opts.weight_tol,
                                     extract_tol=opts.extract_tol)
            if res.member == YES:
                mu = res.measure
        if mu is None:
            return None
        out.append(mu)
    return out


def _certify(builder, prog, sol, supports, value, k, m, opts, finish):
    """First decomposition accepted by ``finish``, as ``(decomposition, residual, method)``."""

    def attempt(mus):
        if not _accept(mus, value, opts):
            return None
        out = finish(mus)
        if out is not None and abs(out[0].mass - value) > opts.value_tol * max(abs(value), 1e-12):
            return None
        return out

    zs = moment_vectors(prog, sol.x)
    got = attempt(_measures_from(zs, supports, k, m, opts, use_membership=False))
    if got:
        return (*got, "flat")
    if opts.membership:
        got = attempt(_measures_from(zs, supports, k, m, opts, use_membership=True))
        if got:
            return (*got, "membership")
    N = supports[0].nvars
    for eps in opts.selection_weights:
        for od in opts.selection_degrees:
            R = random_objective(N, max(0, k + od), k, opts.seed + k)
            p2 = builder(k)
            p2.c = p2.c + eps * np.tile(R, len(supports))
            s2 = conic.solve(p2, opts.settings)
            if s2.status != conic.OPTIMAL:
                continue
            got = attempt(_measures_from(moment_vectors(p2, s2.x), supports, k, m, opts, use_membership=False))
            if got:
                return (*got, "selection")
    return None


def _accept(mus, value, opts) -> bool:
    if mus is None:
        return False
    mass = sum(mu.mass for mu in mus)
    return abs(mass - value) <= opts.value_tol * max(abs(value), 1e-12) or (value == 0 and mass == 0)


def _loop(kind, builder, supports, m, k_min, k_max, opts, assemble, check, polish, field_):
    """Walk the orders.

    ``assemble`` turns measures into a decomposition, ``polish`` refines it
    against the tensor and ``check`` returns its ``(residual, mass)``.
    """
    trace, timings = [], {}
    best = None
    for k in range(k_min, k_max + 1):
        t0 = time.perf_counter()
        prog = builder(k)
        need = workspace_bytes(prog)
        if need > opts.max_bytes and k > k_min:
            log.info("order %d needs about %.1f GB of solver workspace; stopping", k, need / 1e9)
            break
        sol = conic.solve(prog, opts.settings)
        timings[f"solve-k{k}"] = time.perf_counter() - t0
        if sol.status != conic.OPTIMAL:
            if k == k_min:
                raise SolverFailure(f"relaxation at order {k} ended with status {sol.status!r}: {sol.info}")
            log.info("order %d relaxation ended with %s; keeping the previous bound", k, sol.status)
            break
        scale = prog.meta["scale"]
        value = float(sol.x[[off for off, _ in prog.meta["cones"]]].sum() * scale)
        trace.append((k, value))
        dual, _ = conic.dual_certificate(sol, prog)
        best = NormReport(max(v for _, v in trace), LOWER_BOUND, k, field_, kind, None, dual, trace, timings,
                          solver=_stats(sol))
        t1 = time.perf_counter()

        def finish(mus):
            dec = polish(assemble(mus))
            resid, _ = check(dec)
            if resid * max(1.0, scale) > 1e-5 * scale:
                log.debug("order %d decomposition residual %.2e too large", k, resid)
                return None
            return dec, resid

        got = _certify(builder, prog, sol, supports, value, k, m, opts, finish)
        timings[f"certify-k{k}"] = time.perf_counter() - t1
        if got is None:
            continue
        best.value, best.status = value, CERTIFIED
        best.decomposition, best.residual, best.method = got
        return best
    if best is None:
        raise SolverFailure("no relaxation order was solved")
    return best


def _orders(m: int, opts: Options, floor: int) -> tuple[int, int]:
    k_min = max(floor, ceil(m / 2)) if opts.k_min is None else opts.k_min
    k_max = ceil(m / 2) + 3 if opts.k_max is None else opts.k_max
    if k_max < k_min:
        raise ValueError(f"k_max={k_max} is below the starting order {k_min}")
    return k_min, k_max


def _zero_report(kind, field_, k) -> NormReport:
    return NormReport(0.0, CERTIFIED, k, field_, kind, None, None, [(k, 0.0)], {}, "trivial", 0.0)


# --------------------------------------------------------------------- drivers

def nuclear_norm_real(A: SymTensor, opts: Options | None = None) -> NormReport:
    """Real nuclear norm of a real symmetric tensor.

    Odd orders use one measure on the sphere, even orders (or
    ``opts.force_even``) a signed pair of measures on the half sphere.
    """
    opts = opts or Options()
    if A.field == COMPLEX and np.any(A.a_im != 0):
        raise ValueError("the real nuclear norm needs a real tensor")
    m, n = A.order, A.dim
    k_min, k_max = _orders(m, opts, 1)
    even = m % 2 == 0 or opts.force_even
    kind = EVEN_REAL if even else ODD_REAL
    if A.is_zero:
        return _zero_report(kind, REAL, k_min)
    if even:
        sup = Support(HALF_SPHERE, n, m)
        supports = [sup, sup]
        builder = lambda k: build_even_real(A, k, reduce=opts.reduce)  # noqa: E731
    else:
        supports = [Support(SPHERE, n, m)]
        builder = lambda k: build_odd_real(A, k, reduce=opts.reduce)  # noqa: E731

    def assemble(mus):
        terms = []
        for mu, sign in zip(mus, (1, -1)):
            for v, w in zip(mu.atoms, mu.weights):
                v = v / np.linalg.norm(v)
                terms.append(Term(float(w), v, np.zeros(n), sign))
        return NuclearDecomposition(terms, REAL, m, n)

    return _loop(kind, builder, supports, m, k_min, k_max, opts, assemble, lambda d: verify(A, d),
                 lambda d: polish_symmetric(A, d, supports[0]), REAL)


def nuclear_norm_complex(A: SymTensor, opts: Options | None = None) -> NormReport:
    """Complex nuclear norm; real tensors are accepted."""
    opts = opts or Options()
    m, n = A.order, A.dim
    k_min, k_max = _orders(m, opts, 1)
    if A.is_zero:
        return _zero_report(COMPLEX_KIND, COMPLEX, k_min)
    supports = [Support(COMPLEX_SECTOR, 2 * n, m, opts.variant)]
    builder = lambda k: build_complex(A, k, variant=opts.variant, reduce=opts.reduce)  # noqa: E731

    def assemble(mus):
        terms = []
        for v, w in zip(mus[0].atoms, mus[0].weights):
            v = v / np.linalg.norm(v)
            terms.append(Term(float(w), v[:n], v[n:]))
        return NuclearDecomposition(terms, COMPLEX, m, n)

    return _loop(COMPLEX_KIND, builder, supports, m, k_min, k_max, opts, assemble, lambda d: verify(A, d),
                 lambda d: polish_symmetric(A, d, supports[0]), COMPLEX)


def nuclear_norm_nonsym3(A, dims=None, opts: Options | None = None) -> NormReport:
    """Real nuclear norm of an order-3 array over a product of spheres."""
    opts = opts or Options()
    A = np.asarray(A, dtype=float)
    if A.ndim != 3:
        raise ValueError(f"expected an order-3 array, got {A.ndim} dimensions")
    dims = tuple(A.shape) if dims is None else tuple(dims)
    k_min, k_max = _orders(3, opts, 2)
    if not np.any(A):
        rep = _zero_report(NONSYM3, REAL, k_min)
        rep.decomposition = NonsymDecomposition([], dims)
        return rep
    supports = [Support(PRODUCT_SPHERES, sum(dims), 3, dims=dims)]
    builder = lambda k: build_nonsym3(A, dims, k, reduce=opts.reduce)  # noqa: E731
    starts = np.cumsum((0,) + dims)

    def assemble(mus):
        terms = []
        for v, w in zip(mus[0].atoms, mus[0].weights):
            parts = tuple(v[starts[j]:starts[j + 1]] / np.linalg.norm(v[starts[j]:starts[j + 1]]) for j in range(3))
            terms.append(NonsymTerm(float(w), parts))
        return NonsymDecomposition(terms, dims)

    return _loop(NONSYM3, builder, supports, 3, k_min, k_max, opts, assemble, lambda d: verify_nonsym(A, d),
                 lambda d: shorten_nonsym(A, polish_nonsym(A, d)), REAL)


def nuclear_norm(A: SymTensor, field: str = REAL, opts: Options | None = None) -> NormReport:
    if field == REAL:
        return nuclear_norm_real(A, opts)
    if field == COMPLEX:
        return nuclear_norm_complex(A, opts)
    raise ValueError(f"field must be 'real' or 'complex', got {field!r}")


# ---------------------------------------------------------------- dual checks

def dual_form_values(report: NormReport, A: SymTensor | None = None, *, samples: int = 100_000,
                     seed: int = 0, dims=None) -> np.ndarray:
    """``|p(x)|`` at seeded random unit points for the report's dual form.

    Real reports evaluate ``p(x) = sum_a p_a x^a`` on the sphere, complex ones
    ``|q(w)|`` with ``q = p1 - i p2`` on the complex sphere, and nonsymmetric
    ones the trilinear form on a product of spheres.
    """
    if report.dual is None:
        raise ValueError("report carries no dual form")
    rng = np.random.default_rng(seed)
    p = np.asarray(report.dual)
    if report.kind == NONSYM3:
        dims = tuple(dims)
        P = p.reshape(dims)
        out = np.empty(samples)
        for lo in range(0, samples, 10_000):
            hi = min(samples, lo + 10_000)
            vs = []
            for d in dims:
                x = rng.standard_normal((hi - lo, d))
                vs.append(x / np.linalg.norm(x, axis=1, keepdims=True))
            out[lo:hi] = np.abs(np.einsum("ijk,si,sj,sk->s", P, *vs))
        return out
    n, m = A.dim, A.order
    alphas = np.array(enumerate_indices(n, m, EXACT), dtype=np.int64)
    if report.kind == COMPLEX_KIND:
        nm = len(alphas)
        q = p[:nm] - 1j * p[nm:]
        x = rng.standard_normal((samples, n)) + 1j * rng.standard_normal((samples, n))
    else:
        q = p
        x = rng.standard_normal((samples, n))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    out = np.empty(samples)
    for lo in range(0, samples, 10_000):
        out[lo:lo + 10_000] = np.abs(monomial_table(x[lo:lo + 10_000], alphas) @ q)
    return out


# ------------------------------------------------------------- spectral bound

@dataclass
class SpectralBound:
    upper: float
    lower: float
    maximizer: np.ndarray | None
    certified: bool


def _form_coefficients(A: SymTensor, field: str):
    """Moment-space coefficients ``c`` with ``<c, [x]> = Re A(x)`` (realified for complex)."""
    mons = A.monomials
    mult = np.array([multinomial(a) for a in mons], dtype=float)
    if field == REAL:
        return [(a, mult[i] * A.a_re[i]) for i, a in enumerate(mons)], A.dim
    n = A.dim
    out = {}
    idx = enumerate_indices(2 * n, A.order, EXACT)
    for i, a in enumerate(mons):
        R, T = realify(a)
        vec = mult[i] * (A.a_re[i] * R - A.a_im[i] * T)
        for j in np.flatnonzero(vec):
            out[idx[j]] = out.get(idx[j], 0.0) + vec[j]
    return list(out.items()), 2 * n


def _evaluate_abs(A: SymTensor, x: np.ndarray, field: str) -> np.ndarray:
    n = A.dim
    w = x[:, :n] + 1j * x[:, n:] if field == COMPLEX else x
    return np.abs(A.evaluate(w))


def spectral_norm_bound(A: SymTensor, k: int | None = None, field: str = REAL, *, samples: int = 2000,
                        seed: int = 0, settings: conic.Settings | None = None) -> SpectralBound:
    """Upper bound from the moment relaxation of ``max A(x)`` and a sampled lower bound."""
    m = A.order
    k = ceil(m / 2) if k is None else k
    terms, N = _form_coefficients(A, field)
    cone = cone_real_sphere(N, k)
    tms = cone.tms
    c = np.zeros(len(tms))
    for a, v in terms:
        c[tms.position(a)] += v
    Aeq = sp.csr_matrix(([1.0], ([0], [0])), shape=(1, len(tms)))
    blocks = [conic.ConeBlock(conic.PSD, L.size, L.coef) for L in cone.psd]
    blocks += [conic.ConeBlock(conic.ZERO, L.size, L.coef) for L in cone.zero]
    # odd orders and complex forms are sign symmetric; even real ones need -A too
    signs = (1.0, -1.0) if (field == REAL and m % 2 == 0) else (1.0,)
    upper, cands, certified = -np.inf, [], False
    for s in signs:
        sol = conic.solve(conic.ConicProgram(-s * c, Aeq, [1.0], blocks), settings)
        upper = max(upper, -sol.objective if sol.optimal else np.inf)
        z = Tms(N, 2 * k, sol.x)
        fl = flat_truncation(z, k)
        if sol.optimal and fl.flat:
            try:
                mu = extract_atoms(z, fl.t, fl.rank, Support(SPHERE, N, 0), seed=seed)
                cands.append(mu.atoms)
                certified = certified or abs(float(np.max(_evaluate_abs(A, mu.atoms, field))) + sol.objective) <= 1e-6 * max(1.0, abs(sol.objective))
            except ExtractionError:
                pass
        x1 = z.values[1:N + 1]
        if np.linalg.norm(x1) > 0:
            cands.append((x1 / np.linalg.norm(x1))[None, :])
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((samples, N))
    cands.append(x / np.linalg.norm(x, axis=1, keepdims=True))
    pts = np.vstack(cands)
    vals = _evaluate_abs(A, pts, field)
    j = int(np.argmax(vals))
    best = pts[j]
    maximizer = best[:A.dim] + 1j * best[A.dim:] if field == COMPLEX else best
    lower = float(vals[j])
    return SpectralBound(max(upper, lower), lower, maximizer, certified and upper - lower <= 1e-6 * max(1.0, upper))
