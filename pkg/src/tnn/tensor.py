"""Symmetric tensors stored as one entry per monomial, and their decompositions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .mindex import EXACT, enumerate_indices, monomial_table, multinomial

REAL = "real"
COMPLEX = "complex"
FIELDS = (REAL, COMPLEX)


class SymmetryError(ValueError):
    """Raised when a dense array is not symmetric within tolerance."""


def _index_to_alpha(idx: Sequence[int], n: int) -> tuple:
    e = [0] * n
    for i in idx:
        e[i] += 1
    return tuple(e)


def _alpha_to_index(alpha: Sequence[int]) -> tuple:
    out = []
    for i, a in enumerate(alpha):
        out.extend([i] * a)
    return tuple(out)


@dataclass(frozen=True)
class SymTensor:
    """Symmetric tensor of order ``order`` on ``F^dim``.

    ``a_re[i] + 1j * a_im[i]`` is the tensor entry ``A[i_1, ..., i_m]`` for any
    index tuple whose exponent vector is ``monomials[i]``.
    """

    order: int
    dim: int
    field: str
    a_re: np.ndarray = field(repr=False)
    a_im: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.field not in FIELDS:
            raise ValueError(f"field must be one of {FIELDS}, got {self.field!r}")
        if self.order < 1 or self.dim < 1:
            raise ValueError("order and dim must be positive")
        size = len(enumerate_indices(self.dim, self.order, EXACT))
        re = np.array(self.a_re, dtype=float).ravel()
        im = np.zeros(size) if self.a_im is None else np.array(self.a_im, dtype=float).ravel()
        if len(re) != size or len(im) != size:
            raise ValueError(f"expected {size} entries for order {self.order}, dim {self.dim}")
        if self.field == REAL and np.any(im != 0):
            raise ValueError("a real tensor cannot carry imaginary entries")
        re.setflags(write=False)
        im.setflags(write=False)
        object.__setattr__(self, "a_re", re)
        object.__setattr__(self, "a_im", im)

    # construction -----------------------------------------------------------

    @classmethod
    def zeros(cls, order: int, dim: int, field: str = REAL) -> "SymTensor":
        size = len(enumerate_indices(dim, order, EXACT))
        return cls(order, dim, field, np.zeros(size), np.zeros(size))

    @classmethod
    def from_avector(cls, a, order: int, dim: int, field: str | None = None) -> "SymTensor":
        a = np.asarray(a)
        if field is None:
            field = COMPLEX if np.iscomplexobj(a) and np.any(a.imag != 0) else REAL
        return cls(order, dim, field, np.real(a), np.imag(a) if np.iscomplexobj(a) else None)

    @classmethod
    def from_dense(cls, entries, field: str | None = None, *, rtol: float = 1e-12,
                   symmetrize: bool = False, representative: bool = False) -> "SymTensor":
        """Build from an m-way array with all axes of equal length.

        With ``symmetrize=True`` the array is averaged over index permutations
        instead of validated; this matches reading the array as the form
        ``sum A[i] x_{i1} ... x_{im}``. With ``representative=True`` the entry
        at the sorted index ``i1 <= ... <= im`` stands for its whole orbit and
        the remaining entries are ignored.
        """
        if symmetrize and representative:
            raise ValueError("choose at most one of symmetrize and representative")
        arr = np.asarray(entries)
        m = arr.ndim
        if m == 0 or len(set(arr.shape)) != 1:
            raise ValueError(f"all axes must have the same length, got shape {arr.shape}")
        n = arr.shape[0]
        if field is None:
            field = COMPLEX if np.iscomplexobj(arr) and np.any(arr.imag != 0) else REAL
        alphas = enumerate_indices(n, m, EXACT)
        pos = {a: i for i, a in enumerate(alphas)}
        flat = arr.reshape(-1).astype(complex)
        group = np.empty(flat.size, dtype=np.int64)
        for k, idx in enumerate(itertools.product(range(n), repeat=m)):
            group[k] = pos[_index_to_alpha(idx, n)]
        if symmetrize:
            counts = np.bincount(group, minlength=len(alphas))
            vals = (np.bincount(group, flat.real, len(alphas)) + 1j * np.bincount(group, flat.imag, len(alphas))) / counts
        else:
            reps = np.ravel_multi_index(np.array([_alpha_to_index(a) for a in alphas]).T, arr.shape) if m > 0 else 0
            vals = flat[reps]
        if not symmetrize and not representative:
            scale = max(1.0, float(np.max(np.abs(flat), initial=0.0)))
            dev = np.abs(flat - vals[group])
            worst = int(np.argmax(dev))
            if dev[worst] > rtol * scale:
                bad = np.unravel_index(worst, arr.shape)
                rep = _alpha_to_index(alphas[group[worst]])
                raise SymmetryError(
                    f"entry {tuple(int(i) + 1 for i in bad)} differs from its permutation "
                    f"{tuple(i + 1 for i in rep)} by {dev[worst]:.3e}"
                )
        return cls(m, n, field, vals.real, vals.imag if field == COMPLEX else None)

    @classmethod
    def from_poly(cls, coeffs: Mapping[Sequence[int], complex], order: int, dim: int,
                  field: str | None = None) -> "SymTensor":
        """Tensor of the form ``sum_alpha c_alpha x^alpha``.

        The entry for ``alpha`` is ``c_alpha / multinomial(alpha)`` so that
        ``A(x) = sum_i A[i] x_{i1} ... x_{im}`` reproduces the form.
        """
        alphas = enumerate_indices(dim, order, EXACT)
        pos = {a: i for i, a in enumerate(alphas)}
        vals = np.zeros(len(alphas), dtype=complex)
        for alpha, c in coeffs.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != dim or sum(alpha) != order:
                raise ValueError(f"monomial {alpha} is not homogeneous of degree {order} in {dim} variables")
            vals[pos[alpha]] += complex(c) / multinomial(alpha)
        if field is None:
            field = COMPLEX if np.any(vals.imag != 0) else REAL
        return cls(order, dim, field, vals.real, vals.imag if field == COMPLEX else None)

    # views ------------------------------------------------------------------

    @property
    def monomials(self) -> list:
        return enumerate_indices(self.dim, self.order, EXACT)

    @property
    def a(self) -> np.ndarray:
        """Complex entry vector."""
        return self.a_re + 1j * self.a_im

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([multinomial(a) for a in self.monomials], dtype=float)

    def poly_coeffs(self) -> np.ndarray:
        """Coefficients of ``A(x)`` over the degree-``order`` monomials."""
        return self.multiplicities * self.a

    def to_dense(self) -> np.ndarray:
        n, m = self.dim, self.order
        pos = {a: i for i, a in enumerate(self.monomials)}
        vals = self.a if self.field == COMPLEX else self.a_re
        out = np.empty((n,) * m, dtype=vals.dtype)
        for idx in itertools.product(range(n), repeat=m):
            out[idx] = vals[pos[_index_to_alpha(idx, n)]]
        return out

    def evaluate(self, x) -> np.ndarray:
        """``A(x) = A . x^{(x)m}`` at a point or a batch of points."""
        x = np.asarray(x)
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        table = monomial_table(pts, np.array(self.monomials, dtype=np.int64))
        out = table @ self.poly_coeffs()
        if self.field == REAL and not np.iscomplexobj(pts):
            out = out.real
        return out[0] if single else out

    @property
    def is_zero(self) -> bool:
        return not (np.any(self.a_re) or np.any(self.a_im))

    # arithmetic -------------------------------------------------------------

    def _check_shape(self, other: "SymTensor"):
        if (self.order, self.dim) != (other.order, other.dim):
            raise ValueError(f"shape mismatch: ({self.order}, {self.dim}) vs ({other.order}, {other.dim})")

    def __add__(self, other: "SymTensor") -> "SymTensor":
        self._check_shape(other)
        fld = COMPLEX if COMPLEX in (self.field, other.field) else REAL
        return SymTensor(self.order, self.dim, fld, self.a_re + other.a_re, self.a_im + other.a_im)

    def __sub__(self, other: "SymTensor") -> "SymTensor":
        return self + other * -1.0

    def __mul__(self, t) -> "SymTensor":
        if isinstance(t, complex) and t.imag != 0:
            a = self.a * t
            return SymTensor(self.order, self.dim, COMPLEX, a.real, a.imag)
        t = float(np.real(t))
        return SymTensor(self.order, self.dim, self.field, self.a_re * t, self.a_im * t)

    __rmul__ = __mul__

    def __neg__(self) -> "SymTensor":
        return self * -1.0

    def as_complex(self) -> "SymTensor":
        return SymTensor(self.order, self.dim, COMPLEX, self.a_re, self.a_im)


def hs_inner(A: SymTensor, B: SymTensor) -> complex:
    """Hermitian inner product ``A . conj(B)`` summed over all m-way entries."""
    A._check_shape(B)
    return complex(np.sum(A.multiplicities * A.a * np.conj(B.a)))


def hs_norm(A: SymTensor) -> float:
    return float(np.sqrt(max(hs_inner(A, A).real, 0.0)))


def symmetrize3(a, b, c) -> SymTensor:
    """``sym(a (x) b (x) c)``: the average over the six factor orders."""
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    if not (a.shape == b.shape == c.shape) or a.ndim != 1:
        raise ValueError("symmetrize3 needs three vectors of equal length")
    t = np.einsum("i,j,k->ijk", a, b, c)
    dense = sum(np.transpose(t, p) for p in itertools.permutations(range(3))) / 6.0
    return SymTensor.from_dense(dense, field=REAL)


@dataclass(frozen=True)
class Term:
    """One rank-one term ``sign * lam * (atom_re + 1j*atom_im)^{(x)m}``."""

    lam: float
    atom_re: np.ndarray
    atom_im: np.ndarray
    sign: int = 1

    @property
    def atom(self) -> np.ndarray:
        return np.asarray(self.atom_re) + 1j * np.asarray(self.atom_im)


@dataclass
class NuclearDecomposition:
    terms: list
    field: str
    order: int
    dim: int
    residual: float = float("nan")

    def __post_init__(self):
        for t in self.terms:
            if not t.lam > 0:
                raise ValueError(f"weights must be positive, got {t.lam}")
            nrm = float(np.sum(np.square(t.atom_re)) + np.sum(np.square(t.atom_im)))
            if abs(nrm - 1.0) > 1e-9:
                raise ValueError(f"atoms must have unit norm, got squared norm {nrm}")

    @property
    def mass(self) -> float:
        return float(sum(t.lam for t in self.terms))

    def __len__(self) -> int:
        return len(self.terms)

    @classmethod
    def from_unnormalized(cls, columns, order: int, signs=None, field: str | None = None) -> "NuclearDecomposition":
        """Decomposition ``sum_i sign_i (u_i)^{(x)m}`` from raw columns ``u_i``.

        Each column is split into weight ``||u_i||^m`` and unit atom. Zero
        columns are dropped.
        """
        cols = np.asarray(columns)
        if cols.ndim == 1:
            cols = cols[:, None]
        if field is None:
            field = COMPLEX if np.iscomplexobj(cols) and np.any(cols.imag != 0) else REAL
        cols = cols.astype(complex)
        signs = np.ones(cols.shape[1], dtype=int) if signs is None else np.asarray(signs, dtype=int)
        terms = []
        for j in range(cols.shape[1]):
            u = cols[:, j]
            r = float(np.linalg.norm(u))
            if r == 0:
                continue
            w = u / r
            terms.append(Term(r ** order, w.real.copy(), w.imag.copy(), int(signs[j])))
        return cls(terms, field, order, cols.shape[0])

    def columns(self) -> np.ndarray:
        """Unnormalized columns ``lam^(1/m) * atom`` (signs not applied)."""
        if not self.terms:
            return np.zeros((self.dim, 0), dtype=complex if self.field == COMPLEX else float)
        cols = np.stack([t.lam ** (1.0 / self.order) * t.atom for t in self.terms], axis=1)
        return cols if self.field == COMPLEX else cols.real


def reconstruct(d: NuclearDecomposition) -> SymTensor:
    """``sum_i sign_i lam_i w_i^{(x)m}`` as a :class:`SymTensor`."""
    alphas = np.array(enumerate_indices(d.dim, d.order, EXACT), dtype=np.int64)
    if not d.terms:
        return SymTensor.zeros(d.order, d.dim, d.field)
    atoms = np.stack([t.atom for t in d.terms])
    coef = np.array([t.sign * t.lam for t in d.terms], dtype=float)
    a = coef @ monomial_table(atoms, alphas)
    if d.field == REAL:
        return SymTensor(d.order, d.dim, REAL, a.real, None)
    return SymTensor(d.order, d.dim, COMPLEX, a.real, a.imag)
