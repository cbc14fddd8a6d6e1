"""Multi-indices, graded monomial bases and truncated moment sequences.

A multi-index is a plain tuple of nonnegative ints. Monomials are ordered by
degree first and, within a degree, with ``x1 > x2 > ... > xn`` so that for two
variables and degree 3 the order is ``1, x1, x2, x1^2, x1 x2, x2^2, x1^3, ...,
x2^3``. This order fixes matrix row order and the on-disk layout of every
coefficient vector, so it must never change.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb, factorial
from typing import Iterable, Sequence

import numpy as np

MultiIndex = tuple  # tuple[int, ...]

FULL = "full"
EXACT = "exact"
ZERO_AND_EXACT = "zero-and-exact"
_SHAPES = (FULL, EXACT, ZERO_AND_EXACT)


def degree(alpha: Sequence[int]) -> int:
    return int(sum(alpha))


def _exact(n: int, d: int) -> list[MultiIndex]:
    out = []
    for combo in combinations_with_replacement(range(n), d):
        e = [0] * n
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return out


@lru_cache(maxsize=None)
def _enumerate_cached(n: int, d: int, shape: str) -> tuple[MultiIndex, ...]:
    if shape == FULL:
        out: list[MultiIndex] = []
        for t in range(d + 1):
            out.extend(_exact(n, t))
    elif shape == EXACT:
        out = _exact(n, d)
    else:
        out = [(0,) * n]
        if d > 0:
            out.extend(_exact(n, d))
    return tuple(out)


def enumerate_indices(n: int, d: int, shape: str = FULL) -> list[MultiIndex]:
    """List the multi-indices of ``n`` variables in graded order.

    ``shape`` selects all indices of degree ``<= d`` (``"full"``), exactly
    ``d`` (``"exact"``), or degree ``0`` together with exactly ``d``
    (``"zero-and-exact"``).
    """
    if n < 1 or d < 0:
        raise ValueError(f"need n >= 1 and d >= 0, got n={n}, d={d}")
    if shape not in _SHAPES:
        raise ValueError(f"unknown shape {shape!r}; expected one of {_SHAPES}")
    return list(_enumerate_cached(n, d, shape))


def multinomial(alpha: Sequence[int]) -> int:
    """Multinomial coefficient ``|alpha|! / (alpha_1! ... alpha_n!)``."""
    out = factorial(degree(alpha))
    for a in alpha:
        out //= factorial(a)
    return out


def add(alpha: Sequence[int], beta: Sequence[int]) -> MultiIndex:
    return tuple(a + b for a, b in zip(alpha, beta))


def unit(n: int, i: int, power: int = 1) -> MultiIndex:
    e = [0] * n
    e[i] = power
    return tuple(e)


class Basis:
    """Graded monomial basis of ``n`` variables up to degree ``maxdeg``.

    ``indices[i]`` is the i-th multi-index and ``position(alpha)`` inverts it.
    ``exponents`` holds the same data as an int32 array of shape ``(size, n)``.
    """

    __slots__ = ("nvars", "maxdeg", "indices", "exponents", "_pos")

    def __init__(self, nvars: int, maxdeg: int):
        self.nvars = int(nvars)
        self.maxdeg = int(maxdeg)
        self.indices = _enumerate_cached(self.nvars, self.maxdeg, FULL)
        self.exponents = np.array(self.indices, dtype=np.int32).reshape(-1, self.nvars)
        self.exponents.setflags(write=False)
        self._pos = {a: i for i, a in enumerate(self.indices)}

    def __len__(self) -> int:
        return len(self.indices)

    def __repr__(self) -> str:
        return f"Basis(nvars={self.nvars}, maxdeg={self.maxdeg}, size={len(self)})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Basis) and (self.nvars, self.maxdeg) == (other.nvars, other.maxdeg)

    def __hash__(self) -> int:
        return hash((self.nvars, self.maxdeg))

    def position(self, alpha: Sequence[int]) -> int:
        try:
            return self._pos[tuple(alpha)]
        except KeyError:
            raise KeyError(f"multi-index {tuple(alpha)} not in {self!r}") from None

    def __contains__(self, alpha) -> bool:
        return tuple(alpha) in self._pos

    def positions(self, alphas: Iterable[Sequence[int]]) -> np.ndarray:
        return np.array([self.position(a) for a in alphas], dtype=np.int64)

    def degree_slice(self, d: int) -> slice:
        """Positions of the monomials of exact degree ``d``."""
        start = comb(self.nvars + d - 1, self.nvars) if d > 0 else 0
        return slice(start, comb(self.nvars + d, d))

    def monomials(self, x: np.ndarray) -> np.ndarray:
        """Evaluate ``[x]_d`` at one point ``(n,)`` or a batch ``(N, n)``."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = x[None, :] if single else x
        out = monomial_table(pts, self.exponents)
        return out[0] if single else out


@lru_cache(maxsize=64)
def basis(nvars: int, maxdeg: int) -> Basis:
    """Cached :class:`Basis` constructor."""
    return Basis(nvars, maxdeg)


def monomial_table(points: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    """Rows ``x^alpha`` for every point (rows of ``points``) and every alpha.

    Works for real or complex points. Powers are tabulated once per variable
    so the cost is ``O(N * (n * d + len(exponents) * n))``.
    """
    points = np.asarray(points)
    exponents = np.asarray(exponents)
    npts, n = points.shape
    if len(exponents) == 0:
        return np.ones((npts, 0), dtype=points.dtype)
    dmax = int(exponents.max()) if exponents.size else 0
    powers = np.ones((dmax + 1, npts, n), dtype=np.result_type(points, float))
    for p in range(1, dmax + 1):
        powers[p] = powers[p - 1] * points
    out = np.ones((npts, len(exponents)), dtype=powers.dtype)
    for i in range(n):
        out *= powers[exponents[:, i], :, i].T
    return out


@dataclass(frozen=True)
class Tms:
    """Truncated moment sequence of degree ``maxdeg`` in ``nvars`` variables."""

    nvars: int
    maxdeg: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        expected = comb(self.nvars + self.maxdeg, self.maxdeg)
        if len(vals) != expected:
            raise ValueError(f"tms of n={self.nvars}, d={self.maxdeg} needs {expected} values, got {len(vals)}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def basis(self) -> Basis:
        return basis(self.nvars, self.maxdeg)

    @property
    def mass(self) -> float:
        return float(self.values[0])

    def __getitem__(self, alpha: Sequence[int]) -> float:
        return float(self.values[self.basis.position(alpha)])

    def __len__(self) -> int:
        return len(self.values)

    @classmethod
    def from_atoms(cls, atoms, weights, maxdeg: int) -> "Tms":
        """Moments ``sum_i w_i [v_i]_maxdeg`` of a finitely atomic measure."""
        atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
        weights = np.asarray(weights, dtype=float).ravel()
        b = basis(atoms.shape[1], maxdeg)
        return cls(atoms.shape[1], maxdeg, weights @ b.monomials(atoms))

    @classmethod
    def dirac(cls, point, maxdeg: int, weight: float = 1.0) -> "Tms":
        return cls.from_atoms(np.asarray(point, dtype=float)[None, :], [weight], maxdeg)


def truncate(z: Tms, m: int) -> np.ndarray:
    """Entries of ``z`` indexed by degree 0 and exact degree ``m``, in order."""
    if m > z.maxdeg:
        raise IndexError(f"cannot truncate degree {z.maxdeg} moments at degree {m}")
    b = z.basis
    idx = b.positions(enumerate_indices(z.nvars, m, ZERO_AND_EXACT))
    return z.values[idx].copy()


def pairing(p: np.ndarray, z: Tms) -> float:
    """``<p, z> = sum_alpha p_alpha z_alpha`` for ``p`` over the graded basis.

    ``p`` may be shorter than ``z`` (lower degree); it must be the length of a
    complete graded basis.
    """
    p = np.asarray(p, dtype=float).ravel()
    if len(p) > len(z.values):
        raise ValueError(f"coefficient vector of length {len(p)} exceeds tms length {len(z.values)}")
    d = 0
    while comb(z.nvars + d, d) < len(p):
        d += 1
    if comb(z.nvars + d, d) != len(p):
        raise ValueError(f"length {len(p)} is not a graded basis size for {z.nvars} variables")
    return float(p @ z.values[: len(p)])


def poly_coeffs(terms: dict, nvars: int, maxdeg: int) -> np.ndarray:
    """Dense coefficient vector over ``basis(nvars, maxdeg)`` from ``{alpha: c}``."""
    b = basis(nvars, maxdeg)
    out = np.zeros(len(b))
    for alpha, c in terms.items():
        out[b.position(alpha)] += c
    return out
