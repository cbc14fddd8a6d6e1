"""Named test tensors with reference nuclear norms.

Each :class:`Fixture` carries a tensor factory and the reference nuclear
norms. ``k_real``/``k_complex`` are the orders at which a certificate is
expected, and ``length_*`` the expected number of terms where known.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import sqrt
from typing import Callable

import numpy as np

from .tensor import COMPLEX, SymTensor, symmetrize3


@dataclass(frozen=True)
class Fixture:
    name: str
    make: Callable[[], SymTensor]
    real: float | None = None
    complex: float | None = None
    tol: float = 1e-4
    k_real: int | None = None
    k_complex: int | None = None
    length_real: int | None = None
    length_complex: int | None = None

    def tensor(self) -> SymTensor:
        return self.make()


def _e(n: int, *idx, coef=None) -> np.ndarray:
    v = np.zeros(n)
    for j, i in enumerate(idx):
        v[i] = 1.0 if coef is None else coef[j]
    return v


def power_sum(vectors, signs, m: int, field: str | None = None) -> SymTensor:
    """``sum_i s_i v_i^{(x)m}`` for (possibly complex) vectors."""
    vectors = [np.asarray(v) for v in vectors]
    n = len(vectors[0])
    dense = np.zeros((n,) * m, dtype=complex)
    for v, s in zip(vectors, signs):
        t = np.array(s, dtype=complex)
        for _ in range(m):
            t = np.multiply.outer(t, v)
        dense += t
    return SymTensor.from_dense(dense if field == COMPLEX or np.any(dense.imag) else dense.real, field)


def index_tensor(fn, n: int, m: int, *, representative: bool = False) -> SymTensor:
    """Tensor with entry ``fn(i_1, ..., i_m)`` at 1-based indices."""
    dense = np.zeros((n,) * m, dtype=complex)
    for idx in itertools.product(range(1, n + 1), repeat=m):
        dense[tuple(i - 1 for i in idx)] = fn(*idx)
    if not np.any(dense.imag):
        dense = dense.real
    return SymTensor.from_dense(dense, representative=representative)


def binary_cubic_a() -> SymTensor:
    return SymTensor.from_avector([0.0, 1 / sqrt(3), 0.0, 0.0], 3, 2)


def binary_cubic_b() -> SymTensor:
    return SymTensor.from_avector([0.0, 0.5, 0.0, -0.5], 3, 2)


def quartic_a() -> SymTensor:
    n = 3
    return power_sum([np.ones(n)] + [_e(n, i) for i in range(n)], [1, -1, -1, -1], 4)


def quartic_b() -> SymTensor:
    n = 3
    return power_sum([_e(n, 0, 1), _e(n, 0, 2), _e(n, 1, 2)], [1, 1, -1], 4)


def quartic_c() -> SymTensor:
    vs = [np.array([1.0, 1, -1]), np.array([1.0, -1, 1]), np.array([-1.0, 1, 1]), np.ones(3)]
    return power_sum(vs, [1, 1, 1, -1], 4)


def complex_cubic() -> SymTensor:
    return index_tensor(lambda a, b, c: 1j ** (a * b * c), 3, 3)


def complex_quartic() -> SymTensor:
    # not symmetric as written (its symmetric part vanishes); sorted-index entries are used
    return index_tensor(lambda a, b, c, d: 1j ** a + (-1) ** b + (-1j) ** c + 1, 3, 4, representative=True)


def complex_quintic() -> SymTensor:
    def f(*i):
        p = int(np.prod(i))
        return 1j ** p + (-1j) ** p
    return index_tensor(f, 3, 5)


def complex_sextic() -> SymTensor:
    def f(*i):
        s = sum(i) - 6
        return (1 + 1j) ** s + (1 - 1j) ** s
    return index_tensor(f, 3, 6)


SEXTIC_COLUMNS = np.array([[1, 1], [1 - 1j, 1 + 1j], [-2j, 2j]])


def index_sum(n: int) -> SymTensor:
    return index_tensor(lambda a, b, c: a + b + c, n, 3)


def cosine_sum(n: int) -> SymTensor:
    return index_tensor(lambda a, b, c, d: np.cos(1 / a + 1 / b + 1 / c + 1 / d), n, 4)


def poly_x1x2x3() -> SymTensor:
    return SymTensor.from_poly({(1, 1, 1): 1.0}, 3, 3)


def poly_x1x2x3x4() -> SymTensor:
    return SymTensor.from_poly({(1, 1, 1, 1): 1.0}, 4, 4)


def poly_x1sq_x2sq() -> SymTensor:
    return SymTensor.from_poly({(2, 2): 1.0}, 4, 2)


def poly_pair_squares() -> SymTensor:
    return SymTensor.from_poly({(2, 2, 0): 1.0, (0, 2, 2): 1.0, (2, 0, 2): 1.0}, 4, 3)


def poly_norm_squared() -> SymTensor:
    return SymTensor.from_poly({(4, 0, 0): 1.0, (0, 4, 0): 1.0, (0, 0, 4): 1.0,
                                (2, 2, 0): 2.0, (0, 2, 2): 2.0, (2, 0, 2): 2.0}, 4, 3)


def sym_abc() -> SymTensor:
    return symmetrize3(np.array([1.0, 0, 0]), np.array([1.0, 1, 0]), np.array([1.0, 1, 1]))


def soep_tensor(vectors, m: int = 4) -> SymTensor:
    return power_sum(list(vectors), [1] * len(vectors), m)


def soep_example() -> SymTensor:
    e = np.ones(3)
    vs = []
    for i in range(3):
        vs += [e + _e(3, i), e - _e(3, i)]
    return soep_tensor(vs, 4)


def nonsym_example() -> np.ndarray:
    A = np.zeros((2, 2, 2))
    for i, j, k in itertools.product(range(1, 3), repeat=3):
        A[i - 1, j - 1, k - 1] = i - j - k
    return A


INDEX_SUM_VALUES = {2: (13.4164, 13.2114), 3: (33.6749, 32.9505), 4: (65.7267, 64.0886), 5: (111.2430, None),
          6: (171.7091, None), 7: (248.4754, None), 8: (342.7886, None), 9: (455.8125, None),
          10: (588.6425, None)}
COSINE_SUM_VALUES = {2: (4.9001, 3.9911), 3: (10.7246, 8.1627), 4: (18.0100, 13.1108), 5: (26.9770, None),
          6: (37.8395, None), 7: (50.7373, None), 8: (65.7485, None), 9: (82.9121, None),
          10: (102.2442, None)}

NONSYM_VALUE = 6.0

FIXTURES = {
    "binary-cubic-a": Fixture("binary-cubic-a", binary_cubic_a, sqrt(3), 1.5, 1e-4, 2, 2, 3, 3),
    "binary-cubic-b": Fixture("binary-cubic-b", binary_cubic_b, 2.0, sqrt(2), 1e-4, 2, 2),
    "quartic-a": Fixture("quartic-a", quartic_a, 12.0, 11.8960, 5e-3, 2, 3, None, 9),
    "quartic-b": Fixture("quartic-b", quartic_b, 12.0, 12.0, 5e-3, 2, 2),
    "quartic-c": Fixture("quartic-c", quartic_c, 36.0, 36.0, 5e-3, 2, 2),
    "complex-cubic": Fixture("complex-cubic", complex_cubic, None, 8.8759, 5e-3, None, 2, None, 5),
    "complex-quartic": Fixture("complex-quartic", complex_quartic, None, 26.9569, 5e-3, None, 3, None, 7),
    "complex-quintic": Fixture("complex-quintic", complex_quintic, None, 49.5626, 5e-3, None, 3, None, 6),
    "complex-sextic": Fixture("complex-sextic", complex_sextic, None, 686.0, 1e-2, None, 3, None, 2),
    "poly-x1x2x3": Fixture("poly-x1x2x3", poly_x1x2x3, sqrt(3) / 2, sqrt(3) / 2, 1e-4, 2, 2),
    "poly-x1x2x3x4": Fixture("poly-x1x2x3x4", poly_x1x2x3x4, 2 / 3, 2 / 3, 1e-4, 2, 2),
    "poly-x1^2x2^2": Fixture("poly-x1^2x2^2", poly_x1sq_x2sq, 1.0, 2 / 3, 1e-4, 2, 2),
    "poly-pair-squares": Fixture("poly-pair-squares", poly_pair_squares, 2.0, 5 / 3, 1e-4, 2, 2),
    "poly-norm-squared": Fixture("poly-norm-squared", poly_norm_squared, 5.0, 5.0, 1e-4, 2, 2),
    "sym-abc": Fixture("sym-abc", sym_abc, 2.4190, 2.2276, 5e-3, None, None, 5, 8),
    "soep": Fixture("soep", soep_example, 120.0, 120.0, 1e-3, 2, 2),
}
for _n, (_r, _c) in INDEX_SUM_VALUES.items():
    FIXTURES[f"index-sum-n{_n}"] = Fixture(f"index-sum-n{_n}", lambda n=_n: index_sum(n), _r, _c, 5e-3, 2, 2, 3, 3)
for _n, (_r, _c) in COSINE_SUM_VALUES.items():
    FIXTURES[f"cosine-sum-n{_n}"] = Fixture(f"cosine-sum-n{_n}", lambda n=_n: cosine_sum(n), _r, _c, 5e-3, 2, 2, 4, 4)
