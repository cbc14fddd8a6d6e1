"""Containers for linear programs over products of PSD cones."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO

import numpy as np
import scipy.sparse as sp

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERICAL_LIMIT = "numerical-limit"

PSD = "psd"
ZERO = "zero"


class CertificateUnavailable(RuntimeError):
    """Raised when a dual certificate is requested from a non-optimal solve."""


@dataclass
class ConeBlock:
    """``const + reshape(coef @ x, (size, size))`` constrained PSD or zero."""

    kind: str
    size: int
    coef: sp.csr_matrix
    name: str = ""
    const: np.ndarray | None = None

    def evaluate(self, x) -> np.ndarray:
        out = np.asarray(self.coef @ x).reshape(self.size, self.size)
        return out if self.const is None else out + self.const


@dataclass
class ConicProgram:
    """``min c.x  s.t.  A x = b`` and every block in ``blocks`` PSD or zero.

    ``meta`` carries builder bookkeeping (which equality rows pin the tensor,
    how the variable is stacked, and so on); the solver ignores it.
    """

    c: np.ndarray
    A: sp.csr_matrix
    b: np.ndarray
    blocks: list
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        nx = len(self.c)
        self.b = np.asarray(self.b, dtype=float).ravel()
        self.A = sp.csr_matrix(self.A) if self.A is not None else sp.csr_matrix((0, nx))
        if self.A.shape[0] == 0:
            self.A = sp.csr_matrix((0, nx))
        if self.A.shape != (len(self.b), nx):
            raise ValueError(f"A has shape {self.A.shape}, expected ({len(self.b)}, {nx})")
        if not np.all(np.isfinite(self.c)):
            raise ValueError("objective coefficients must be finite")
        for blk in self.blocks:
            if blk.coef.shape != (blk.size * blk.size, nx):
                raise ValueError(f"block {blk.name!r} has table shape {blk.coef.shape}")
        if not any(blk.kind == PSD for blk in self.blocks):
            raise ValueError("a conic program needs at least one psd block")

    @property
    def nvars(self) -> int:
        return len(self.c)

    @property
    def psd_blocks(self) -> list:
        return [b for b in self.blocks if b.kind == PSD]

    @property
    def zero_blocks(self) -> list:
        return [b for b in self.blocks if b.kind == ZERO]

    def dump(self, fp: IO[str]) -> None:
        """Write the program as sparse text, one nonzero per line.

        Lines read ``block row col value``. Block ``c`` is the objective (row
        0, col = variable), ``A`` the equality matrix, ``b`` the right-hand
        side (col 0), and ``<kind><j>.<var>`` the coefficient matrix of
        variable ``var`` in cone block ``j``; ``<kind><j>.const`` is a
        constant term.
        """
        fp.write(f"# tnn conic program: nvars={self.nvars} equalities={len(self.b)} blocks={len(self.blocks)}\n")
        for j in np.flatnonzero(self.c):
            fp.write(f"c 0 {j} {float(self.c[j])!r}\n")
        A = self.A.tocoo()
        for i, j, v in zip(A.row, A.col, A.data):
            fp.write(f"A {i} {j} {float(v)!r}\n")
        for i in np.flatnonzero(self.b):
            fp.write(f"b {i} 0 {float(self.b[i])!r}\n")
        for bi, blk in enumerate(self.blocks):
            tab = blk.coef.tocoo()
            order = np.lexsort((tab.row, tab.col))
            for r, v, val in zip(tab.row[order], tab.col[order], tab.data[order]):
                fp.write(f"{blk.kind}{bi}.{v} {r // blk.size} {r % blk.size} {float(val)!r}\n")
            if blk.const is not None:
                for r, col in zip(*np.nonzero(blk.const)):
                    fp.write(f"{blk.kind}{bi}.const {r} {col} {float(blk.const[r, col])!r}\n")


@dataclass
class Settings:
    feas_tol: float = 1e-8
    gap_tol: float = 1e-8
    max_iter: int = 200
    backend: str = "builtin"
    verbose: bool = False
    refine: int = 3


@dataclass
class ConicSolution:
    status: str
    x: np.ndarray
    y: np.ndarray  # multipliers: c = A'y + sum_j coef_j' Z_j at optimality
    zero_duals: list  # per zero block, multipliers of its distinct cells
    psd_duals: list  # one PSD matrix per psd block
    objective: float
    dual_objective: float
    residual: float
    dual_residual: float
    gap: float
    iterations: int
    info: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL
