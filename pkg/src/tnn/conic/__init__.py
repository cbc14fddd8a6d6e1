"""Linear programs over products of PSD cones and their solvers."""

from __future__ import annotations

import numpy as np

from .ipm import solve_builtin
from .program import (INFEASIBLE, NUMERICAL_LIMIT, OPTIMAL, PSD, UNBOUNDED, ZERO, CertificateUnavailable, ConeBlock,
                      ConicProgram, ConicSolution, Settings)

BACKENDS = ("builtin", "cvxopt")


def solve(prog: ConicProgram, settings: Settings | None = None) -> ConicSolution:
    """Solve ``prog`` with the backend named in ``settings`` (built-in by default)."""
    settings = settings or Settings()
    if settings.backend == "builtin":
        return solve_builtin(prog, settings)
    if settings.backend == "cvxopt":
        from .cvxopt_backend import solve_cvxopt

        return solve_cvxopt(prog, settings)
    raise ValueError(f"unknown backend {settings.backend!r}; expected one of {BACKENDS}")


def dual_certificate(sol: ConicSolution, prog: ConicProgram) -> tuple[np.ndarray, float]:
    """Dual form ``p`` read off the multipliers of the tensor-pinning rows.

    Returns ``(p, value)`` with ``value = <p, a>`` for the unscaled tensor.
    Complex relaxations return ``p`` as the stacked pair ``(p1, p2)``. The
    builder records the rows in ``prog.meta["tensor_rows"]`` and the
    normalization factor in ``prog.meta["scale"]``.
    """
    if not sol.optimal:
        raise CertificateUnavailable(f"no certificate from a solve with status {sol.status!r}")
    rows = np.asarray(prog.meta["tensor_rows"], dtype=np.int64)
    p = np.asarray(sol.y, dtype=float)[rows]
    value = float(p @ prog.b[rows]) * float(prog.meta.get("scale", 1.0))
    return p, value


__all__ = ["solve", "dual_certificate", "ConicProgram", "ConeBlock", "ConicSolution", "Settings",
           "CertificateUnavailable", "OPTIMAL", "INFEASIBLE", "UNBOUNDED", "NUMERICAL_LIMIT", "PSD", "ZERO", "BACKENDS"]
