"""Optional backend delegating to ``cvxopt.solvers.conelp``."""

from __future__ import annotations

import time

import numpy as np

from .ipm import equality_system, independent_rows
from .program import INFEASIBLE, NUMERICAL_LIMIT, OPTIMAL, UNBOUNDED, ConicProgram, ConicSolution, Settings

_STATUS = {"optimal": OPTIMAL, "primal infeasible": INFEASIBLE, "dual infeasible": UNBOUNDED}


def available() -> bool:
    try:
        import cvxopt  # noqa: F401
    except ImportError:
        return False
    return True


def solve_cvxopt(prog: ConicProgram, settings: Settings | None = None) -> ConicSolution:
    try:
        import cvxopt
        from cvxopt import solvers
    except ImportError as exc:  # pragma: no cover - depends on the environment
        raise RuntimeError("the cvxopt backend needs the optional 'cvxopt' package") from exc
    st = settings or Settings()
    t0 = time.perf_counter()
    Afull, bfull, counts = equality_system(prog)
    keep, bad = independent_rows(Afull.toarray(), bfull, 1e-10)
    if bad is not None:
        y = bad / np.linalg.norm(bad)
        return ConicSolution(INFEASIBLE, np.full(prog.nvars, np.nan), y, [], [], np.nan, np.nan, np.inf, np.inf,
                             np.inf, 0, {"reason": "inconsistent equality constraints", "backend": "cvxopt"})
    blocks = prog.psd_blocks
    G = -np.vstack([b.coef.toarray() for b in blocks])
    h = np.concatenate([np.zeros(b.size ** 2) if b.const is None else b.const.ravel() for b in blocks])
    A = Afull.toarray()[keep]
    opts = {"show_progress": st.verbose, "abstol": st.gap_tol, "reltol": st.gap_tol,
            "feastol": st.feas_tol, "maxiters": st.max_iter}
    res = solvers.conelp(cvxopt.matrix(prog.c), cvxopt.matrix(G), cvxopt.matrix(h),
                         {"l": 0, "q": [], "s": [b.size for b in blocks]},
                         cvxopt.matrix(A) if len(keep) else None,
                         cvxopt.matrix(bfull[keep]) if len(keep) else None, options=opts)
    status = _STATUS.get(res["status"], NUMERICAL_LIMIT)
    x = np.array(res["x"]).ravel() if res["x"] is not None else np.full(prog.nvars, np.nan)
    yk = np.array(res["y"]).ravel() if res["y"] is not None else np.zeros(len(keep))
    z = np.array(res["z"]).ravel() if res["z"] is not None else np.zeros(len(h))
    yfull = np.zeros(len(bfull))
    yfull[keep] = -yk
    ny = len(prog.b)
    zd, off = [], ny
    for cnt in counts:
        zd.append(yfull[off:off + cnt])
        off += cnt
    zs, off = [], 0
    for b in blocks:
        zs.append(z[off:off + b.size ** 2].reshape(b.size, b.size))
        off += b.size ** 2
    f = lambda key: float(res.get(key)) if res.get(key) is not None else float("nan")  # noqa: E731
    return ConicSolution(status, x, yfull[:ny], zd, zs, f("primal objective"), f("dual objective"),
                         f("primal infeasibility"), f("dual infeasibility"), f("relative gap"),
                         int(res.get("iterations", 0)),
                         {"reason": res["status"], "backend": "cvxopt", "seconds": time.perf_counter() - t0})
