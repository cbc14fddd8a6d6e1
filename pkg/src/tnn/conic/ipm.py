"""Built-in primal-dual interior-point method for PSD-constrained programs.

The program ``min c.x s.t. A x = b, G x + s = h, s in K`` (``K`` a product of
PSD cones, ``G x = -F(x)`` in row-major full-matrix coordinates) is embedded in
the homogeneous self-dual model

    0 = A'y + G'z + c tau,   0 = -A x + b tau,   s = -G x + h tau,
    kappa = -c.x - b.y - h.z,

so optimality, infeasibility and unboundedness are all read off the limit of
one sequence of iterates. Steps use Nesterov-Todd scaling ``R`` per block with
``R' Z R = R^-1 S R^-T = diag(lam)`` and Mehrotra predictor-corrector
centering. The scaling is updated multiplicatively, never recomputed from
``S`` and ``Z`` directly, which keeps the last iterations accurate.
"""

from __future__ import annotations

import logging
import time

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from ..moments import dedup_rows
from .program import (INFEASIBLE, NUMERICAL_LIMIT, OPTIMAL, UNBOUNDED, ConicProgram,
                      ConicSolution, Settings)

log = logging.getLogger(__name__)

_STEP = 0.99


class _Block:
    """One PSD block: its table, scaling state and cached dense slices."""

    def __init__(self, coef: sp.csr_matrix, size: int, const):
        self.size = size
        self.coef = coef.tocsc()
        cols = np.flatnonzero(np.diff(self.coef.indptr))
        self.cols = cols
        sub = self.coef[:, cols]
        self.subT = sub.T.tocsr()  # (|J|, s*s)
        self.dense = sub.T.toarray().reshape(len(cols), size, size)
        self.h = np.zeros(size * size) if const is None else np.asarray(const, dtype=float).ravel()
        self.R = np.eye(size)
        self.Rinv = np.eye(size)
        self.lam = np.ones(size)

    # G x = -F(x)
    def G(self, x):
        return -(self.coef @ x)

    def GT(self, v):
        return -(self.coef.T @ v)

    def s_mat(self):
        return (self.R * self.lam) @ self.R.T

    def z_mat(self):
        return (self.Rinv.T * self.lam) @ self.Rinv

    def scale(self, V):
        """``W^-T V = Rinv V Rinv'``."""
        return self.Rinv @ V @ self.Rinv.T

    def unscale(self, U):
        """``W^-1 U = Rinv' U Rinv`` (maps a scaled dual back)."""
        return self.Rinv.T @ U @ self.Rinv

    def schur(self, nx: int) -> tuple[np.ndarray, np.ndarray]:
        """``G' W^-1 W^-T G`` restricted to the block's columns.

        Each ``F_b`` is scaled as ``Rinv' (Rinv F_b Rinv') Rinv`` and paired
        with the sparse table, which avoids forming ``Rinv' Rinv``.
        """
        s, J = self.size, len(self.cols)
        P, Pt = self.Rinv, self.Rinv.T

        def two_sided(M, stack):  # M @ F_b @ M' for every b
            T = M @ stack.transpose(1, 0, 2).reshape(s, J * s)
            T = T.reshape(s, J, s).transpose(1, 0, 2)
            return T @ M.T

        U = two_sided(Pt, two_sided(P, self.dense))
        U = U.transpose(1, 2, 0).reshape(s * s, J)
        return self.cols, np.asarray(self.subT @ U)


def _sym(M):
    return 0.5 * (M + M.T)


def _max_step(lam, D):
    """Largest ``a`` with ``diag(lam) + a D`` PSD (``inf`` if unbounded)."""
    r = 1.0 / np.sqrt(lam)
    ev = la.eigvalsh(_sym(D * r[:, None] * r[None, :]))[0]
    return np.inf if ev >= 0 else -1.0 / ev


def _update_scaling(blk: _Block, ls, lz):
    Ls = la.cholesky(_sym(ls), lower=True)
    Lz = la.cholesky(_sym(lz), lower=True)
    U, sig, Vt = la.svd(Lz.T @ Ls)
    Rt = Ls @ Vt.T / np.sqrt(sig)[None, :]
    Rt_inv = (np.sqrt(sig)[:, None] * Vt) @ la.solve_triangular(Ls, np.eye(len(sig)), lower=True)
    blk.R = blk.R @ Rt
    blk.Rinv = Rt_inv @ blk.Rinv
    blk.lam = sig


def independent_rows(A: np.ndarray, b: np.ndarray, tol: float):
    """Rows spanning the row space of ``A``; consistency residual of ``b``."""
    if A.shape[0] == 0:
        return np.arange(0), None
    _, R, piv = la.qr(A.T, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    rank = int(np.sum(d > tol * max(1.0, d[0] if len(d) else 1.0)))
    keep = np.sort(piv[:rank])
    Ak, bk = A[keep], b[keep]
    xls = la.lstsq(Ak, bk)[0] if rank else np.zeros(A.shape[1])
    res = b - A @ xls
    if np.linalg.norm(res) > 1e3 * tol * (1.0 + np.linalg.norm(b)):
        return keep, res
    return keep, None


def equality_system(prog: ConicProgram):
    """User equality rows followed by one row per distinct zero-block cell."""
    zero_rows, zero_rhs, zero_counts = [], [], []
    for blk in prog.zero_blocks:
        s = blk.size
        iu = np.triu_indices(s)
        sel = iu[0] * s + iu[1]
        rows, kept = dedup_rows(blk.coef[sel], return_index=True)
        const = np.zeros(s * s) if blk.const is None else np.asarray(blk.const, dtype=float).ravel()
        zero_rows.append(rows)
        zero_rhs.append(-const[sel[kept]])
        zero_counts.append(rows.shape[0])
    Afull = sp.vstack([prog.A] + zero_rows).tocsr() if zero_rows else prog.A
    bfull = np.concatenate([prog.b] + zero_rhs) if zero_rhs else prog.b
    return Afull, bfull, zero_counts


def solve_builtin(prog: ConicProgram, settings: Settings | None = None) -> ConicSolution:
    st = settings or Settings()
    t0 = time.perf_counter()
    nx = prog.nvars
    c = prog.c

    Afull, bfull, zero_counts = equality_system(prog)
    Ad = Afull.toarray()
    keep, inconsistency = independent_rows(Ad, bfull, 1e-10)

    def _pack(status, x, yfull, zs, info, pobj=np.nan, dobj=np.nan, pres=np.inf, dres=np.inf, gap=np.inf, it=0):
        # report multipliers with c = A'y + sum coef'Z
        yfull = -yfull
        ny = len(prog.b)
        zd, off = [], ny
        for cnt in zero_counts:
            zd.append(yfull[off:off + cnt])
            off += cnt
        info = dict(info)
        info["seconds"] = time.perf_counter() - t0
        return ConicSolution(status, x, yfull[:ny], zd, zs, float(pobj), float(dobj), float(pres), float(dres),
                             float(gap), it, info)

    if inconsistency is not None:
        y = -inconsistency / np.linalg.norm(inconsistency)
        return _pack(INFEASIBLE, np.full(nx, np.nan), y, [], {"reason": "inconsistent equality constraints"})

    A = sp.csr_matrix(Ad[keep])
    b = bfull[keep]
    me = A.shape[0]
    blocks = [_Block(blk.coef, blk.size, blk.const) for blk in prog.psd_blocks]
    nu = sum(bk.size for bk in blocks)
    h = np.concatenate([bk.h for bk in blocks])
    offs = np.cumsum([0] + [bk.size ** 2 for bk in blocks])
    nrm_c = max(1.0, np.linalg.norm(c))
    nrm_bh = max(1.0, np.linalg.norm(b), np.linalg.norm(h))

    def split(v):
        return [v[offs[i]:offs[i + 1]].reshape(bk.size, bk.size) for i, bk in enumerate(blocks)]

    def Gx(x):
        return np.concatenate([bk.G(x) for bk in blocks])

    def GTz(z):
        out = np.zeros(nx)
        for bk, Z in zip(blocks, split(z)):
            out += bk.GT(Z.ravel())
        return out

    def scale(v):
        return np.concatenate([bk.scale(V).ravel() for bk, V in zip(blocks, split(v))])

    def unscale(u):
        return np.concatenate([bk.unscale(U).ravel() for bk, U in zip(blocks, split(u))])

    x = np.zeros(nx)
    y = np.zeros(me)
    tau, kappa = 1.0, 1.0
    best = None
    status = NUMERICAL_LIMIT
    reason = "iteration limit"
    it = 0
    stall = 0

    # null-space split of the equality rows: x = Q1 R1^-T by + Q2 w
    if me:
        Q, Rq = la.qr(A.T.toarray(), mode="full")
        Q1, Q2, R1 = Q[:, :me], Q[:, me:], Rq[:me, :me]
    else:
        Q1, Q2, R1 = np.zeros((nx, 0)), np.eye(nx), np.zeros((0, 0))

    def factor():
        Hm = np.zeros((nx, nx))
        for bk in blocks:
            cols, contrib = bk.schur(nx)
            Hm[np.ix_(cols, cols)] += contrib
        Hm = _sym(Hm)
        K = _sym(Q2.T @ Hm @ Q2) if me else Hm
        reg = 1e-14 * max(1.0, np.max(np.abs(np.diag(K)), initial=0.0))
        for _ in range(8):
            try:
                L = la.cho_factor(K + reg * np.eye(len(K)), lower=True, check_finite=False)
                break
            except la.LinAlgError:
                reg *= 100.0
        else:
            raise la.LinAlgError("reduced Hessian not positive definite")
        return Hm, L

    def kkt(fac, bx, by, bz):
        """Solve ``A'dy + G'dz = bx, A dx = by, G dx - W'W dz = bz``.

        Works with the scaled dual ``u = W dz`` so that every residual in the
        refinement loop is of order one. Returns ``(dx, dy, dz, u)``.
        """
        Hm, L = fac
        bzs = scale(bz)

        def once(bx, by, bzs):
            rhs = bx + GTz(unscale(bzs))
            if me:
                xp = Q1 @ la.solve_triangular(R1, by, trans="T", check_finite=False)
                w = la.cho_solve(L, Q2.T @ (rhs - Hm @ xp), check_finite=False)
                dx = xp + Q2 @ w
                dy = la.solve_triangular(R1, Q1.T @ (rhs - Hm @ dx), check_finite=False)
            else:
                dx = la.cho_solve(L, rhs, check_finite=False)
                dy = np.zeros(0)
            return dx, dy, scale(Gx(dx)) - bzs

        def err(dx, dy, u):
            return (bx - (A.T @ dy + GTz(unscale(u))), by - A @ dx, bzs - (scale(Gx(dx)) - u))

        dx, dy, u = once(bx, by, bzs)
        e = err(dx, dy, u)
        enorm = max(np.abs(v).max(initial=0.0) for v in e)
        for _ in range(st.refine):
            if enorm < 1e-15:
                break
            cx, cy, cu = once(*e)
            nx_, ny_, nu_ = dx + cx, dy + cy, u + cu
            e2 = err(nx_, ny_, nu_)
            en2 = max(np.abs(v).max(initial=0.0) for v in e2)
            if en2 >= enorm:
                break
            dx, dy, u, e, enorm = nx_, ny_, nu_, e2, en2
        log.debug("kkt err %.2e", enorm)
        return dx, dy, unscale(u), u

    svec = np.concatenate([bk.s_mat().ravel() for bk in blocks])
    zvec = np.concatenate([bk.z_mat().ravel() for bk in blocks])
    for it in range(st.max_iter + 1):
        lam2 = sum(float(bk.lam @ bk.lam) for bk in blocks)
        rx = A.T @ y + GTz(zvec) + c * tau
        ry = -(A @ x) + b * tau
        rz = svec + Gx(x) - h * tau
        cx_, by_, hz_ = float(c @ x), float(b @ y), float(h @ zvec)
        rt = kappa + cx_ + by_ + hz_
        mu = (lam2 + tau * kappa) / (nu + 1)

        pcost, dcost = cx_ / tau, -(by_ + hz_) / tau
        pres = max(np.linalg.norm(ry), np.linalg.norm(rz)) / tau / nrm_bh
        dres = np.linalg.norm(rx) / tau / nrm_c
        gap = lam2 / tau ** 2
        relgap = max(gap, abs(pcost - dcost)) / max(1.0, abs(pcost))
        score = max(pres, dres, relgap)
        if best is None or score < best[0]:
            best = (score, x / tau, y / tau, zvec / tau, pcost, dcost, pres, dres, relgap)
        if st.verbose:
            log.info("it %3d pcost % .9e dcost % .9e pres %.2e dres %.2e gap %.2e tau %.2e kappa %.2e",
                     it, pcost, dcost, pres, dres, relgap, tau, kappa)
        if pres <= st.feas_tol and dres <= st.feas_tol and relgap <= st.gap_tol:
            status, reason = OPTIMAL, "converged"
            break
        if by_ + hz_ < 0:
            pinf = np.linalg.norm(A.T @ y + GTz(zvec)) / nrm_c / -(by_ + hz_)
            if pinf <= st.feas_tol:
                status, reason = INFEASIBLE, "primal infeasibility certificate"
                break
        if cx_ < 0:
            dinf = max(np.linalg.norm(A @ x), np.linalg.norm(svec + Gx(x))) / nrm_bh / -cx_
            if dinf <= st.feas_tol:
                status, reason = UNBOUNDED, "dual infeasibility certificate"
                break
        if it == st.max_iter:
            break

        try:
            fac = factor()
            x1, y1, z1, u1 = kkt(fac, -c, b, h)
        except (la.LinAlgError, ValueError) as exc:
            reason = f"linear algebra failure: {exc}"
            break
        denom_base = -kappa / tau + float(c @ x1 + b @ y1 + h @ z1)

        def direction(eta, dmats, dk):
            WTd = np.concatenate([(bk.R @ D @ bk.R.T).ravel() for bk, D in zip(blocks, dmats)])
            x2, y2, z2, u2 = kkt(fac, -eta * rx, eta * ry, -eta * rz - WTd)
            dtau = (-eta * rt - dk / tau - float(c @ x2 + b @ y2 + h @ z2)) / denom_base
            dx, dy, dz = x2 + dtau * x1, y2 + dtau * y1, z2 + dtau * z1
            du = u2 + dtau * u1
            dkap = (dk - kappa * dtau) / tau
            zt, st_ = [], []
            for D, U in zip(dmats, split(du)):
                Wdz = _sym(U)
                zt.append(Wdz)
                st_.append(_sym(D - Wdz))
            ds = np.concatenate([(bk.R @ S_ @ bk.R.T).ravel() for bk, S_ in zip(blocks, st_)])
            return dx, dy, dtau, dkap, st_, zt, dz, ds

        def step_len(dtau, dkap, st_, zt):
            a = np.inf
            if dtau < 0:
                a = min(a, -tau / dtau)
            if dkap < 0:
                a = min(a, -kappa / dkap)
            for bk, S_, Z_ in zip(blocks, st_, zt):
                a = min(a, _max_step(bk.lam, S_), _max_step(bk.lam, Z_))
            return a

        try:
            aff = direction(1.0, [np.diag(-bk.lam) for bk in blocks], -tau * kappa)
            a_aff = min(1.0, step_len(*aff[2:6]))
            sigma = min(1.0, max(0.0, 1.0 - a_aff)) ** 3
            dmats = []
            for bk, S_, Z_ in zip(blocks, aff[4], aff[5]):
                lam = bk.lam
                rhs = -np.diag(lam * lam) - 0.5 * (S_ @ Z_ + Z_ @ S_) + sigma * mu * np.eye(bk.size)
                dmats.append(_sym(2.0 * rhs / (lam[:, None] + lam[None, :])))
            dk = -tau * kappa - aff[2] * aff[3] + sigma * mu
            dx, dy, dtau, dkap, st_, zt, dz, ds = direction(1.0 - sigma, dmats, dk)
            alpha = min(1.0, _STEP * step_len(dtau, dkap, st_, zt))
            if not np.isfinite(alpha) or alpha < 1e-12:
                reason = "step length collapsed"
                break
            x = x + alpha * dx
            y = y + alpha * dy
            tau = tau + alpha * dtau
            kappa = kappa + alpha * dkap
            svec = svec + alpha * ds
            zvec = zvec + alpha * dz
            for bk, S_, Z_ in zip(blocks, st_, zt):
                L = np.diag(bk.lam)
                _update_scaling(bk, L + alpha * S_, L + alpha * Z_)
        except (la.LinAlgError, ValueError) as exc:
            reason = f"linear algebra failure: {exc}"
            break
        stall = stall + 1 if alpha < 1e-3 else 0
        if stall >= 8:
            reason = "stalled"
            break

    if status in (INFEASIBLE, UNBOUNDED):
        xs = x if status == UNBOUNDED else np.full(nx, np.nan)
        yfull = np.zeros(len(bfull))
        yfull[keep] = y
        zs = [Z for Z in split(zvec)] if status == INFEASIBLE else []
        return _pack(status, xs, yfull, zs, {"reason": reason, "tau": tau, "kappa": kappa}, it=it)

    if status == OPTIMAL:
        xs, ys, zs_, pobj, dobj, pr, dr, g = x / tau, y / tau, zvec / tau, pcost, dcost, pres, dres, relgap
    else:
        _, xs, ys, zs_, pobj, dobj, pr, dr, g = best
    yfull = np.zeros(len(bfull))
    yfull[keep] = ys
    return _pack(status, xs, yfull, split(zs_), {"reason": reason, "tau": tau, "kappa": kappa},
                 pobj, dobj, pr, dr, g, it)
