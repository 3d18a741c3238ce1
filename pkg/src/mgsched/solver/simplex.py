"""Bounded-variable revised primal simplex.

Solves  min c'x  s.t.  rows (<=, =, >=),  l <= x <= u.  The constraint matrix
is kept sparse; the basis is a SuperLU factorization plus a product-form eta
file that is refactorized periodically, so FTRAN/BTRAN cost scales with the
number of nonzeros rather than the basis dimension.  Infeasible starts are
handled by a composite phase 1 that prices the sum of basic bound violations.
Pricing is Dantzig with a Bland fallback after a long degenerate streak; ties
break on lowest variable index, so repeat solves are bit-for-bit identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.linalg import splu

from .problem import MilpProblem, MilpSolution

AT_LB, AT_UB, AT_FREE, BASIC = np.int8(0), np.int8(1), np.int8(2), np.int8(3)


@dataclass
class SolverOptions:
    feas_tol: float = 1e-7
    opt_tol: float = 1e-7
    zero_tol: float = 1e-9
    iter_limit: int = 200_000
    refactor_every: int = 60
    bland_after: int = 300


@dataclass
class Arrays:
    """Sparse expansion of a MilpProblem (structural columns only; logical
    column j >= n is the unit vector of its row)."""

    A_csr: csr_matrix      # (m, n) row-major, for residuals
    AT_csr: csr_matrix     # (n, m) row-major transpose, for pricing
    b: np.ndarray          # (m,)
    c: np.ndarray          # (n + m,), zeros on logicals
    lb: np.ndarray         # (n + m,)
    ub: np.ndarray         # (n + m,)
    n: int
    m: int
    integer_mask: np.ndarray = field(default=None)
    col_idx: list = field(default=None)   # nonzero row indices per structural column
    col_val: list = field(default=None)


def expand(problem: MilpProblem) -> Arrays:
    n, m = problem.n_vars, problem.n_rows
    b = np.empty(m)
    lb = np.empty(n + m)
    ub = np.empty(n + m)
    c = np.zeros(n + m)
    for j, v in enumerate(problem.variables):
        lb[j], ub[j] = v.lower, v.upper
    for j, coeff in problem.objective.items():
        c[j] = coeff
    rows_i, cols_j, vals = [], [], []
    for i, row in enumerate(problem.rows):
        for j, coeff in row.coeffs.items():
            rows_i.append(i)
            cols_j.append(j)
            vals.append(coeff)
        b[i] = row.rhs
        if row.sense == "<=":
            lb[n + i], ub[n + i] = 0.0, np.inf
        elif row.sense == ">=":
            lb[n + i], ub[n + i] = -np.inf, 0.0
        else:
            lb[n + i], ub[n + i] = 0.0, 0.0
    A_csr = csr_matrix((vals, (rows_i, cols_j)), shape=(m, n))
    A_csc = A_csr.tocsc()
    AT_csr = A_csc.T.tocsr()
    mask = np.zeros(n, dtype=bool)
    mask[problem.integer_indices()] = True
    col_idx = [A_csc.indices[A_csc.indptr[j]: A_csc.indptr[j + 1]].astype(np.intp)
               for j in range(n)]
    col_val = [A_csc.data[A_csc.indptr[j]: A_csc.indptr[j + 1]].copy()
               for j in range(n)]
    return Arrays(A_csr, AT_csr, b, c, lb, ub, n, m, mask, col_idx, col_val)


class CoreResult:
    def __init__(self, status, x, objective, duals=None, reduced=None,
                 basis=None, vstat=None, iterations=0, certificate=None):
        self.status = status
        self.x = x
        self.objective = objective
        self.duals = duals
        self.reduced = reduced
        self.basis = basis
        self.vstat = vstat
        self.iterations = iterations
        self.certificate = certificate


class _Simplex:
    def __init__(self, arr: Arrays, opts: SolverOptions,
                 warm: tuple[np.ndarray, np.ndarray] | None = None):
        self.arr = arr
        self.opts = opts
        self.n, self.m = arr.n, arr.m
        self.total = arr.n + arr.m
        self.x = np.zeros(self.total)
        self.iterations = 0
        self.etas: list[tuple[int, np.ndarray]] = []
        self.degen_streak = 0
        self.bland = False
        self._fixed = (arr.ub - arr.lb) <= opts.zero_tol
        if self.m and not (warm is not None and self._try_warm(*warm)):
            self._cold_start()

    # -- basis management -------------------------------------------------

    def _cold_start(self) -> None:
        arr = self.arr
        self.basis = np.arange(self.n, self.n + self.m)
        self.vstat = np.empty(self.total, dtype=np.int8)
        finite_lb = np.isfinite(arr.lb)
        finite_ub = np.isfinite(arr.ub)
        self.vstat[:] = np.where(finite_lb, AT_LB, np.where(finite_ub, AT_UB, AT_FREE))
        self.vstat[self.basis] = BASIC
        self._set_nonbasic_values()
        self._factorize()

    def _try_warm(self, basis: np.ndarray, vstat: np.ndarray) -> bool:
        if basis is None or vstat is None:
            return False
        basis = np.asarray(basis, dtype=int).copy()
        vstat = np.asarray(vstat, dtype=np.int8).copy()
        if basis.shape != (self.m,) or vstat.shape != (self.total,):
            return False
        if len(np.unique(basis)) != self.m or basis.min() < 0 or basis.max() >= self.total:
            return False
        self.basis = basis
        self.vstat = vstat
        self.vstat[basis] = BASIC
        # repair nonbasic statuses that refer to absent bounds
        nb = np.ones(self.total, dtype=bool)
        nb[basis] = False
        bad = nb & (self.vstat == BASIC)
        self.vstat[bad & np.isfinite(self.arr.lb)] = AT_LB
        self.vstat[bad & ~np.isfinite(self.arr.lb) & np.isfinite(self.arr.ub)] = AT_UB
        self.vstat[bad & ~np.isfinite(self.arr.lb) & ~np.isfinite(self.arr.ub)] = AT_FREE
        self.vstat[nb & (self.vstat == AT_LB) & ~np.isfinite(self.arr.lb)] = AT_FREE
        self.vstat[nb & (self.vstat == AT_UB) & ~np.isfinite(self.arr.ub)] = AT_FREE
        try:
            self._set_nonbasic_values()
            self._factorize()
        except np.linalg.LinAlgError:
            return False
        return True

    def _factorize(self) -> None:
        arr = self.arr
        rows, cols, vals = [], [], []
        for k, j in enumerate(self.basis):
            if j < self.n:
                idx = arr.col_idx[j]
                rows.append(idx)
                cols.append(np.full(idx.size, k, dtype=np.intp))
                vals.append(arr.col_val[j])
            else:
                rows.append(np.array([j - self.n], dtype=np.intp))
                cols.append(np.array([k], dtype=np.intp))
                vals.append(np.ones(1))
        B = csr_matrix((np.concatenate(vals),
                        (np.concatenate(rows), np.concatenate(cols))),
                       shape=(self.m, self.m)).tocsc()
        try:
            lu = splu(B)
        except RuntimeError as exc:            # exactly singular
            raise np.linalg.LinAlgError(str(exc)) from exc
        diag = np.abs(lu.U.diagonal())
        scale = max(1.0, diag.max() if diag.size else 1.0)
        if diag.size and diag.min() < 1e-12 * scale:
            raise np.linalg.LinAlgError("near-singular basis")
        self.lu = lu
        self.etas = []
        self._recompute_basics()

    def _set_nonbasic_values(self) -> None:
        nb = self.vstat != BASIC
        at_lb = nb & (self.vstat == AT_LB)
        at_ub = nb & (self.vstat == AT_UB)
        at_fr = nb & (self.vstat == AT_FREE)
        self.x[at_lb] = self.arr.lb[at_lb]
        self.x[at_ub] = self.arr.ub[at_ub]
        self.x[at_fr] = 0.0

    def _recompute_basics(self) -> None:
        saved = self.x[self.basis].copy()
        self.x[self.basis] = 0.0
        rhs = self.arr.b - self.arr.A_csr @ self.x[: self.n] - self.x[self.n:]
        self.x[self.basis] = saved
        self.x[self.basis] = self._ftran_dense(rhs)

    # -- FTRAN / BTRAN ------------------------------------------------------

    def _ftran_dense(self, rhs: np.ndarray) -> np.ndarray:
        t = self.lu.solve(rhs)
        for r, v in self.etas:
            tr = t[r]
            if tr != 0.0:
                t -= v * tr
        return t

    def _ftran_column(self, j: int) -> np.ndarray:
        rhs = np.zeros(self.m)
        if j < self.n:
            rhs[self.arr.col_idx[j]] = self.arr.col_val[j]
        else:
            rhs[j - self.n] = 1.0
        return self._ftran_dense(rhs)

    def _btran(self, cost_basic: np.ndarray) -> np.ndarray:
        s = cost_basic.copy()
        for r, v in reversed(self.etas):
            s[r] -= s @ v
        return self.lu.solve(s, trans="T")

    # -- pricing ----------------------------------------------------------

    def _infeasibility(self) -> tuple[np.ndarray, float]:
        xb = self.x[self.basis]
        lo = self.arr.lb[self.basis]
        hi = self.arr.ub[self.basis]
        tol = self.opts.feas_tol
        gamma = np.zeros(self.m)
        below = xb < lo - tol
        above = xb > hi + tol
        gamma[below] = -1.0
        gamma[above] = 1.0
        total = float(np.sum(lo[below] - xb[below]) + np.sum(xb[above] - hi[above]))
        return gamma, total

    def _reduced_costs(self, y: np.ndarray, phase: int) -> np.ndarray:
        d = np.empty(self.total)
        Aty = self.arr.AT_csr @ y
        if phase == 1:
            d[: self.n] = -Aty
        else:
            d[: self.n] = self.arr.c[: self.n] - Aty
        d[self.n:] = -y
        return d

    def _select_entering(self, d: np.ndarray) -> tuple[int, int] | None:
        tol = self.opts.opt_tol
        nb = self.vstat != BASIC
        open_var = ~self._fixed
        up = nb & open_var & (((self.vstat == AT_LB) | (self.vstat == AT_FREE))
                              & (d < -tol))
        dn = nb & open_var & (((self.vstat == AT_UB) | (self.vstat == AT_FREE))
                              & (d > tol))
        eligible = up | dn
        if not eligible.any():
            return None
        idx = np.flatnonzero(eligible)
        if self.bland:
            q = int(idx[0])
        else:
            q = int(idx[np.argmax(np.abs(d[idx]))])
        return q, (1 if up[q] else -1)

    # -- ratio test --------------------------------------------------------

    def _ratio_test(self, q: int, direction: int, w: np.ndarray, phase: int):
        """Return (theta, blocking position | -1 self-block | -2 unbounded, target)."""
        ztol = self.opts.zero_tol
        ftol = self.opts.feas_tol
        xb = self.x[self.basis]
        lo = self.arr.lb[self.basis]
        hi = self.arr.ub[self.basis]
        rate = -direction * w
        theta = np.full(self.m, np.inf)
        target = np.full(self.m, AT_LB, dtype=np.int8)
        moving_up = rate > ztol
        moving_dn = rate < -ztol
        if phase == 1:
            below = xb < lo - ftol
            above = xb > hi + ftol
            feas = ~(below | above)
        else:
            below = np.zeros(self.m, dtype=bool)
            above = below
            feas = np.ones(self.m, dtype=bool)
        up_feas = moving_up & feas & np.isfinite(hi)
        theta[up_feas] = (hi[up_feas] - xb[up_feas]) / rate[up_feas]
        target[up_feas] = AT_UB
        dn_feas = moving_dn & feas & np.isfinite(lo)
        theta[dn_feas] = (lo[dn_feas] - xb[dn_feas]) / rate[dn_feas]
        target[dn_feas] = AT_LB
        if phase == 1:
            up_below = moving_up & below
            theta[up_below] = (lo[up_below] - xb[up_below]) / rate[up_below]
            target[up_below] = AT_LB
            dn_above = moving_dn & above
            theta[dn_above] = (hi[dn_above] - xb[dn_above]) / rate[dn_above]
            target[dn_above] = AT_UB
        np.maximum(theta, 0.0, out=theta)

        span = self.arr.ub[q] - self.arr.lb[q]
        self_theta = span if np.isfinite(span) else np.inf
        t_min = min(float(theta.min()) if self.m else np.inf, self_theta)
        if not np.isfinite(t_min):
            return np.inf, -2, AT_LB
        cut = t_min + max(1e-12, 1e-9 * t_min)
        cand = np.flatnonzero(theta <= cut)
        if cand.size:
            # among near-tied blockers prefer the largest pivot magnitude
            r = int(cand[np.argmax(np.abs(rate[cand]))])
            if self_theta < theta[r] - 1e-12:
                return self_theta, -1, AT_LB
            return float(theta[r]), r, target[r]
        return self_theta, -1, AT_LB

    # -- pivoting ----------------------------------------------------------

    def _apply_step(self, q, direction, w, theta):
        if theta != 0.0:
            self.x[self.basis] -= theta * direction * w
            self.x[q] += theta * direction

    def _pivot(self, q, r, w, target):
        leaving = self.basis[r]
        bound = self.arr.ub[leaving] if target == AT_UB else self.arr.lb[leaving]
        self.x[leaving] = bound
        self.vstat[leaving] = target
        self.basis[r] = q
        self.vstat[q] = BASIC
        pivot = w[r]
        v = w.copy()
        v[r] -= 1.0
        v /= pivot
        self.etas.append((r, v))
        if len(self.etas) >= self.opts.refactor_every or abs(pivot) < 1e-6:
            self._refactor_or_restart()

    def _refactor_or_restart(self) -> None:
        try:
            self._factorize()
        except np.linalg.LinAlgError:
            # drift produced a (near-)singular basis: restart from logicals
            self._cold_start()

    # -- main loop ----------------------------------------------------------

    def _solve_box_only(self) -> CoreResult:
        """No rows: minimize each variable against its own bounds."""
        arr = self.arr
        for j in range(self.n):
            cj = arr.c[j]
            if cj > 0.0:
                if not np.isfinite(arr.lb[j]):
                    cert = {"kind": "ray", "var": j, "direction": -1}
                    return CoreResult("UNBOUNDED", self.x[: self.n].copy(), -np.inf,
                                      certificate=cert)
                self.x[j] = arr.lb[j]
            elif cj < 0.0:
                if not np.isfinite(arr.ub[j]):
                    cert = {"kind": "ray", "var": j, "direction": 1}
                    return CoreResult("UNBOUNDED", self.x[: self.n].copy(), -np.inf,
                                      certificate=cert)
                self.x[j] = arr.ub[j]
            else:
                self.x[j] = arr.lb[j] if np.isfinite(arr.lb[j]) else (
                    arr.ub[j] if np.isfinite(arr.ub[j]) else 0.0)
        obj = float(arr.c[: self.n] @ self.x[: self.n])
        return CoreResult("OPTIMAL", self.x[: self.n].copy(), obj,
                          duals=np.zeros(0), reduced=arr.c.copy(),
                          basis=np.zeros(0, dtype=int),
                          vstat=np.full(self.total, AT_LB, dtype=np.int8))

    def run(self) -> CoreResult:
        opts = self.opts
        gap_box = self.arr.lb - self.arr.ub
        if np.any(gap_box > opts.feas_tol):
            # empty variable box (typical for crossed branching bounds)
            j = int(np.argmax(gap_box))
            cert = {"kind": "bound", "var": j, "infeasibility": float(gap_box[j])}
            return self._result("INFEASIBLE", certificate=cert)
        if self.m == 0:
            return self._solve_box_only()
        cleanups = 0
        while True:
            if self.iterations >= opts.iter_limit:
                return self._result("ITERATION_LIMIT")
            gamma, infeas = self._infeasibility()
            phase = 1 if infeas > 0.0 else 2
            if phase == 1:
                y = self._btran(gamma)
            else:
                y = self._btran(self.arr.c[self.basis])
            d = self._reduced_costs(y, phase)
            pick = self._select_entering(d)
            if pick is None:
                if phase == 1:
                    cert = {"kind": "farkas", "row": int(np.argmax(np.abs(y))),
                            "dual": y.copy(), "infeasibility": infeas}
                    return self._result("INFEASIBLE", duals=y, reduced=d, certificate=cert)
                # clean refactorization, then confirm optimality once more
                if self.etas and cleanups < 5:
                    cleanups += 1
                    self._refactor_or_restart()
                    continue
                return self._result("OPTIMAL", duals=y, reduced=d)
            q, direction = pick
            w = self._ftran_column(q)
            theta, r, target = self._ratio_test(q, direction, w, phase)
            if r == -2:
                if phase == 1:
                    # the composite objective is bounded below; a missing block
                    # means numerical trouble -- refactorize and retry
                    if cleanups < 5:
                        cleanups += 1
                        self._refactor_or_restart()
                        continue
                    return self._result("ITERATION_LIMIT")
                cert = {"kind": "ray", "var": int(q), "direction": int(direction)}
                return self._result("UNBOUNDED", certificate=cert)
            self.iterations += 1
            self.degen_streak = self.degen_streak + 1 if theta <= 1e-9 else 0
            if self.degen_streak > opts.bland_after:
                self.bland = True
            elif self.degen_streak == 0:
                self.bland = False
            self._apply_step(q, direction, w, theta)
            if r == -1:
                self.vstat[q] = AT_UB if self.vstat[q] == AT_LB else AT_LB
                self.x[q] = self.arr.ub[q] if self.vstat[q] == AT_UB else self.arr.lb[q]
            else:
                self._pivot(q, r, w, target)

    def _result(self, status, duals=None, reduced=None, certificate=None) -> CoreResult:
        obj = float(self.arr.c[: self.n] @ self.x[: self.n])
        basis = self.basis.copy() if self.m else np.zeros(0, dtype=int)
        vstat = self.vstat.copy() if self.m else np.full(self.total, AT_LB, dtype=np.int8)
        return CoreResult(status, self.x[: self.n].copy(), obj, duals=duals,
                          reduced=reduced, basis=basis,
                          vstat=vstat, iterations=self.iterations,
                          certificate=certificate)


def solve_core(arr: Arrays, options: SolverOptions | None = None,
               warm: tuple[np.ndarray, np.ndarray] | None = None) -> CoreResult:
    return _Simplex(arr, options or SolverOptions(), warm).run()


def solve_lp(problem: MilpProblem, options: SolverOptions | None = None,
             warm_basis: tuple[np.ndarray, np.ndarray] | None = None) -> MilpSolution:
    """Solve the LP relaxation of `problem` (integrality ignored)."""
    problem.validate()
    arr = expand(problem)
    res = solve_core(arr, options, warm_basis)
    return MilpSolution(
        status=res.status,
        values=res.x,
        objective=res.objective,
        gap=0.0 if res.status == "OPTIMAL" else np.inf,
        node_count=0,
        iterations=res.iterations,
        duals=res.duals,
        reduced_costs=res.reduced,
        basis=(res.basis, res.vstat),
        certificate=res.certificate,
    )
