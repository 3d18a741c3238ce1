"""Best-first branch-and-bound with depth-first plunging on top of the
bounded-variable simplex."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .problem import MilpProblem, MilpSolution
from .simplex import SolverOptions, expand, solve_core


@dataclass
class MilpOptions:
    gap_tol: float = 1e-6
    int_tol: float = 1e-6
    node_limit: int = 100_000
    heuristic_every: int = 40
    lp: SolverOptions = field(default_factory=SolverOptions)


def _pick_branch(x, int_idx, int_tol):
    """First fractional integer variable in column order; None when integral.

    Static order beats most-fractional here because builders lay out
    binaries in decision order (commitments before bookkeeping indicators
    such as storage modes); branching the early ones moves the bound, while
    an epsilon-cost indicator splits the tree without moving anything.
    """
    vals = x[int_idx]
    frac = vals - np.floor(vals)
    dist = np.minimum(frac, 1.0 - frac)
    cand = np.flatnonzero(dist > int_tol)
    if cand.size == 0:
        return None
    return int(int_idx[int(cand[0])])


def solve_milp(problem: MilpProblem, options: MilpOptions | None = None,
               warm_basis=None, incumbent_hint=None) -> MilpSolution:
    """Branch-and-bound MILP solve.

    Node selection is best-first on the parent relaxation bound, but each
    popped node is plunged depth-first (the child nearest the fractional
    value is solved immediately, the sibling queued) until it prunes, which
    finds incumbents early.  A fix-and-resolve rounding heuristic runs at the
    root and periodically afterwards.  Children warm-start the simplex from
    the parent basis.  On node-limit exhaustion the incumbent is returned
    with its optimality gap.

    `incumbent_hint` is a full values vector from a related solve (same
    columns); its integer pattern is fixed and re-solved to seed the
    incumbent before any branching.
    """
    opts = options or MilpOptions()
    problem.validate()
    arr = expand(problem)
    int_idx = np.flatnonzero(arr.integer_mask)
    base_lb = arr.lb.copy()
    base_ub = arr.ub.copy()

    def node_solve(changes: dict[int, tuple[float, float]], warm):
        arr.lb = base_lb.copy()
        arr.ub = base_ub.copy()
        for j, (lo, hi) in changes.items():
            arr.lb[j], arr.ub[j] = lo, hi
        return solve_core(arr, opts.lp, warm)

    root = node_solve({}, warm_basis)
    total_iters = root.iterations
    if root.status in ("INFEASIBLE", "UNBOUNDED", "ITERATION_LIMIT") or int_idx.size == 0:
        return MilpSolution(
            status=root.status, values=root.x, objective=root.objective,
            gap=0.0 if root.status == "OPTIMAL" else np.inf,
            node_count=1, iterations=total_iters, duals=root.duals,
            reduced_costs=root.reduced, basis=(root.basis, root.vstat),
            certificate=root.certificate)

    incumbent = None
    incumbent_obj = np.inf
    counter = 0
    heap: list = []
    node_count = 1
    status = "OPTIMAL"

    def push(bound, changes, warm):
        nonlocal counter
        heapq.heappush(heap, (bound, counter, changes, warm))
        counter += 1

    def accept(res):
        nonlocal incumbent, incumbent_obj
        if res.objective < incumbent_obj - 1e-12:
            incumbent = res
            incumbent_obj = res.objective

    def try_rounding(res, changes):
        """Fix integers to rounded relaxation values and re-solve; falls back
        to rounding up, which favours feasibility when binaries gate capacity."""
        nonlocal total_iters, node_count
        for rounder in (np.round, np.ceil):
            fixed = dict(changes)
            for j in int_idx:
                v = float(rounder(res.x[j]))
                lo0, hi0 = fixed.get(j, (base_lb[j], base_ub[j]))
                v = min(max(v, lo0), hi0)
                fixed[j] = (v, v)
            trial = node_solve(fixed, (res.basis, res.vstat))
            node_count += 1
            total_iters += trial.iterations
            if trial.status == "OPTIMAL":
                accept(trial)
                return

    if incumbent_hint is not None:
        hint = np.asarray(incumbent_hint, dtype=float)
        # slack columns beyond the structural block may differ between related
        # problems; only the structural prefix is read
        if hint.size < len(problem.variables):
            raise ValueError("incumbent hint has wrong length for this problem")
        fixed = {}
        for j in int_idx:
            v = float(np.round(hint[j]))
            fixed[j] = (min(max(v, base_lb[j]), base_ub[j]),) * 2
        trial = node_solve(fixed, (root.basis, root.vstat))
        node_count += 1
        total_iters += trial.iterations
        if trial.status == "OPTIMAL":
            accept(trial)

    try_rounding(root, {})

    current = (root.objective, {}, root)  # plunge start: (bound, changes, solved result)
    while True:
        abs_tol = opts.gap_tol * max(1.0, abs(incumbent_obj))
        if current is None:
            while heap and incumbent is not None and \
                    heap[0][0] >= incumbent_obj - abs_tol:
                heapq.heappop(heap)
            if not heap:
                break
            if node_count >= opts.node_limit:
                status = "ITERATION_LIMIT"
                break
            bound, _, changes, warm = heapq.heappop(heap)
            res = node_solve(changes, warm)
            node_count += 1
            total_iters += res.iterations
            if res.status == "INFEASIBLE":
                continue
            if res.status == "UNBOUNDED":
                return MilpSolution(status="UNBOUNDED", values=res.x, objective=-np.inf,
                                    gap=np.inf, node_count=node_count,
                                    iterations=total_iters, certificate=res.certificate)
            if res.status == "ITERATION_LIMIT":
                push(bound, changes, warm)
                status = "ITERATION_LIMIT"
                break
            current = (res.objective, changes, res)
            continue

        bound, changes, res = current
        current = None
        if incumbent is not None and bound >= incumbent_obj - abs_tol:
            continue
        branch_var = _pick_branch(res.x, int_idx, opts.int_tol)
        if branch_var is None:
            accept(res)
            continue
        if node_count >= opts.node_limit:
            push(bound, changes, (res.basis, res.vstat))
            status = "ITERATION_LIMIT"
            break
        if opts.heuristic_every and node_count % opts.heuristic_every == 0:
            try_rounding(res, changes)
        v = res.x[branch_var]
        lo0, hi0 = changes.get(branch_var, (base_lb[branch_var], base_ub[branch_var]))
        down = dict(changes)
        down[branch_var] = (lo0, np.floor(v))
        up = dict(changes)
        up[branch_var] = (np.ceil(v), hi0)
        warm = (res.basis, res.vstat)
        # dive upward unless clearly near the floor: raising an integer
        # usually relaxes gating constraints, lowering it cuts capacity
        if v - np.floor(v) >= 0.3:
            near, far = up, down
        else:
            near, far = down, up
        push(res.objective, far, warm)
        child = node_solve(near, warm)
        node_count += 1
        total_iters += child.iterations
        if child.status == "INFEASIBLE":
            continue
        if child.status == "UNBOUNDED":
            return MilpSolution(status="UNBOUNDED", values=child.x, objective=-np.inf,
                                gap=np.inf, node_count=node_count,
                                iterations=total_iters, certificate=child.certificate)
        if child.status == "ITERATION_LIMIT":
            push(bound, near, warm)
            status = "ITERATION_LIMIT"
            break
        current = (child.objective, near, child)

    if incumbent is None:
        if status == "ITERATION_LIMIT":
            return MilpSolution(status="ITERATION_LIMIT", values=None, objective=np.inf,
                                gap=np.inf, node_count=node_count, iterations=total_iters)
        return MilpSolution(status="INFEASIBLE", values=None, objective=np.inf,
                            gap=np.inf, node_count=node_count, iterations=total_iters)

    best_bound = min([h[0] for h in heap], default=incumbent_obj)
    best_bound = min(best_bound, incumbent_obj)
    gap = max(0.0, (incumbent_obj - best_bound) / max(1.0, abs(incumbent_obj)))

    # polish: fix integers at the incumbent and re-solve for clean continuous values
    fixed = {int(j): (float(np.round(incumbent.x[j])), float(np.round(incumbent.x[j])))
             for j in int_idx}
    polish = node_solve(fixed, (incumbent.basis, incumbent.vstat))
    total_iters += polish.iterations
    final = polish if polish.status == "OPTIMAL" else incumbent
    values = final.x.copy()
    values[int_idx] = np.round(values[int_idx])
    return MilpSolution(
        status=status, values=values, objective=final.objective,
        gap=gap if status != "OPTIMAL" else min(gap, opts.gap_tol),
        node_count=node_count, iterations=total_iters,
        duals=final.duals, reduced_costs=final.reduced,
        basis=(final.basis, final.vstat))
