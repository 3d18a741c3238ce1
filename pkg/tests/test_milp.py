import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from mgsched.solver import MilpOptions, ProblemBuilder, solve_lp, solve_milp


def _knapsack():
    b = ProblemBuilder()
    a = b.add_var("a", 0, 1, integer=True, obj=-5.0)
    bb = b.add_var("b", 0, 1, integer=True, obj=-4.0)
    c = b.add_var("c", 0, 1, integer=True, obj=-3.0)
    b.add_row({a: 2.0, bb: 3.0, c: 1.0}, "<=", 4.0, name="weight")
    return b.build(), (a, bb, c)


def test_small_knapsack():
    problem, (a, bb, c) = _knapsack()
    res = solve_milp(problem)
    assert res.status == "OPTIMAL"
    assert res.objective == pytest.approx(-8.0, abs=1e-9)
    assert res.values[a] == pytest.approx(1.0, abs=1e-6)
    assert res.values[bb] == pytest.approx(0.0, abs=1e-6)
    assert res.values[c] == pytest.approx(1.0, abs=1e-6)


def test_all_continuous_collapses_to_lp():
    b = ProblemBuilder()
    x = b.add_var("x", 0.0, 4.0, obj=-1.0)
    y = b.add_var("y", 0.0, 4.0, obj=-2.0)
    b.add_row({x: 1.0, y: 1.0}, "<=", 5.0)
    problem = b.build()
    milp = solve_milp(problem)
    lp = solve_lp(problem)
    assert milp.status == lp.status == "OPTIMAL"
    assert milp.objective == pytest.approx(lp.objective, abs=1e-9)
    assert milp.node_count <= 1


def test_fractional_equality_on_binary_is_infeasible():
    b = ProblemBuilder()
    y = b.add_var("y", 0, 1, integer=True)
    b.add_row({y: 1.0}, "=", 0.5)
    assert solve_milp(b.build()).status == "INFEASIBLE"


def test_integralness_of_returned_solution():
    problem, _ = _knapsack()
    res = solve_milp(problem)
    for j in problem.integer_indices():
        assert abs(res.values[j] - round(res.values[j])) <= 1e-6


def _random_milp(rng, n_bin, n_cont, m):
    b = ProblemBuilder()
    cols = []
    for j in range(n_bin):
        cols.append(b.add_var(f"b{j}", 0, 1, integer=True,
                              obj=float(np.round(rng.uniform(-3, 3), 2))))
    for j in range(n_cont):
        cols.append(b.add_var(f"x{j}", 0.0, float(rng.uniform(1, 4)),
                              obj=float(np.round(rng.uniform(-2, 2), 2))))
    n = len(cols)
    x0 = rng.uniform(0, 1, n)
    for i in range(m):
        coef = np.round(rng.uniform(-2, 2, n), 2)
        keep = rng.uniform(0, 1, n) < 0.7
        coef[~keep] = 0.0
        if not keep.any():
            continue
        slack = float(rng.uniform(0.2, 1.5))
        b.add_row({j: float(coef[j]) for j in range(n) if coef[j]},
                  "<=", float(coef @ x0 + slack))
    return b.build()


def _enumerate_oracle(problem):
    """Try every binary assignment; solve the continuous remainder with an
    independent LP solver."""
    ints = problem.integer_indices()
    cont = [j for j in range(problem.n_vars) if j not in ints]
    best = np.inf
    c = np.array([problem.objective.get(j, 0.0) for j in range(problem.n_vars)])
    for assign in itertools.product((0.0, 1.0), repeat=len(ints)):
        fixed = dict(zip(ints, assign))
        if cont:
            A_ub, b_ub = [], []
            for row in problem.rows:
                base = sum(coef * fixed[j] for j, coef in row.coeffs.items()
                           if j in fixed)
                line = np.zeros(len(cont))
                for k, j in enumerate(cont):
                    line[k] = row.coeffs.get(j, 0.0)
                if row.sense in ("<=", "="):
                    A_ub.append(line); b_ub.append(row.rhs - base)
                if row.sense in (">=", "="):
                    A_ub.append(-line); b_ub.append(base - row.rhs)
            bounds = [(problem.variables[j].lower, problem.variables[j].upper)
                      for j in cont]
            ref = linprog(c[cont], A_ub=np.array(A_ub) if A_ub else None,
                          b_ub=np.array(b_ub) if b_ub else None,
                          bounds=bounds, method="highs")
            if ref.status != 0:
                continue
            val = float(ref.fun) + float(c[ints] @ np.array(assign))
        else:
            ok = True
            for row in problem.rows:
                lhs = sum(coef * fixed[j] for j, coef in row.coeffs.items())
                if row.sense == "<=" and lhs > row.rhs + 1e-9:
                    ok = False
                if row.sense == ">=" and lhs < row.rhs - 1e-9:
                    ok = False
                if row.sense == "=" and abs(lhs - row.rhs) > 1e-9:
                    ok = False
            if not ok:
                continue
            val = float(c[ints] @ np.array(assign))
        best = min(best, val)
    return best


@given(st.integers(0, 10_000))
@settings(max_examples=25)
def test_enumeration_oracle_equivalence(seed):
    rng = np.random.default_rng(seed)
    problem = _random_milp(rng, int(rng.integers(1, 11)),
                           int(rng.integers(0, 4)), int(rng.integers(1, 6)))
    res = solve_milp(problem)
    oracle = _enumerate_oracle(problem)
    if oracle is np.inf:
        assert res.status == "INFEASIBLE"
    else:
        assert res.status == "OPTIMAL"
        scale = max(1.0, abs(oracle))
        assert abs(res.objective - oracle) / scale <= 1e-6


def test_node_limit_returns_incumbent_with_gap():
    rng = np.random.default_rng(99)
    problem = _random_milp(rng, 14, 2, 8)
    full = solve_milp(problem)
    assert full.status == "OPTIMAL"
    capped = solve_milp(problem, MilpOptions(node_limit=2))
    if capped.status != "OPTIMAL":        # may still solve at the root
        assert capped.status == "NODE_LIMIT"
        assert capped.values is not None
        assert capped.gap > 0.0
        assert capped.objective >= full.objective - 1e-9


def test_deterministic_tree():
    rng = np.random.default_rng(4242)
    problem = _random_milp(rng, 9, 2, 5)
    a = solve_milp(problem)
    b = solve_milp(problem)
    assert a.objective == b.objective
    assert a.node_count == b.node_count
    assert np.array_equal(a.values, b.values)


def test_incumbent_hint_preserves_optimum():
    problem, _ = _knapsack()
    first = solve_milp(problem)
    hinted = solve_milp(problem, incumbent_hint=first.values)
    assert hinted.status == "OPTIMAL"
    assert hinted.objective == pytest.approx(first.objective, abs=1e-9)


def test_incumbent_hint_wrong_length_rejected():
    problem, _ = _knapsack()
    with pytest.raises(ValueError):
        solve_milp(problem, incumbent_hint=np.array([1.0]))
