import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from mgsched.solver import ProblemBuilder, ProblemError, SolverOptions, solve_lp


def test_two_variable_box_maximum():
    b = ProblemBuilder()
    x = b.add_var("x", 0.0, 1.0, obj=-1.0)
    y = b.add_var("y", 0.0, 2.0, obj=-1.0)
    res = solve_lp(b.build())
    assert res.status == "OPTIMAL"
    assert res.objective == pytest.approx(-3.0, abs=1e-9)
    assert res.values[x] == pytest.approx(1.0, abs=1e-9)
    assert res.values[y] == pytest.approx(2.0, abs=1e-9)


def test_contradictory_rows_are_infeasible_with_certificate():
    b = ProblemBuilder()
    x = b.add_var("x", 0.0, 10.0)
    b.add_row({x: 1.0}, ">=", 2.0, name="floor")
    b.add_row({x: 1.0}, "<=", 1.0, name="cap")
    res = solve_lp(b.build())
    assert res.status == "INFEASIBLE"
    assert res.certificate is not None


def test_unbounded_direction_detected():
    b = ProblemBuilder()
    b.add_var("x", 0.0, np.inf, obj=-1.0)
    res = solve_lp(b.build())
    assert res.status == "UNBOUNDED"
    assert res.certificate is not None


def test_negative_and_crossing_bounds():
    b = ProblemBuilder()
    x = b.add_var("x", -5.0, -1.0, obj=1.0)
    y = b.add_var("y", -2.0, 3.0, obj=1.0)
    b.add_row({x: 1.0, y: 1.0}, ">=", -4.0)
    res = solve_lp(b.build())
    assert res.status == "OPTIMAL"
    # x wants its floor; y picks up the row slack
    assert res.values[x] + res.values[y] >= -4.0 - 1e-7
    assert res.objective == pytest.approx(-4.0, abs=1e-8)


def test_nan_coefficient_rejected():
    b = ProblemBuilder()
    x = b.add_var("x", 0.0, 1.0)
    b.add_row({x: np.nan}, "<=", 1.0)
    with pytest.raises(ProblemError):
        solve_lp(b.build())


def test_equality_rows_hold_tight():
    b = ProblemBuilder()
    x = b.add_var("x", 0.0, 10.0, obj=2.0)
    y = b.add_var("y", 0.0, 10.0, obj=3.0)
    b.add_row({x: 1.0, y: 1.0}, "=", 4.0)
    b.add_row({x: 1.0, y: -1.0}, "<=", 1.0)
    res = solve_lp(b.build())
    assert res.status == "OPTIMAL"
    assert res.values[x] + res.values[y] == pytest.approx(4.0, abs=1e-9)
    assert res.objective == pytest.approx(2 * 2.5 + 3 * 1.5, abs=1e-7)


def _random_instance(rng, n, m):
    """Feasible-by-construction box LP: rows pass through a sampled point."""
    lo = rng.uniform(-3, 0, n)
    hi = lo + rng.uniform(0.5, 4, n)
    x0 = rng.uniform(lo, hi)
    A = np.round(rng.uniform(-2, 2, (m, n)), 3)
    senses = rng.choice(["<=", ">=", "="], m, p=[0.5, 0.3, 0.2])
    rhs = A @ x0
    rhs[senses == "<="] += rng.uniform(0.1, 1.0, (senses == "<=").sum())
    rhs[senses == ">="] -= rng.uniform(0.1, 1.0, (senses == ">=").sum())
    c = np.round(rng.uniform(-1, 1, n), 3)
    return lo, hi, A, senses, rhs, c


def _build(lo, hi, A, senses, rhs, c):
    b = ProblemBuilder()
    for j in range(len(lo)):
        b.add_var(f"x{j}", lo[j], hi[j], obj=c[j])
    for i in range(len(rhs)):
        b.add_row({j: A[i, j] for j in range(len(lo)) if A[i, j]},
                  str(senses[i]), float(rhs[i]))
    return b.build()


def _linprog_reference(lo, hi, A, senses, rhs, c):
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for i, s in enumerate(senses):
        if s == "<=":
            A_ub.append(A[i]); b_ub.append(rhs[i])
        elif s == ">=":
            A_ub.append(-A[i]); b_ub.append(-rhs[i])
        else:
            A_eq.append(A[i]); b_eq.append(rhs[i])
    return linprog(c, A_ub=np.array(A_ub) if A_ub else None,
                   b_ub=np.array(b_ub) if b_ub else None,
                   A_eq=np.array(A_eq) if A_eq else None,
                   b_eq=np.array(b_eq) if b_eq else None,
                   bounds=list(zip(lo, hi)), method="highs")


@given(st.integers(0, 10_000))
@settings(max_examples=60)
def test_matches_reference_solver_on_random_instances(seed):
    rng = np.random.default_rng(seed)
    n, m = int(rng.integers(2, 8)), int(rng.integers(1, 7))
    inst = _random_instance(rng, n, m)
    res = solve_lp(_build(*inst))
    ref = _linprog_reference(*inst)
    assert ref.status == 0, "generator promised feasibility"
    assert res.status == "OPTIMAL"
    assert res.objective == pytest.approx(ref.fun, abs=2e-6)


@given(st.integers(0, 10_000))
@settings(max_examples=40)
def test_primal_feasibility_and_duality_gap(seed):
    rng = np.random.default_rng(seed)
    n, m = int(rng.integers(2, 9)), int(rng.integers(1, 8))
    lo, hi, A, senses, rhs, c = _random_instance(rng, n, m)
    problem = _build(lo, hi, A, senses, rhs, c)
    res = solve_lp(problem)
    assert res.status == "OPTIMAL"
    x = res.values[:n]
    assert np.all(x >= lo - 1e-7) and np.all(x <= hi + 1e-7)
    lhs = A @ x
    for i, s in enumerate(senses):
        if s == "<=":
            assert lhs[i] <= rhs[i] + 1e-7
        elif s == ">=":
            assert lhs[i] >= rhs[i] - 1e-7
        else:
            assert lhs[i] == pytest.approx(rhs[i], abs=1e-7)
    # weak duality gap closes at the optimum: c'x = y'b + bound terms
    y = res.duals[:m]
    reduced = np.array([c[j] - A[:, j] @ y for j in range(n)])
    bound_term = sum(r * (lo[j] if r > 0 else hi[j])
                     for j, r in enumerate(reduced) if abs(r) > 1e-9)
    assert res.objective == pytest.approx(float(y @ rhs + bound_term), abs=1e-6)


def test_rerun_is_bit_identical():
    rng = np.random.default_rng(7)
    inst = _random_instance(rng, 6, 5)
    a = solve_lp(_build(*inst))
    b = solve_lp(_build(*inst))
    assert a.status == b.status == "OPTIMAL"
    assert a.iterations == b.iterations
    assert np.array_equal(a.values, b.values)


def test_warm_basis_reaches_same_optimum():
    rng = np.random.default_rng(21)
    inst = _random_instance(rng, 7, 5)
    problem = _build(*inst)
    cold = solve_lp(problem)
    warm = solve_lp(problem, warm_basis=cold.basis)
    assert warm.status == "OPTIMAL"
    assert warm.objective == pytest.approx(cold.objective, abs=1e-9)
    assert warm.iterations <= cold.iterations


def test_iteration_limit_reported():
    rng = np.random.default_rng(3)
    inst = _random_instance(rng, 8, 7)
    res = solve_lp(_build(*inst), SolverOptions(iter_limit=1))
    assert res.status == "ITERATION_LIMIT"
