import math

import numpy as np
import pytest

from milpheur.core import EQ, GE, LE, INF, LinearConstraint, MilpInstance, VariableDef
from milpheur.simplex import (
    AT_LOWER,
    AT_UPPER,
    BASIC,
    ITERATION_LIMIT,
    LP_INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    Limits,
    solve_lp,
    tableau_dump,
)

from oracles import enumerate_lp_optimum


def lp(name, variables, constraints, objective, offset=0.0):
    return MilpInstance(
        name=name,
        variables=tuple(variables),
        constraints=tuple(constraints),
        objective=tuple(objective),
        offset=offset,
    )


def random_lp(rng, n_vars=5, n_cons=4):
    variables = [VariableDef(f"v{j}", 0.0, float(rng.uniform(1.0, 10.0))) for j in range(n_vars)]
    constraints = []
    for i in range(n_cons):
        terms = [
            (j, float(rng.integers(-5, 6)))
            for j in range(n_vars)
            if rng.random() < 0.8
        ]
        terms = [(j, c) for j, c in terms if c != 0.0] or [(0, 1.0)]
        sense = (LE, GE)[int(rng.integers(0, 2))]
        rhs = float(rng.uniform(-8.0, 12.0))
        constraints.append(LinearConstraint(f"c{i}", tuple(terms), sense, rhs))
    objective = [(j, float(rng.integers(-10, 11))) for j in range(n_vars)]
    return lp(f"rand", variables, constraints, objective)


def test_single_variable_bound():
    inst = lp(
        "one",
        [VariableDef("x", 0.0, 10.0)],
        [LinearConstraint("c", ((0, 1.0),), GE, 1.0)],
        [(0, 1.0)],
    )
    sol = solve_lp(inst)
    assert sol.status == OPTIMAL
    assert sol.values[0] == pytest.approx(1.0)
    assert sol.objective == pytest.approx(1.0)


def test_facet_objective():
    inst = lp(
        "facet",
        [VariableDef("x", 0.0, 1.0), VariableDef("y", 0.0, 1.0)],
        [LinearConstraint("c", ((0, 1.0), (1, 1.0)), LE, 1.0)],
        [(0, -1.0), (1, -1.0)],
    )
    sol = solve_lp(inst)
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(-1.0)


def test_equality_constraint():
    inst = lp(
        "eq",
        [VariableDef("x", 0.0, 5.0), VariableDef("y", 0.0, 5.0)],
        [LinearConstraint("c", ((0, 1.0), (1, 1.0)), EQ, 2.0)],
        [(0, 1.0), (1, 1.0)],
    )
    sol = solve_lp(inst)
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(2.0)


def test_free_variable():
    inst = lp(
        "free",
        [VariableDef("x", -INF, INF)],
        [LinearConstraint("c", ((0, 1.0),), GE, -3.0)],
        [(0, 1.0)],
    )
    sol = solve_lp(inst)
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(-3.0)


def test_infeasible_certificate():
    inst = lp(
        "inf",
        [VariableDef("x", 0.0, 10.0)],
        [
            LinearConstraint("ge", ((0, 1.0),), GE, 2.0),
            LinearConstraint("le", ((0, 1.0),), LE, 1.0),
        ],
        [(0, 1.0)],
    )
    sol = solve_lp(inst)
    assert sol.status == LP_INFEASIBLE
    assert sol.phase1_infeasibility > 0.0


def test_unbounded():
    inst = lp(
        "unb",
        [VariableDef("x", 0.0, INF)],
        [LinearConstraint("c", ((0, 1.0),), GE, 1.0)],
        [(0, -1.0)],
    )
    assert solve_lp(inst).status == UNBOUNDED


def test_no_constraints_trivial():
    inst = lp("triv", [VariableDef("x", -2.0, 7.0)], [], [(0, -1.0)])
    sol = solve_lp(inst)
    assert sol.status == OPTIMAL
    assert sol.values[0] == 7.0 and sol.basis[0] == AT_UPPER


def test_iteration_limit_flagged():
    rng = np.random.default_rng(3)
    inst = random_lp(rng)
    sol = solve_lp(inst, limits=Limits(max_iters=0))
    assert sol.status == ITERATION_LIMIT


def test_matches_vertex_enumeration_oracle():
    rng = np.random.default_rng(42)
    solved = 0
    for _ in range(40):
        inst = random_lp(rng)
        expected = enumerate_lp_optimum(inst)
        sol = solve_lp(inst)
        if expected is None:
            assert sol.status == LP_INFEASIBLE
        else:
            assert sol.status == OPTIMAL
            assert sol.objective == pytest.approx(expected, abs=1e-6)
            solved += 1
    assert solved > 10  # the generator should produce mostly feasible LPs


def _dual_objective(inst, sol):
    """y.b plus reduced-cost value of the nonbasic structural variables."""
    rows = inst.linear_rows()
    y = np.array(sol.duals)
    c = inst.objective_vector()
    d = c.copy()
    for i, con in enumerate(rows):
        for j, coef in con.terms:
            d[j] -= y[i] * coef
    total = float(y @ np.array([con.rhs for con in rows]))
    for j, var in enumerate(inst.variables):
        if sol.basis[j] == AT_LOWER and var.lower != -INF:
            total += d[j] * var.lower
        elif sol.basis[j] == AT_UPPER:
            total += d[j] * var.upper
    return total + inst.offset


def test_weak_duality_identity():
    rng = np.random.default_rng(7)
    checked = 0
    for _ in range(25):
        inst = random_lp(rng)
        sol = solve_lp(inst)
        if sol.status != OPTIMAL:
            continue
        assert _dual_objective(inst, sol) == pytest.approx(sol.objective, abs=1e-6)
        checked += 1
    assert checked > 8


def test_beale_cycling_terminates():
    # Beale's classic degenerate example; Dantzig pricing with fixed
    # tie-breaking cycles on it unless an anti-cycling rule kicks in.
    inst = lp(
        "beale",
        [VariableDef(f"x{j}", 0.0, INF) for j in range(4)],
        [
            LinearConstraint("r1", ((0, 0.25), (1, -60.0), (2, -1 / 25), (3, 9.0)), LE, 0.0),
            LinearConstraint("r2", ((0, 0.5), (1, -90.0), (2, -1 / 50), (3, 3.0)), LE, 0.0),
            LinearConstraint("r3", ((2, 1.0),), LE, 1.0),
        ],
        [(0, -0.75), (1, 150.0), (2, -0.02), (3, 6.0)],
    )
    sol = solve_lp(inst, limits=Limits(max_iters=10000))
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(-0.05, abs=1e-9)


def test_warm_start_after_bound_tightening():
    rng = np.random.default_rng(11)
    compared = 0
    for _ in range(20):
        inst = random_lp(rng)
        sol = solve_lp(inst)
        if sol.status != OPTIMAL:
            continue
        j = int(rng.integers(0, inst.n_vars))
        var = inst.variables[j]
        mid = 0.5 * (var.lower + min(var.upper, var.lower + 4.0))
        tightened = MilpInstance(
            name=inst.name,
            variables=tuple(
                v if k != j else VariableDef(v.name, mid, v.upper) for k, v in enumerate(inst.variables)
            ),
            constraints=inst.constraints,
            objective=inst.objective,
        )
        warm = solve_lp(tightened, warm_basis=sol.basis)
        if warm.status == OPTIMAL:
            assert warm.objective >= sol.objective - 1e-7
            cold = solve_lp(tightened)
            assert warm.objective == pytest.approx(cold.objective, abs=1e-7)
            compared += 1
    assert compared > 5


def test_deterministic_resolve():
    rng = np.random.default_rng(5)
    inst = random_lp(rng)
    a = solve_lp(inst)
    b = solve_lp(inst)
    assert a.values == b.values and a.objective == b.objective


def test_tableau_dump_mentions_rows():
    inst = lp(
        "dump",
        [VariableDef("x", 0.0, 2.0)],
        [LinearConstraint("row0", ((0, 1.0),), LE, 2.0)],
        [(0, 1.0)],
    )
    text = tableau_dump(inst)
    assert "row0" in text and "bounds" in text
