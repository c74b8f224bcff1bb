"""Branch-and-bound MIP kernel and the declarative sub-MIP builder.

The kernel is deliberately small: node LPs from the bounded simplex,
best-bound node selection with depth-first plunging until a first
incumbent exists, most-fractional branching, and two-way SOS1 branching
(each child zeroes half the group). No cuts, no presolve. All heuristic
modules funnel their "solve a sub-MIP" steps through here.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

from .core import (
    CONTINUOUS,
    INF,
    TOL_INT,
    FEASIBLE,
    LinearConstraint,
    MilpError,
    MilpInstance,
    Solution,
    VariableDef,
    certified,
    check_feasibility,
    evaluate_objective,
    make_solution,
)
from .simplex import LP_INFEASIBLE, OPTIMAL, UNBOUNDED, Limits, solve_lp

BNB_OPTIMAL = "optimal"
BNB_FEASIBLE_LIMIT = "feasible_limit"
BNB_INFEASIBLE = "infeasible"
BNB_NO_SOLUTION_LIMIT = "no_solution_limit"


@dataclass(frozen=True)
class SubMipSpec:
    """Fix/relax/drop recipe turning a parent MILP into a neighborhood MIP."""

    fixings: tuple[tuple[int, float], ...] = ()
    relaxations: frozenset[int] = frozenset()
    dropped_constraints: frozenset[int] = frozenset()
    extra_constraints: tuple[LinearConstraint, ...] = ()
    objective_override: tuple[tuple[tuple[int, float], ...], float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "fixings", tuple((int(i), float(v)) for i, v in self.fixings))
        object.__setattr__(self, "relaxations", frozenset(int(i) for i in self.relaxations))
        object.__setattr__(
            self, "dropped_constraints", frozenset(int(i) for i in self.dropped_constraints)
        )


def build_submip(parent: MilpInstance, spec: SubMipSpec) -> MilpInstance:
    """Apply a SubMipSpec: collapse fixed bounds, relax, drop, append."""
    n = parent.n_vars
    for i, value in spec.fixings:
        if not 0 <= i < n:
            raise MilpError(f"fixing index {i} out of range")
        var = parent.variables[i]
        if value < var.lower - 1e-9 or value > var.upper + 1e-9:
            raise MilpError(f"fixing {var.name}={value} outside bounds [{var.lower}, {var.upper}]")
        if var.is_discrete and abs(value - round(value)) > TOL_INT:
            raise MilpError(f"fixing discrete {var.name} to non-integer {value}")
    for i in spec.relaxations:
        if not 0 <= i < n:
            raise MilpError(f"relaxation index {i} out of range")
    for i in spec.dropped_constraints:
        if not 0 <= i < parent.n_cons:
            raise MilpError(f"dropped constraint index {i} out of range")

    variables = list(parent.variables)
    for i, value in spec.fixings:
        var = variables[i]
        if var.is_discrete:
            value = float(round(value))
        variables[i] = VariableDef(var.name, value, value, var.integrality)
    for i in spec.relaxations:
        var = variables[i]
        variables[i] = VariableDef(var.name, var.lower, var.upper, CONTINUOUS)
    constraints = [
        con for k, con in enumerate(parent.constraints) if k not in spec.dropped_constraints
    ]
    constraints.extend(spec.extra_constraints)
    objective, offset = (
        spec.objective_override if spec.objective_override is not None
        else (parent.objective, parent.offset)
    )
    return MilpInstance(
        name=f"{parent.name}#sub",
        variables=tuple(variables),
        constraints=tuple(constraints),
        objective=tuple(objective),
        offset=float(offset),
    )


@dataclass(frozen=True)
class BnbResult:
    status: str
    incumbent: Solution | None
    dual_bound: float
    nodes: int
    wall_time: float
    iterations: int = 0

    @property
    def objective(self) -> float:
        return self.incumbent.objective if self.incumbent is not None else INF


@dataclass
class _Node:
    bound: float
    depth: int
    seq: int
    lo_overrides: dict[int, float] = field(default_factory=dict)
    hi_overrides: dict[int, float] = field(default_factory=dict)
    zeroed: frozenset[int] = frozenset()
    warm: tuple[str, ...] | None = None


def _node_instance(inst: MilpInstance, node: _Node) -> MilpInstance:
    if not node.lo_overrides and not node.hi_overrides and not node.zeroed:
        return inst
    variables = list(inst.variables)
    for j, lo in node.lo_overrides.items():
        v = variables[j]
        variables[j] = VariableDef(v.name, lo, v.upper, v.integrality)
    for j, hi in node.hi_overrides.items():
        v = variables[j]
        variables[j] = VariableDef(v.name, v.lower, hi, v.integrality)
    for j in node.zeroed:
        v = variables[j]
        lo = min(max(v.lower, 0.0), 0.0)
        variables[j] = VariableDef(v.name, 0.0 if v.lower <= 0.0 <= v.upper else v.lower, 0.0 if v.lower <= 0.0 <= v.upper else v.lower, v.integrality)
    return replace(inst, variables=tuple(variables))


def _fractional_discrete(inst, values, tol=TOL_INT):
    worst_j, worst_frac = None, tol
    for j in inst.discrete_indices():
        frac = abs(values[j] - round(values[j]))
        score = 0.5 - abs(frac - 0.5)  # distance-to-integer folded at 0.5
        if frac > tol and score > worst_frac + 1e-15:
            worst_j, worst_frac = j, score
        elif frac > tol and worst_j is None:
            worst_j, worst_frac = j, score
    return worst_j


def _violated_sos1(inst, values, tol=TOL_INT):
    for k, con in enumerate(inst.constraints):
        if not con.is_sos1:
            continue
        nz = [(abs(values[i]), i) for i, _ in con.terms if abs(values[i]) > tol]
        if len(nz) >= 2:
            return con
    return None


def _snap(inst: MilpInstance, values) -> list[float]:
    snapped = list(values)
    for j in inst.discrete_indices():
        snapped[j] = float(round(snapped[j]))
    return snapped


def solve_bnb(
    inst: MilpInstance,
    limits: Limits | None = None,
    start: Solution | None = None,
    gap_limit: float = 1e-6,
    on_incumbent=None,
) -> BnbResult:
    """Branch-and-bound search for a minimization MILP.

    ``start`` must pass check_feasibility (it is re-checked here) and is
    used for pruning from the first node on. ``on_incumbent(solution,
    nodes)`` fires whenever a strictly better incumbent is certified. The
    search is deterministic: ties break on variable index and insertion
    order, never randomly.
    """
    limits = limits or Limits()
    t0 = time.perf_counter()

    incumbent: Solution | None = None
    if start is not None:
        report = check_feasibility(inst, start)
        if not report.feasible:
            raise MilpError("starting solution is infeasible")
        incumbent = replace(start, feasible=FEASIBLE)

    root = _Node(bound=-INF, depth=0, seq=0)
    open_nodes: list[_Node] = [root]
    nodes_done = 0
    lp_iterations = 0
    seq = 1
    proven_infeasible_everywhere = True

    def out_of_budget() -> bool:
        if limits.max_nodes is not None and nodes_done >= limits.max_nodes:
            return True
        if limits.time_limit is not None and time.perf_counter() - t0 > limits.time_limit:
            return True
        return False

    def current_gap() -> float:
        if incumbent is None or not open_nodes:
            return INF if incumbent is None else 0.0
        dual = min(n.bound for n in open_nodes)
        return (incumbent.objective - dual) / max(1.0, abs(incumbent.objective))

    def finish(status: str) -> BnbResult:
        if open_nodes:
            dual = min(n.bound for n in open_nodes)
            if dual == -INF:
                dual = -INF if incumbent is None else min(incumbent.objective, -INF)
        else:
            dual = incumbent.objective if incumbent is not None else INF
        if incumbent is not None and dual > incumbent.objective:
            dual = incumbent.objective
        return BnbResult(
            status=status,
            incumbent=incumbent,
            dual_bound=dual,
            nodes=nodes_done,
            wall_time=time.perf_counter() - t0,
            iterations=lp_iterations,
        )

    while open_nodes:
        if out_of_budget():
            return finish(BNB_FEASIBLE_LIMIT if incumbent else BNB_NO_SOLUTION_LIMIT)
        if incumbent is not None and current_gap() <= gap_limit:
            open_nodes.clear()
            return finish(BNB_OPTIMAL)

        if incumbent is None:
            pick = max(range(len(open_nodes)), key=lambda i: (open_nodes[i].depth, open_nodes[i].seq))
        else:
            pick = min(range(len(open_nodes)), key=lambda i: (open_nodes[i].bound, open_nodes[i].seq))
        node = open_nodes.pop(pick)
        if incumbent is not None and node.bound >= incumbent.objective - 1e-12:
            continue

        sub = _node_instance(inst, node)
        lp = solve_lp(sub, warm_basis=node.warm, limits=Limits(time_limit=limits.time_limit))
        nodes_done += 1
        lp_iterations += lp.iterations
        if lp.status == UNBOUNDED:
            raise MilpError(f"LP relaxation of {inst.name!r} is unbounded")
        if lp.status == LP_INFEASIBLE:
            continue
        if lp.status != OPTIMAL:
            # numerical trouble or node-level limit: drop the node honestly
            proven_infeasible_everywhere = False
            continue
        proven_infeasible_everywhere = proven_infeasible_everywhere and True
        if incumbent is not None and lp.objective >= incumbent.objective - 1e-12:
            continue

        branch_j = _fractional_discrete(sub, lp.values)
        sos_con = _violated_sos1(sub, lp.values) if branch_j is None else None

        if branch_j is None and sos_con is None:
            candidate = _snap(inst, lp.values)
            sol = certified(inst, candidate)
            if sol.feasible != FEASIBLE:
                sol = _restore_continuous(inst, candidate)
            if sol is not None and sol.feasible == FEASIBLE and (
                incumbent is None or sol.objective < incumbent.objective - 1e-12
            ):
                incumbent = sol
                if on_incumbent is not None:
                    on_incumbent(incumbent, nodes_done)
            continue

        if branch_j is not None:
            value = lp.values[branch_j]
            floor_node = _Node(
                bound=lp.objective,
                depth=node.depth + 1,
                seq=seq,
                lo_overrides=dict(node.lo_overrides),
                hi_overrides={**node.hi_overrides, branch_j: math.floor(value)},
                zeroed=node.zeroed,
                warm=lp.basis,
            )
            ceil_node = _Node(
                bound=lp.objective,
                depth=node.depth + 1,
                seq=seq + 1,
                lo_overrides={**node.lo_overrides, branch_j: math.ceil(value)},
                hi_overrides=dict(node.hi_overrides),
                zeroed=node.zeroed,
                warm=lp.basis,
            )
            seq += 2
            # plunge toward the nearer integer first (explored last-in)
            if value - math.floor(value) <= 0.5:
                open_nodes.extend([ceil_node, floor_node])
            else:
                open_nodes.extend([floor_node, ceil_node])
        else:
            members = [i for i, _ in sos_con.terms]
            active = [i for i in members if abs(lp.values[i]) > TOL_INT]
            half = max(1, len(active) // 2)
            left_zero = frozenset(active[:half])
            right_zero = frozenset(active[half:])
            for zero_set in (left_zero, right_zero):
                child = _Node(
                    bound=lp.objective,
                    depth=node.depth + 1,
                    seq=seq,
                    lo_overrides={**node.lo_overrides, **{j: 0.0 for j in zero_set}},
                    hi_overrides={**node.hi_overrides, **{j: 0.0 for j in zero_set}},
                    zeroed=node.zeroed | zero_set,
                    warm=lp.basis,
                )
                seq += 1
                open_nodes.append(child)

    if incumbent is None:
        return finish(BNB_INFEASIBLE)
    return finish(BNB_OPTIMAL)


def _restore_continuous(inst: MilpInstance, snapped) -> Solution | None:
    """Re-solve continuous variables with all discrete ones pinned."""
    fixings = tuple((j, snapped[j]) for j in inst.discrete_indices())
    try:
        pinned = build_submip(inst, SubMipSpec(fixings=fixings))
    except MilpError:
        return None
    lp = solve_lp(pinned)
    if lp.status != OPTIMAL:
        return None
    return certified(inst, lp.values)
