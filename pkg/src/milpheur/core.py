"""Canonical MILP data model: instances, solutions, feasibility checking.

Everything downstream (simplex, branch-and-bound, heuristics, harness)
consumes the immutable :class:`MilpInstance` defined here. The internal
form is always minimization; maximization inputs are negated at parse
time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

INF = math.inf

CONTINUOUS = "continuous"
INTEGER = "integer"
BINARY = "binary"

LE = "<="
GE = ">="
EQ = "="

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
UNCHECKED = "unchecked"

# Default tolerances: absolute + relative on |rhs| for constraint rows,
# absolute distance to the nearest integer for discrete variables.
TOL_FEAS = 1e-7
TOL_INT = 1e-6


class MilpError(Exception):
    """Base class for structural errors in the toolkit."""


class DimensionMismatchError(MilpError):
    """Solution/instance dimensions disagree."""


@dataclass(frozen=True)
class VariableDef:
    name: str
    lower: float = 0.0
    upper: float = INF
    integrality: str = CONTINUOUS

    def __post_init__(self):
        if self.integrality not in (CONTINUOUS, INTEGER, BINARY):
            raise MilpError(f"unknown integrality {self.integrality!r} for {self.name}")
        if self.lower > self.upper:
            raise MilpError(f"variable {self.name}: lower {self.lower} > upper {self.upper}")
        if self.integrality == BINARY and not (self.lower >= 0.0 and self.upper <= 1.0):
            raise MilpError(f"binary variable {self.name} must have bounds within [0, 1]")

    @property
    def is_discrete(self) -> bool:
        return self.integrality != CONTINUOUS


@dataclass(frozen=True)
class LinearConstraint:
    """One linear row ``sum(coef * var) sense rhs``.

    A row carrying ``sos1_group`` is an SOS1 declaration instead: at most
    one of its member variables may be nonzero, and sense/rhs are ignored.
    """

    name: str
    terms: tuple[tuple[int, float], ...]
    sense: str = LE
    rhs: float = 0.0
    sos1_group: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((int(i), float(c)) for i, c in self.terms))
        if self.sense not in (LE, GE, EQ):
            raise MilpError(f"constraint {self.name}: unknown sense {self.sense!r}")
        seen = set()
        for i, _ in self.terms:
            if i in seen:
                raise MilpError(f"constraint {self.name}: duplicate variable index {i}")
            seen.add(i)

    @property
    def is_sos1(self) -> bool:
        return self.sos1_group is not None

    def activity(self, values) -> float:
        return float(sum(c * values[i] for i, c in self.terms))


@dataclass(frozen=True)
class MilpInstance:
    """A minimization MILP: variables, linear rows, sparse objective."""

    name: str
    variables: tuple[VariableDef, ...]
    constraints: tuple[LinearConstraint, ...]
    objective: tuple[tuple[int, float], ...] = ()
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(
            self, "objective", tuple((int(i), float(c)) for i, c in self.objective)
        )
        n = len(self.variables)
        for con in self.constraints:
            for i, _ in con.terms:
                if not 0 <= i < n:
                    raise MilpError(f"constraint {con.name}: variable index {i} out of range")
        for i, _ in self.objective:
            if not 0 <= i < n:
                raise MilpError(f"objective: variable index {i} out of range")

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def n_cons(self) -> int:
        return len(self.constraints)

    def discrete_indices(self) -> list[int]:
        return [i for i, v in enumerate(self.variables) if v.is_discrete]

    def lower_bounds(self) -> np.ndarray:
        return np.array([v.lower for v in self.variables], dtype=float)

    def upper_bounds(self) -> np.ndarray:
        return np.array([v.upper for v in self.variables], dtype=float)

    def objective_vector(self) -> np.ndarray:
        c = np.zeros(self.n_vars)
        for i, coef in self.objective:
            c[i] += coef
        return c

    def linear_rows(self) -> list[LinearConstraint]:
        """Rows that act as linear constraints (SOS1 declarations excluded)."""
        return [c for c in self.constraints if not c.is_sos1]

    def sos1_rows(self) -> list[LinearConstraint]:
        return [c for c in self.constraints if c.is_sos1]

    def variable_index(self, name: str) -> int:
        try:
            return self._name_index[name]
        except AttributeError:
            object.__setattr__(self, "_name_index", {v.name: i for i, v in enumerate(self.variables)})
            return self._name_index[name]


@dataclass(frozen=True)
class Solution:
    """Dense assignment aligned to an instance's variable order."""

    values: tuple[float, ...]
    objective: float
    feasible: str = UNCHECKED

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.feasible not in (FEASIBLE, INFEASIBLE, UNCHECKED):
            raise MilpError(f"bad feasibility state {self.feasible!r}")

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)


@dataclass(frozen=True)
class Violation:
    kind: str  # "constraint" | "bound" | "integrality" | "sos1"
    index: int
    name: str
    amount: float


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    violations: tuple[Violation, ...] = ()

    @property
    def max_violation(self) -> float:
        return max((v.amount for v in self.violations), default=0.0)


def make_solution(inst: MilpInstance, values, feasible: str = UNCHECKED) -> Solution:
    values = tuple(float(v) for v in values)
    if len(values) != inst.n_vars:
        raise DimensionMismatchError(
            f"solution has {len(values)} values, instance {inst.name!r} has {inst.n_vars} variables"
        )
    return Solution(values=values, objective=evaluate_objective(inst, values), feasible=feasible)


def evaluate_objective(inst: MilpInstance, sol) -> float:
    """Objective value ``c.x + offset`` of a solution or raw value vector."""
    values = sol.values if isinstance(sol, Solution) else sol
    if len(values) != inst.n_vars:
        raise DimensionMismatchError(
            f"got {len(values)} values for instance with {inst.n_vars} variables"
        )
    return float(sum(c * values[i] for i, c in inst.objective) + inst.offset)


def check_feasibility(
    inst: MilpInstance,
    sol: Solution,
    tol_feas: float = TOL_FEAS,
    tol_int: float = TOL_INT,
) -> FeasibilityReport:
    """Certify a solution against bounds, rows, integrality, and SOS1 tags.

    Row and bound tolerances are absolute plus relative on the magnitude of
    the rhs/bound; integrality is absolute distance to the nearest integer.
    Returns the full list of violations, not just the first.
    """
    values = sol.values if isinstance(sol, Solution) else sol
    if len(values) != inst.n_vars:
        raise DimensionMismatchError(
            f"solution has {len(values)} values, instance {inst.name!r} has {inst.n_vars}"
        )
    violations: list[Violation] = []

    for j, var in enumerate(inst.variables):
        v = values[j]
        if var.lower != -INF and v < var.lower - tol_feas * (1.0 + abs(var.lower)):
            violations.append(Violation("bound", j, var.name, var.lower - v))
        if var.upper != INF and v > var.upper + tol_feas * (1.0 + abs(var.upper)):
            violations.append(Violation("bound", j, var.name, v - var.upper))
        if var.is_discrete:
            gap = abs(v - round(v))
            if gap > tol_int:
                violations.append(Violation("integrality", j, var.name, gap))

    for k, con in enumerate(inst.constraints):
        if con.is_sos1:
            nonzero = sorted((abs(values[i]) for i, _ in con.terms), reverse=True)
            if len(nonzero) >= 2 and nonzero[1] > tol_int:
                violations.append(Violation("sos1", k, con.name, nonzero[1]))
            continue
        act = con.activity(values)
        allow = tol_feas * (1.0 + abs(con.rhs))
        if con.sense == LE:
            excess = act - con.rhs
        elif con.sense == GE:
            excess = con.rhs - act
        else:
            excess = abs(act - con.rhs)
        if excess > allow:
            violations.append(Violation("constraint", k, con.name, excess))

    return FeasibilityReport(feasible=not violations, violations=tuple(violations))


def certified(inst: MilpInstance, values, tol_feas: float = TOL_FEAS, tol_int: float = TOL_INT) -> Solution:
    """Build a Solution with its feasible flag set from an actual check."""
    sol = make_solution(inst, values)
    report = check_feasibility(inst, sol, tol_feas, tol_int)
    return replace(sol, feasible=FEASIBLE if report.feasible else INFEASIBLE)


def _terms_key(terms):
    return tuple(sorted((i, c) for i, c in terms if c != 0.0))


def semantically_equal(a: MilpInstance, b: MilpInstance) -> bool:
    """Instance equality up to variable reordering (used for round-trips)."""
    if a.n_vars != b.n_vars or a.n_cons != b.n_cons:
        return False
    a_names = [v.name for v in a.variables]
    b_names = [v.name for v in b.variables]
    if sorted(a_names) != sorted(b_names):
        return False
    remap = {i: b.variable_index(name) for i, name in enumerate(a_names)}
    for va in a.variables:
        vb = b.variables[b.variable_index(va.name)]
        if (va.lower, va.upper, va.integrality) != (vb.lower, vb.upper, vb.integrality):
            return False

    def con_key(con, mapping=None):
        terms = [(mapping[i] if mapping else i, c) for i, c in con.terms]
        if con.is_sos1:
            return (con.name, "sos1", _terms_key(terms))
        return (con.name, con.sense, con.rhs, _terms_key(terms))

    a_cons = sorted(con_key(c, remap) for c in a.constraints)
    b_cons = sorted(con_key(c) for c in b.constraints)
    if a_cons != b_cons:
        return False
    a_obj = _terms_key((remap[i], c) for i, c in a.objective)
    return a_obj == _terms_key(b.objective) and a.offset == b.offset
