"""Bounded-variable primal simplex on a dense basis inverse.

Two-phase method: phase 1 minimizes a composite infeasibility objective
(sum of artificial columns added only on rows whose slack starts out of
range — no big-M), phase 2 the real costs. Pricing is Dantzig's rule with
a switch to Bland's rule after a run of degenerate pivots, which restores
the termination guarantee on cycling-prone problems. The basis inverse is
updated by eta transformations and periodically refactorized from scratch.

Scale target is desk-size instances (up to a few thousand nonzeros);
nothing here is tuned for large sparse LPs.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .core import EQ, GE, INF, LE, MilpError, MilpInstance, evaluate_objective

OPTIMAL = "optimal"
LP_INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"
NUMERICAL_FAILURE = "numerical_failure"

BASIC = "basic"
AT_LOWER = "at_lower"
AT_UPPER = "at_upper"

PIVOT_TOL = 1e-9
TOL_OPT = 1e-7
_DEGEN_TOL = 1e-10
_STALL_LIMIT = 50
_REFACTOR_EVERY = 64

# internal status codes
_B, _LO, _UP, _FREE = 0, 1, 2, 3


@dataclass(frozen=True)
class Limits:
    """Work caps shared by the LP and MIP kernels."""

    max_iters: int | None = None
    max_nodes: int | None = None
    time_limit: float | None = None


@dataclass(frozen=True)
class LpSolution:
    status: str
    values: tuple[float, ...]
    objective: float
    basis: tuple[str, ...]
    duals: tuple[float, ...]
    iterations: int = 0
    phase1_infeasibility: float = 0.0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _Tableau:
    """Standard-form working state: A x + s = b with bounded columns."""

    def __init__(self, inst: MilpInstance):
        rows = inst.linear_rows()
        n = inst.n_vars
        m = len(rows)
        self.n = n
        self.m = m
        self.A = np.zeros((m, n + m))
        self.b = np.zeros(m)
        self.lo = np.empty(n + m)
        self.hi = np.empty(n + m)
        self.lo[:n] = inst.lower_bounds()
        self.hi[:n] = inst.upper_bounds()
        for i, con in enumerate(rows):
            for j, coef in con.terms:
                self.A[i, j] = coef
            self.A[i, n + i] = 1.0
            self.b[i] = con.rhs
            if con.sense == LE:
                self.lo[n + i], self.hi[n + i] = 0.0, INF
            elif con.sense == GE:
                self.lo[n + i], self.hi[n + i] = -INF, 0.0
            else:
                self.lo[n + i], self.hi[n + i] = 0.0, 0.0
        self.row_names = [con.name for con in rows]


def _initial_nonbasic_value(lo: float, hi: float) -> float:
    if lo != -INF:
        return lo
    if hi != INF:
        return hi
    return 0.0


def _status_for_value(lo: float, hi: float) -> int:
    if lo != -INF:
        return _LO
    if hi != INF:
        return _UP
    return _FREE


class _Solver:
    def __init__(self, tab: _Tableau, costs: np.ndarray, limits: Limits):
        self.tab = tab
        self.A = tab.A
        self.m, self.ncols = tab.A.shape
        self.lo = tab.lo.copy()
        self.hi = tab.hi.copy()
        self.costs = costs
        self.limits = limits
        self.iterations = 0
        self.stall = 0
        self.bland = False
        self.pivots_since_refactor = 0
        self.start_time = time.perf_counter()
        self.failed = False

    # -- basis management --------------------------------------------------
    def set_basis(self, basis: list[int], status: np.ndarray) -> bool:
        """Install a basis; returns False if it is singular."""
        self.basis = list(basis)
        self.status = status
        B = self.A[:, self.basis]
        try:
            self.B_inv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            return False
        if not np.all(np.isfinite(self.B_inv)):
            return False
        self.recompute_basics()
        return True

    def nonbasic_values(self) -> np.ndarray:
        x = np.where(self.status == _UP, self.hi, self.lo)
        x[self.status == _FREE] = 0.0
        x[~np.isfinite(x)] = 0.0
        x[self.status == _B] = 0.0
        return x

    def recompute_basics(self):
        x = self.nonbasic_values()
        self.x_basic = self.B_inv @ (self.tab.b - self.A @ x)

    def refactorize(self) -> bool:
        try:
            self.B_inv = np.linalg.inv(self.A[:, self.basis])
        except np.linalg.LinAlgError:
            return False
        if not np.all(np.isfinite(self.B_inv)):
            return False
        self.recompute_basics()
        self.pivots_since_refactor = 0
        return True

    def full_values(self) -> np.ndarray:
        x = self.nonbasic_values()
        x[self.basis] = self.x_basic
        return x

    # -- pricing -----------------------------------------------------------
    def reduced_costs(self) -> np.ndarray:
        y = self.costs[self.basis] @ self.B_inv
        return self.costs - y @ self.A

    def duals(self) -> np.ndarray:
        return self.costs[self.basis] @ self.B_inv

    def pick_entering(self, d: np.ndarray) -> tuple[int, int] | None:
        """Return (column, direction) or None when optimal."""
        nb = self.status != _B
        fixed = self.lo == self.hi
        up_ok = nb & ~fixed & ((self.status == _LO) | (self.status == _FREE)) & (d < -TOL_OPT)
        dn_ok = nb & ~fixed & ((self.status == _UP) | (self.status == _FREE)) & (d > TOL_OPT)
        any_ok = up_ok | dn_ok
        if not any_ok.any():
            return None
        if self.bland:
            j = int(np.argmax(any_ok))
        else:
            score = np.where(any_ok, np.abs(d), -1.0)
            j = int(np.argmax(score))
        return j, (1 if up_ok[j] else -1)

    # -- ratio test ----------------------------------------------------------
    def ratio_test(self, q: int, direction: int):
        """Max step for entering column q; returns (t, blocking_row or None).

        blocking_row == -1 encodes a bound flip of the entering variable.
        """
        alpha = self.B_inv @ self.A[:, q]
        g = direction * alpha
        t_best = INF
        if self.lo[q] != -INF and self.hi[q] != INF:
            t_best = self.hi[q] - self.lo[q]
        block = -1 if t_best < INF else None

        lob = self.lo[self.basis]
        hib = self.hi[self.basis]
        with np.errstate(divide="ignore", invalid="ignore"):
            t_lo = np.where(g > PIVOT_TOL, (self.x_basic - lob) / g, INF)
            t_hi = np.where(g < -PIVOT_TOL, (hib - self.x_basic) / (-g), INF)
        t_rows = np.minimum(t_lo, t_hi)
        t_rows[~np.isfinite(t_rows)] = INF
        t_rows = np.maximum(t_rows, 0.0)
        if self.m:
            t_min = float(t_rows.min())
            if t_min < t_best - 1e-12:
                candidates = np.flatnonzero(t_rows <= t_min + 1e-12)
                if self.bland:
                    basis_arr = np.asarray(self.basis)
                    block = int(candidates[np.argmin(basis_arr[candidates])])
                else:
                    block = int(candidates[np.argmax(np.abs(alpha[candidates]))])
                t_best = max(t_min, 0.0)
        return t_best, block, alpha

    # -- pivot loop ----------------------------------------------------------
    def hit_limits(self) -> bool:
        if self.limits.max_iters is not None and self.iterations >= self.limits.max_iters:
            return True
        if (
            self.limits.time_limit is not None
            and self.iterations % 128 == 0
            and time.perf_counter() - self.start_time > self.limits.time_limit
        ):
            return True
        return False

    def run(self) -> str:
        while True:
            if self.hit_limits():
                return ITERATION_LIMIT
            d = self.reduced_costs()
            pick = self.pick_entering(d)
            if pick is None:
                return OPTIMAL
            q, direction = pick
            t, block, alpha = self.ratio_test(q, direction)
            if block is None and t == INF:
                return UNBOUNDED
            self.iterations += 1
            if block == -1:
                # bound flip: entering variable crosses to its other bound
                self.x_basic -= t * direction * alpha
                self.status[q] = _UP if self.status[q] == _LO else _LO
                self._note_progress(t)
                continue
            if abs(alpha[block]) < PIVOT_TOL:
                if self.pivots_since_refactor and self.refactorize():
                    continue
                self.failed = True
                return NUMERICAL_FAILURE
            entering_value = self._entry_value(q) + direction * t
            leaving = self.basis[block]
            g = direction * alpha[block]
            self.x_basic -= t * direction * alpha
            # eta update of the basis inverse
            br = self.B_inv[block, :] / alpha[block]
            self.B_inv -= np.outer(alpha, br)
            self.B_inv[block, :] = br
            self.basis[block] = q
            self.x_basic[block] = entering_value
            self.status[q] = _B
            self.status[leaving] = _LO if g > 0 else _UP
            if self.lo[leaving] == self.hi[leaving]:
                self.status[leaving] = _LO
            self._note_progress(t)
            self.pivots_since_refactor += 1
            if self.pivots_since_refactor >= _REFACTOR_EVERY:
                if not self.refactorize():
                    self.failed = True
                    return NUMERICAL_FAILURE

    def _entry_value(self, q: int) -> float:
        if self.status[q] == _LO:
            return self.lo[q]
        if self.status[q] == _UP:
            return self.hi[q]
        return 0.0

    def _note_progress(self, t: float):
        if t <= _DEGEN_TOL:
            self.stall += 1
            if self.stall >= _STALL_LIMIT:
                self.bland = True
        else:
            self.stall = 0
            self.bland = False


def _solve_trivial(inst: MilpInstance, c: np.ndarray) -> LpSolution:
    """No linear rows: each variable sits at its cheapest bound."""
    values = []
    basis = []
    for j, var in enumerate(inst.variables):
        if c[j] > 0:
            if var.lower == -INF:
                return LpSolution(UNBOUNDED, (), -INF, (), ())
            values.append(var.lower)
            basis.append(AT_LOWER)
        elif c[j] < 0:
            if var.upper == INF:
                return LpSolution(UNBOUNDED, (), -INF, (), ())
            values.append(var.upper)
            basis.append(AT_UPPER)
        else:
            v = _initial_nonbasic_value(var.lower, var.upper)
            values.append(v)
            basis.append(AT_UPPER if (var.lower == -INF and var.upper != INF) else AT_LOWER)
    return LpSolution(
        OPTIMAL,
        tuple(values),
        evaluate_objective(inst, values),
        tuple(basis),
        (),
    )


def solve_lp(
    inst: MilpInstance,
    relax_integrality: bool = True,
    warm_basis: tuple[str, ...] | None = None,
    limits: Limits | None = None,
) -> LpSolution:
    """Solve the LP relaxation of an instance.

    SOS1 rows are ignored at the LP level. ``warm_basis`` takes the per-
    variable basis statuses of a previous solution on a compatible instance;
    a warm basis that is singular or primal-infeasible falls back to a cold
    start. Deterministic for fixed inputs and limits.
    """
    if not relax_integrality and inst.discrete_indices():
        raise MilpError("instance has discrete variables; pass relax_integrality=True")
    limits = limits or Limits()
    c = inst.objective_vector()
    if not inst.linear_rows():
        return _solve_trivial(inst, c)

    tab = _Tableau(inst)
    n, m = tab.n, tab.m
    costs = np.concatenate([c, np.zeros(m)])
    solver = _Solver(tab, costs, limits)

    started = False
    if warm_basis is not None and len(warm_basis) == n:
        basis = [j for j, s in enumerate(warm_basis) if s == BASIC][:m]
        for i in range(m):
            if len(basis) == m:
                break
            basis.append(n + i)
        status = np.empty(n + m, dtype=int)
        for j in range(n):
            if warm_basis[j] == AT_UPPER and tab.hi[j] != INF:
                status[j] = _UP
            else:
                status[j] = _status_for_value(tab.lo[j], tab.hi[j])
        for i in range(m):
            status[n + i] = _status_for_value(tab.lo[n + i], tab.hi[n + i])
        for j in basis:
            status[j] = _B
        if solver.set_basis(basis, status):
            x = solver.x_basic
            lob = solver.lo[basis]
            hib = solver.hi[basis]
            if np.all(x >= lob - 1e-9) and np.all(x <= hib + 1e-9):
                started = True
    if not started:
        result = _phase_one(solver, tab, limits)
        if result is not None:
            return result

    solver.costs = np.concatenate([costs, np.zeros(solver.ncols - (n + m))])
    status = solver.run()
    return _extract(inst, tab, solver, status)


def _phase_one(solver: _Solver, tab: _Tableau, limits: Limits) -> LpSolution | None:
    """Drive to primal feasibility; returns an LpSolution only on failure."""
    n, m = tab.n, tab.m
    x_n = np.array([_initial_nonbasic_value(tab.lo[j], tab.hi[j]) for j in range(n)])
    resid = tab.b - tab.A[:, :n] @ x_n

    basis = []
    art_cols = []
    art_signs = []
    slack_status = np.empty(m, dtype=int)
    for i in range(m):
        slo, shi = tab.lo[n + i], tab.hi[n + i]
        if slo - 1e-12 <= resid[i] <= shi + 1e-12:
            basis.append(n + i)
            slack_status[i] = _B
        else:
            near = slo if resid[i] < slo else shi
            slack_status[i] = _LO if near == slo else _UP
            art_signs.append(1.0 if resid[i] - near >= 0 else -1.0)
            art_cols.append(i)
            basis.append(-(len(art_cols)))  # placeholder, replaced below

    k = len(art_cols)
    if k:
        A_art = np.zeros((m, k))
        for idx, (row, sign) in enumerate(zip(art_cols, art_signs)):
            A_art[row, idx] = sign
        solver.A = np.hstack([tab.A, A_art])
        solver.lo = np.concatenate([solver.lo, np.zeros(k)])
        solver.hi = np.concatenate([solver.hi, np.full(k, INF)])
        solver.ncols = n + m + k
        for idx, row in enumerate(art_cols):
            basis[row] = n + m + idx

    status = np.empty(solver.ncols, dtype=int)
    for j in range(n):
        status[j] = _status_for_value(tab.lo[j], tab.hi[j])
    for i in range(m):
        status[n + i] = slack_status[i]
    for j in basis:
        status[j] = _B
    phase1_costs = np.zeros(solver.ncols)
    phase1_costs[n + m :] = 1.0
    solver.costs = phase1_costs
    if not solver.set_basis(basis, status):
        return LpSolution(NUMERICAL_FAILURE, (), math.nan, (), ())
    if k == 0:
        return None

    run_status = solver.run()
    if run_status in (ITERATION_LIMIT, NUMERICAL_FAILURE):
        return _extract(None, tab, solver, run_status)
    infeas = float(phase1_costs[solver.basis] @ solver.x_basic)
    scale = 1.0 + float(np.abs(tab.b).max(initial=0.0))
    if infeas > 1e-7 * scale:
        values = solver.full_values()[:n]
        return LpSolution(
            LP_INFEASIBLE,
            tuple(values),
            INF,
            _basis_strings(solver, n),
            tuple(float(v) for v in solver.duals()),
            solver.iterations,
            phase1_infeasibility=infeas,
        )
    # drive leftover artificials out of the basis where possible
    for pos in range(m):
        col = solver.basis[pos]
        if col < n + m:
            continue
        row_of_binv = solver.B_inv[pos, :]
        pivot_row = row_of_binv @ solver.A[:, : n + m]
        candidates = np.flatnonzero(
            (np.abs(pivot_row) > PIVOT_TOL) & (solver.status[: n + m] != _B)
        )
        if candidates.size:
            q = int(candidates[0])
            alpha = solver.B_inv @ solver.A[:, q]
            br = solver.B_inv[pos, :] / alpha[pos]
            solver.B_inv -= np.outer(alpha, br)
            solver.B_inv[pos, :] = br
            entering_value = solver._entry_value(q)
            solver.status[q] = _B
            solver.status[col] = _LO
            solver.basis[pos] = q
            solver.recompute_basics()
    # freeze every artificial at zero for phase 2
    solver.lo[n + m :] = 0.0
    solver.hi[n + m :] = 0.0
    return None


def _basis_strings(solver: _Solver, n: int) -> tuple[str, ...]:
    out = []
    for j in range(n):
        s = solver.status[j]
        out.append(BASIC if s == _B else AT_UPPER if s == _UP else AT_LOWER)
    return tuple(out)


def _extract(inst, tab: _Tableau, solver: _Solver, status: str) -> LpSolution:
    n = tab.n
    values = solver.full_values()[:n]
    if inst is not None:
        objective = evaluate_objective(inst, values)
        duals_linear = solver.duals()
        duals = []
        linear_i = 0
        for con in inst.constraints:
            if con.is_sos1:
                duals.append(0.0)
            else:
                duals.append(float(duals_linear[linear_i]))
                linear_i += 1
    else:
        objective = math.nan
        duals = [float(v) for v in solver.duals()]
    if status == UNBOUNDED:
        objective = -INF
    return LpSolution(
        status,
        tuple(float(v) for v in values),
        objective,
        _basis_strings(solver, n),
        tuple(duals),
        solver.iterations,
    )


def tableau_dump(inst: MilpInstance) -> str:
    """Standard-form dump: one line per row ``name: coeffs | rhs``, then
    column bounds. Intended for debugging small models."""
    tab = _Tableau(inst)
    lines = [f"rows {tab.m} cols {tab.n}+{tab.m}"]
    for i in range(tab.m):
        coeffs = " ".join(f"{v:g}" for v in tab.A[i, : tab.n])
        lines.append(f"{tab.row_names[i]}: {coeffs} | {tab.b[i]:g}")
    bounds = " ".join(
        f"[{'-inf' if lo == -INF else f'{lo:g}'},{'inf' if hi == INF else f'{hi:g}'}]"
        for lo, hi in zip(tab.lo, tab.hi)
    )
    lines.append(f"bounds {bounds}")
    return "\n".join(lines)
