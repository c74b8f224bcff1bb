"""Independent brute-force oracles used to pin expected values.

These deliberately avoid the package's solver code paths: the LP oracle
enumerates basic solutions (basis subsets x nonbasic bound patterns), the
MIP oracle enumerates every integer assignment.
"""

import itertools
import math

import numpy as np

from milpheur.core import EQ, GE, LE, INF


def _standard_form(inst):
    rows = inst.linear_rows()
    n, m = inst.n_vars, len(rows)
    A = np.zeros((m, n + m))
    b = np.zeros(m)
    lo = np.empty(n + m)
    hi = np.empty(n + m)
    lo[:n] = inst.lower_bounds()
    hi[:n] = inst.upper_bounds()
    for i, con in enumerate(rows):
        for j, coef in con.terms:
            A[i, j] = coef
        A[i, n + i] = 1.0
        b[i] = con.rhs
        lo[n + i], hi[n + i] = {LE: (0.0, INF), GE: (-INF, 0.0), EQ: (0.0, 0.0)}[con.sense]
    return A, b, lo, hi


def enumerate_lp_optimum(inst, tol=1e-9):
    """Best objective over all basic solutions; None if no feasible one."""
    A, b, lo, hi = _standard_form(inst)
    m, cols = A.shape
    n = inst.n_vars
    c = np.concatenate([inst.objective_vector(), np.zeros(m)])
    best = None
    for basis in itertools.combinations(range(cols), m):
        nonbasic = [j for j in range(cols) if j not in basis]
        options = []
        for j in nonbasic:
            opts = set()
            if lo[j] != -INF:
                opts.add(lo[j])
            if hi[j] != INF:
                opts.add(hi[j])
            if not opts:
                opts.add(0.0)
            options.append(sorted(opts))
        B = A[:, list(basis)]
        try:
            B_inv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            continue
        for pattern in itertools.product(*options):
            x = np.zeros(cols)
            x[nonbasic] = pattern
            xb = B_inv @ (b - A[:, nonbasic] @ np.asarray(pattern))
            x[list(basis)] = xb
            if np.any(x < lo - tol) or np.any(x > hi + tol):
                continue
            val = float(c @ x) + inst.offset
            if best is None or val < best:
                best = val
    return best


def enumerate_mip_optimum(inst, tol=1e-9):
    """Exhaustive enumeration for pure-discrete instances (<= ~20 binaries).

    Returns (objective, values) of the best feasible point, or None.
    """
    n = inst.n_vars
    choices = []
    for var in inst.variables:
        if not var.is_discrete:
            raise ValueError("enumeration oracle needs a pure-discrete instance")
        lo = int(math.ceil(var.lower - tol))
        hi = int(math.floor(var.upper + tol))
        choices.append(range(lo, hi + 1))
    c = inst.objective_vector()
    best = None
    for point in itertools.product(*choices):
        x = np.asarray(point, dtype=float)
        ok = True
        for con in inst.constraints:
            if con.is_sos1:
                nz = sum(1 for i, _ in con.terms if abs(x[i]) > tol)
                if nz > 1:
                    ok = False
                    break
                continue
            act = sum(coef * x[i] for i, coef in con.terms)
            if con.sense == LE and act > con.rhs + tol:
                ok = False
                break
            if con.sense == GE and act < con.rhs - tol:
                ok = False
                break
            if con.sense == EQ and abs(act - con.rhs) > tol:
                ok = False
                break
        if not ok:
            continue
        val = float(c @ x) + inst.offset
        if best is None or val < best[0]:
            best = (val, tuple(float(v) for v in x))
    return best
