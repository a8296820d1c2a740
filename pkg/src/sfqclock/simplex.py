"""Bounded-variable primal simplex, dense two-phase implementation.

Solves   min c'x   s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  lb <= x <= ub.

Nonbasic variables rest at either bound; the ratio test allows bound
flips without a basis change. Entering variables are picked by the
steepest reduced cost (Dantzig) until the objective stalls, after which
the rule falls back to Bland's smallest-index rule, which guarantees
termination under degeneracy. Intended for desk-scale instances (a few
hundred variables); larger programs should go through the HiGHS backend.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_PIVOT_TOL = 1e-9
_STALL_LIMIT = 60  # consecutive non-improving pivots before Bland's rule


@dataclass
class SimplexResult:
    status: str  # 'optimal' | 'infeasible' | 'unbounded' | 'iteration_limit'
    x: np.ndarray | None
    objective: float | None
    iterations: int


def solve_bounded_lp(
    c,
    A_ub=None,
    b_ub=None,
    A_eq=None,
    b_eq=None,
    lb=None,
    ub=None,
    feastol: float = 1e-6,
    max_iter: int | None = None,
) -> SimplexResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    lb = np.zeros(n) if lb is None else np.asarray(lb, dtype=float)
    ub = np.full(n, np.inf) if ub is None else np.asarray(ub, dtype=float)
    if not np.all(np.isfinite(lb)):
        raise ValueError("all lower bounds must be finite")
    if np.any(lb > ub + feastol):
        return SimplexResult("infeasible", None, None, 0)

    rows = []
    rhs = []
    senses = []
    if A_ub is not None and len(A_ub):
        A_ub = np.atleast_2d(np.asarray(A_ub, dtype=float))
        rows.append(A_ub)
        rhs.append(np.asarray(b_ub, dtype=float) - A_ub @ lb)
        senses += ["<="] * A_ub.shape[0]
    if A_eq is not None and len(A_eq):
        A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float))
        rows.append(A_eq)
        rhs.append(np.asarray(b_eq, dtype=float) - A_eq @ lb)
        senses += ["=="] * A_eq.shape[0]
    m = sum(a.shape[0] for a in rows)
    u_shift = ub - lb  # shifted variables live in [0, u_shift]

    # Columns: n structural, one slack per <= row, artificials as needed.
    n_slack = senses.count("<=")
    cols = n + n_slack
    T = np.zeros((m, cols))
    b = np.zeros(m)
    if m:
        T[:, :n] = np.vstack(rows)
        b[:] = np.concatenate(rhs)
    upper = np.concatenate([u_shift, np.full(n_slack, np.inf)])

    slack_at = {}
    k = 0
    for i, s in enumerate(senses):
        if s == "<=":
            T[i, n + k] = 1.0
            slack_at[i] = n + k
            k += 1

    basis = np.empty(m, dtype=int)
    art_cols: list[int] = []
    extra = []
    for i in range(m):
        if b[i] < 0.0:
            T[i] *= -1.0
            b[i] = -b[i]
        if senses[i] == "<=" and i in slack_at and T[i, slack_at[i]] > 0:
            basis[i] = slack_at[i]
        else:
            col = np.zeros((m, 1))
            col[i, 0] = 1.0
            extra.append(col)
            basis[i] = cols + len(art_cols)
            art_cols.append(cols + len(art_cols))
    if extra:
        T = np.hstack([T] + extra)
        upper = np.concatenate([upper, np.full(len(extra), np.inf)])
    total = T.shape[1]
    at_upper = np.zeros(total, dtype=bool)
    xB = b.copy()
    iterations = 0
    limit = max_iter if max_iter is not None else 200 * (m + total + 10)

    def run_phase(cost: np.ndarray) -> str:
        nonlocal iterations, T, xB
        bland = False
        stall = 0
        last_obj = np.inf
        while True:
            if iterations >= limit:
                return "iteration_limit"
            z = cost - cost[basis] @ T if m else cost.copy()
            z[basis] = 0.0
            fixed = upper <= _PIVOT_TOL  # cannot move off a pinched bound
            can_inc = (~at_upper) & (z < -feastol / 2) & ~fixed
            can_dec = at_upper & (z > feastol / 2)
            can_inc[basis] = can_dec[basis] = False
            if not (can_inc.any() or can_dec.any()):
                return "optimal"
            candidates = np.nonzero(can_inc | can_dec)[0]
            if bland:
                j = int(candidates[0])
            else:
                j = int(candidates[np.argmax(np.abs(z[candidates]))])
            direction = -1.0 if at_upper[j] else 1.0

            d = T[:, j] if m else np.empty(0)
            step = upper[j]  # bound-to-bound flip distance
            leave = -1
            leave_to_upper = False
            for i in range(m):
                di = direction * d[i]
                if di > _PIVOT_TOL:
                    ratio = xB[i] / di
                    if ratio < step - _PIVOT_TOL or (
                        ratio < step + _PIVOT_TOL and (leave < 0 or basis[i] < basis[leave])
                    ):
                        step, leave, leave_to_upper = ratio, i, False
                elif di < -_PIVOT_TOL and np.isfinite(upper[basis[i]]):
                    ratio = (upper[basis[i]] - xB[i]) / -di
                    if ratio < step - _PIVOT_TOL or (
                        ratio < step + _PIVOT_TOL and (leave < 0 or basis[i] < basis[leave])
                    ):
                        step, leave, leave_to_upper = ratio, i, True
            if not np.isfinite(step):
                return "unbounded"
            step = max(step, 0.0)
            iterations += 1

            if m:
                xB -= direction * step * d
            if leave < 0:
                at_upper[j] = ~at_upper[j]
            else:
                out = basis[leave]
                at_upper[out] = leave_to_upper
                basis[leave] = j
                xB[leave] = step if direction > 0 else upper[j] - step
                piv = T[leave, j]
                T[leave] /= piv
                col = T[:, j].copy()
                col[leave] = 0.0
                T -= np.outer(col, T[leave])

            obj = cost[basis] @ xB + cost[at_upper & _nonbasic_mask(total, basis)] @ upper[
                at_upper & _nonbasic_mask(total, basis)
            ]
            if obj < last_obj - 1e-9:
                last_obj, stall = obj, 0
            else:
                stall += 1
                if stall > _STALL_LIMIT:
                    bland = True

    if art_cols:
        phase1 = np.zeros(total)
        phase1[art_cols] = 1.0
        status = run_phase(phase1)
        if status != "optimal":
            return SimplexResult(status, None, None, iterations)
        art_sum = xB[np.isin(basis, art_cols)].sum() if m else 0.0
        if art_sum > feastol:
            return SimplexResult("infeasible", None, None, iterations)
        upper[art_cols] = 0.0  # pin artificials; they may stay basic at zero

    phase2 = np.zeros(total)
    phase2[:n] = c
    status = run_phase(phase2)
    if status != "optimal":
        return SimplexResult(status, None, None, iterations)

    x_shift = np.where(at_upper[:total], upper, 0.0)
    x_shift[basis] = xB
    x = x_shift[:n] + lb
    return SimplexResult("optimal", x, float(c @ x), iterations)


def _nonbasic_mask(total: int, basis: np.ndarray) -> np.ndarray:
    mask = np.ones(total, dtype=bool)
    mask[basis] = False
    return mask
