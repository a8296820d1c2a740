"""LP / ILP solving for clocking-assignment instances.

Two LP engines sit behind one interface: the in-package bounded-variable
primal simplex for desk-scale programs and scipy's HiGHS dual simplex for
anything large ('auto' picks by size; both are deterministic). The integer
search is an in-package branch-and-bound: it branches on the most
fractional cost variable first (depths second), dives depth-first, and
backtracks to the open node with the best bound. Every node of a
circuit-shaped instance also yields a feasible incumbent by rounding the
node relaxation up, so the gap closes from both sides; a warm-start
assignment (typically the rounded root LP) is installed as the initial
incumbent. Final integral assignments are re-verified in exact integer
arithmetic.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix

from .formulation import ProblemInstance
from .simplex import solve_bounded_lp

FEASTOL = 1e-6
DEFAULT_TIME_LIMIT = 3000.0
_SIMPLEX_MAX_VARS = 240  # beyond this the dense tableau is not worth it

OPTIMAL, INCUMBENT, INFEASIBLE = "optimal", "incumbent", "infeasible"


class SolverError(RuntimeError):
    pass


@dataclass
class Solution:
    status: str
    objective: float | None
    values: np.ndarray | None
    iterations: int = 0
    branch_nodes: int = 0
    wall_time: float = 0.0
    bound: float | None = None


class _Prepared:
    """Matrix form of a ProblemInstance, built once and reused."""

    def __init__(self, inst: ProblemInstance):
        n = inst.n_vars
        self.c = np.zeros(n)
        for j, coef in inst.objective.items():
            self.c[j] = coef
        ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
        for con in inst.constraints:
            if con.sense == "==":
                eq_rows.append(con.coeffs)
                eq_rhs.append(con.rhs)
            elif con.sense == "<=":
                ub_rows.append(con.coeffs)
                ub_rhs.append(con.rhs)
            else:  # '>=' becomes negated '<='
                ub_rows.append(tuple((j, -a) for j, a in con.coeffs))
                ub_rhs.append(-con.rhs)
        self.A_ub, self.b_ub = _build_rows(ub_rows, ub_rhs, n)
        self.A_eq, self.b_eq = _build_rows(eq_rows, eq_rhs, n)
        self.lb = np.array([v.lb for v in inst.variables])
        self.ub = np.array(
            [np.inf if v.ub is None else v.ub for v in inst.variables]
        )
        self.int_mask = np.array([v.integer for v in inst.variables])
        self.cost_like = np.array(
            [v.kind in ("edge_cost", "driver_cost") for v in inst.variables]
        )
        # In the fanout-shared variant the per-edge costs are recomputed
        # after the fact, so only driver costs need to take integer values.
        if inst.fanout_shared:
            for e, j in inst.c_edge_index.items():
                self.int_mask[j] = False
        obj_coefs_integral = all(float(a).is_integer() for a in inst.objective.values())
        self.objective_integral = obj_coefs_integral and all(
            self.int_mask[j] for j in inst.objective
        )
        self._dense = None

    def dense(self):
        if self._dense is None:
            self._dense = (
                self.A_ub.toarray() if self.A_ub is not None else None,
                self.A_eq.toarray() if self.A_eq is not None else None,
            )
        return self._dense


def _build_rows(rows, rhs, n):
    if not rows:
        return None, None
    data, indices, indptr = [], [], [0]
    for coeffs in rows:
        for j, a in coeffs:
            indices.append(j)
            data.append(a)
        indptr.append(len(indices))
    return csr_matrix((data, indices, indptr), shape=(len(rows), n)), np.array(rhs)


def _prepared(inst: ProblemInstance) -> _Prepared:
    prep = getattr(inst, "_prepared", None)
    if prep is None:
        prep = _Prepared(inst)
        inst._prepared = prep
    return prep


def _pick_engine(inst: ProblemInstance, engine: str) -> str:
    if engine != "auto":
        return engine
    return "simplex" if inst.n_vars <= _SIMPLEX_MAX_VARS else "scipy"


def _solve_relaxation(prep: _Prepared, lb, ub, engine: str):
    """Returns (status, x, objective, iterations)."""
    if engine == "simplex":
        dense_ub, dense_eq = prep.dense()
        res = solve_bounded_lp(
            prep.c, dense_ub, prep.b_ub, dense_eq, prep.b_eq, lb, ub, feastol=FEASTOL
        )
        return res.status, res.x, res.objective, res.iterations
    res = linprog(
        prep.c,
        A_ub=prep.A_ub,
        b_ub=prep.b_ub,
        A_eq=prep.A_eq,
        b_eq=prep.b_eq,
        bounds=np.column_stack((lb, ub)),
        method="highs-ds",
    )
    if res.status == 2:
        return "infeasible", None, None, int(getattr(res, "nit", 0) or 0)
    if res.status != 0:
        return "error", None, None, int(getattr(res, "nit", 0) or 0)
    return "optimal", res.x, float(res.fun), int(getattr(res, "nit", 0) or 0)


def solve_lp(inst: ProblemInstance, engine: str = "auto") -> Solution:
    """Solve the relaxation (integrality dropped)."""
    t0 = time.monotonic()
    prep = _prepared(inst)
    engine = _pick_engine(inst, engine)
    status, x, obj, iters = _solve_relaxation(prep, prep.lb, prep.ub, engine)
    wall = time.monotonic() - t0
    if status == "infeasible":
        return Solution(INFEASIBLE, None, None, iters, 0, wall)
    if status != "optimal":
        raise SolverError(f"LP relaxation failed: {status}")
    return Solution(OPTIMAL, obj, x, iters, 0, wall)


def round_solution(
    inst: ProblemInstance, values: np.ndarray, descend: bool = True
) -> np.ndarray:
    """Round a relaxed assignment to a feasible integral one.

    Depths are rounded up; every cost is then recomputed from the rounded
    depths (ceil(gap / W) - 1, and the fanout maximum for driver costs).
    Gap lower bounds and the integral-offset equalities survive a uniform
    ceiling, so the result always verifies; this is asserted. With descend
    the ceiling is then relaxed by a greedy pass that lowers depths while
    the recounted cost strictly drops, which closes most of the gap the
    blanket ceiling opens on small circuits.
    """
    if inst.dag is None:
        raise SolverError("rounding needs a circuit-shaped instance")
    dag = inst.dag
    out = values.astype(float).copy()
    depth = [0] * dag.n_nodes
    for idx, j in inst.d_index.items():
        depth[idx] = math.ceil(out[j] - FEASTOL)
    if descend:
        _descend_depths(inst, depth)
        for idx, j in inst.d_index.items():
            out[j] = depth[idx]
        out[inst.d_outputs_index] = depth[dag.pos[0]] if dag.pos else math.ceil(
            out[inst.d_outputs_index] - FEASTOL
        )
    else:
        for idx, j in inst.d_index.items():
            out[j] = depth[idx]
        out[inst.d_outputs_index] = math.ceil(out[inst.d_outputs_index] - FEASTOL)
    w = inst.window
    driver_max: dict[int, int] = {}
    for e, j in inst.c_edge_index.items():
        s, t = dag.edges[e]
        gap = depth[t] - depth[s]
        cost = (gap - 1) // w
        out[j] = cost
        driver_max[s] = max(driver_max.get(s, 0), cost)
    for idx, j in inst.c_driver_index.items():
        out[j] = driver_max.get(idx, 0)
    verify_integral(inst, out)
    return out


def _descend_depths(inst: ProblemInstance, depth: list[int]) -> None:
    """Lower depths in place while the recounted DFF total strictly drops.

    Nodes move in groups that the equality constraints tie together: each
    register pair keeps its fixed span, all outputs move with D_outputs,
    inputs stay pinned. A move never breaks feasibility because gaps into
    a lowered group are required to stay >= 1 and costs are recomputed
    from gaps; so the pass preserves the rounding invariant.
    """
    dag = inst.dag
    w = inst.window
    shared = inst.fanout_shared

    grouped: set[int] = set()
    groups: list[list[int]] = []
    for pso, psi in dag.register_pairs:
        groups.append([psi, pso])
        grouped.update((psi, pso))
    if dag.pos:
        groups.append(sorted(dag.pos))
        grouped.update(dag.pos)
    for idx in range(dag.n_nodes):
        if idx in grouped or idx in dag.pis:
            continue
        groups.append([idx])

    member: dict[int, int] = {}
    for g, nodes in enumerate(groups):
        for idx in nodes:
            member[idx] = g
    g_edges: list[list[int]] = [[] for _ in groups]
    for e, (s, t) in enumerate(dag.edges):
        gs, gt = member.get(s), member.get(t)
        if gs == gt:
            continue  # both endpoints move together; the gap never changes
        if gs is not None:
            g_edges[gs].append(e)
        if gt is not None:
            g_edges[gt].append(e)

    gap = [depth[t] - depth[s] for s, t in dag.edges]
    cost = lambda g: (g - 1) // w  # noqa: E731

    def driver_cost(idx: int, moved: set[int] | None = None, delta: int = 0) -> int:
        best = 0
        for e in dag.fanout_edges[idx]:
            g = gap[e]
            if moved is not None:
                s, t = dag.edges[e]
                g += delta * ((t in moved) - (s in moved))
            best = max(best, cost(g))
        return best

    # Cost-neutral moves are accepted too: they walk plateaus where a gain
    # needs a whole subtree to shift. Every accepted move lowers the depth
    # sum by at least 1, so the loop terminates.
    while True:
        moved = False
        # Deepest groups first so chains compress from the sinks backwards.
        order = sorted(
            range(len(groups)), key=lambda g: (-max(depth[i] for i in groups[g]), g)
        )
        for g in order:
            nodes = groups[g]
            node_set = set(nodes)
            while True:
                if any(depth[i] <= 1 for i in nodes):
                    break
                feasible = True
                delta = 0
                touched_drivers: set[int] = set()
                for e in g_edges[g]:
                    s, t = dag.edges[e]
                    into = t in node_set
                    if into and gap[e] < 2:
                        feasible = False
                        break
                    if shared:
                        touched_drivers.add(s)
                    else:
                        new_gap = gap[e] + (-1 if into else 1)
                        delta += cost(new_gap) - cost(gap[e])
                if not feasible:
                    break
                if shared:
                    delta = sum(
                        driver_cost(d, node_set, -1) - driver_cost(d)
                        for d in touched_drivers
                    )
                if delta > 0:
                    break
                for i in nodes:
                    depth[i] -= 1
                for e in g_edges[g]:
                    s, t = dag.edges[e]
                    gap[e] += -1 if t in node_set else 1
                moved = True
        if not moved:
            return


def verify_integral(inst: ProblemInstance, values: np.ndarray) -> None:
    """Exact integer re-check of an integral assignment; raises on failure."""
    prep = _prepared(inst)
    ints: list[int | float] = []
    for j, v in enumerate(values):
        if prep.int_mask[j]:
            r = round(float(v))
            if abs(v - r) > FEASTOL:
                raise SolverError(f"variable {inst.variables[j].name} not integral: {v}")
            ints.append(int(r))
        else:
            ints.append(float(v))
    for con in inst.constraints:
        lhs = 0
        exact = True
        for j, a in con.coeffs:
            if float(a).is_integer() and isinstance(ints[j], int):
                lhs += int(a) * ints[j]
            else:
                lhs += a * ints[j]
                exact = False
        rhs = int(con.rhs) if exact and float(con.rhs).is_integer() else con.rhs
        slack = FEASTOL if not exact else 0
        ok = (
            lhs <= rhs + slack
            if con.sense == "<="
            else lhs >= rhs - slack
            if con.sense == ">="
            else abs(lhs - rhs) <= slack
        )
        if not ok:
            raise SolverError(
                f"constraint {con.tag} violated: lhs={lhs} {con.sense} rhs={con.rhs}"
            )
    for j, var in enumerate(inst.variables):
        lo = var.lb
        hi = np.inf if var.ub is None else var.ub
        if not (lo - FEASTOL <= values[j] <= hi + FEASTOL):
            raise SolverError(f"bound violated on {var.name}: {values[j]}")


def _fractional_branch_var(prep: _Prepared, x: np.ndarray) -> int | None:
    frac = np.abs(x - np.round(x))
    frac[~prep.int_mask] = 0.0
    cand = frac > FEASTOL
    if not cand.any():
        return None
    for group in (cand & prep.cost_like, cand & ~prep.cost_like):
        if group.any():
            idx = np.nonzero(group)[0]
            return int(idx[np.argmax(frac[idx])])
    return None


def solve_ilp(
    inst: ProblemInstance,
    time_limit: float = DEFAULT_TIME_LIMIT,
    warm_start: np.ndarray | None = None,
    engine: str = "auto",
) -> Solution:
    """Branch-and-bound over the LP relaxation."""
    t0 = time.monotonic()
    prep = _prepared(inst)
    engine = _pick_engine(inst, engine)
    best_x = None
    best_obj = np.inf
    if warm_start is not None:
        verify_integral(inst, warm_start)
        best_x = np.asarray(warm_start, dtype=float)
        best_obj = float(prep.c @ best_x)

    def beats_incumbent(bound: float) -> bool:
        if prep.objective_integral:
            return math.ceil(bound - FEASTOL) < best_obj - FEASTOL
        return bound < best_obj - FEASTOL

    iterations = 0
    nodes = 0
    seq = 0
    open_heap: list[tuple[float, int, int, np.ndarray, np.ndarray]] = []
    current: tuple[np.ndarray, np.ndarray, int] | None = (prep.lb.copy(), prep.ub.copy(), 0)
    root_infeasible = False
    best_open_bound = np.inf
    timed_out = False

    while current is not None:
        if time.monotonic() - t0 > time_limit:
            timed_out = True
            break
        lb, ub, depth = current
        current = None
        status, x, obj, iters = _solve_relaxation(prep, lb, ub, engine)
        iterations += iters
        nodes += 1
        if status == "error":
            raise SolverError("relaxation failed inside branch-and-bound")
        if status == "infeasible":
            if nodes == 1:
                root_infeasible = True
        elif beats_incumbent(obj):
            j = _fractional_branch_var(prep, x)
            if j is None:
                if inst.dag is not None:
                    xi = round_solution(inst, x)  # canonical integral completion
                else:
                    xi = x.copy()
                    xi[prep.int_mask] = np.round(xi[prep.int_mask])
                    verify_integral(inst, xi)
                obj_xi = float(prep.c @ xi)
                if obj_xi < best_obj - FEASTOL:
                    best_obj, best_x = obj_xi, xi
            else:
                if inst.dag is not None:
                    # Primal heuristic: every relaxation rounds to a feasible
                    # integral assignment of the original instance. Plain
                    # ceiling here; the descent pass is too slow per node.
                    cand = round_solution(inst, x, descend=False)
                    cand_obj = float(prep.c @ cand)
                    if cand_obj < best_obj - FEASTOL:
                        best_obj, best_x = cand_obj, cand
                frac = x[j] - math.floor(x[j])
                down_ub = ub.copy()
                down_ub[j] = math.floor(x[j])
                up_lb = lb.copy()
                up_lb[j] = math.ceil(x[j])
                down = (obj, depth + 1, lb, down_ub)
                up = (obj, depth + 1, up_lb, ub)
                first, second = (up, down) if frac >= 0.5 else (down, up)
                seq += 1
                heapq.heappush(open_heap, (second[0], -second[1], seq, second[2], second[3]))
                current = (first[2], first[3], first[1])
                continue
        # Backtrack to the best-bound open node.
        while open_heap:
            bound, negdepth, _, nlb, nub = heapq.heappop(open_heap)
            if beats_incumbent(bound):
                current = (nlb, nub, -negdepth)
                break

    if open_heap:
        best_open_bound = min(b for b, *_ in open_heap)
    wall = time.monotonic() - t0
    if root_infeasible and best_x is None:
        return Solution(INFEASIBLE, None, None, iterations, nodes, wall)
    if best_x is None:
        # Search space exhausted (or timed out) with nothing integral found.
        status = INCUMBENT if timed_out else INFEASIBLE
        return Solution(status, None, None, iterations, nodes, wall)
    status = INCUMBENT if timed_out else OPTIMAL
    if status == OPTIMAL:
        bound = float(best_obj)
    else:
        bound = float(best_open_bound) if np.isfinite(best_open_bound) else None
    return Solution(status, best_obj, best_x, iterations, nodes, wall, bound=bound)


def export_lp_format(inst: ProblemInstance, integer: bool = True) -> str:
    """Serialize in CPLEX LP text format (cross-checkable with any LP solver)."""
    lines = ["\\ clocking assignment instance", "Minimize"]
    lines.append(" obj: " + _expr([(j, a) for j, a in sorted(inst.objective.items())], inst))
    lines.append("Subject To")
    for i, con in enumerate(inst.constraints):
        op = {"<=": "<=", ">=": ">=", "==": "="}[con.sense]
        rhs = _num(con.rhs)
        lines.append(f" {con.tag}{i}: " + _expr(con.coeffs, inst) + f" {op} {rhs}")
    lines.append("Bounds")
    for var in inst.variables:
        if var.ub is not None:
            lines.append(f" {_num(var.lb)} <= {var.name} <= {_num(var.ub)}")
        elif var.lb != 0:
            lines.append(f" {var.name} >= {_num(var.lb)}")
    if integer:
        lines.append("General")
        names = [v.name for v in inst.variables if v.integer]
        for k in range(0, len(names), 8):
            lines.append(" " + " ".join(names[k : k + 8]))
    lines.append("End")
    return "\n".join(lines) + "\n"


def _num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def _expr(coeffs, inst: ProblemInstance) -> str:
    parts = []
    for j, a in coeffs:
        name = inst.variables[j].name
        if not parts:
            parts.append(name if a == 1 else f"- {name}" if a == -1 else f"{_num(a)} {name}")
        else:
            sign = "+" if a > 0 else "-"
            mag = abs(a)
            parts.append(f"{sign} {name}" if mag == 1 else f"{sign} {_num(mag)} {name}")
    return " ".join(parts) if parts else "0"
