"""Independent reference implementations the tests compare against.

Everything here is deliberately naive: exhaustive enumeration and
dict-by-dict interpretation, no shared code with the package internals.
"""

from __future__ import annotations

import itertools

import numpy as np

from sfqclock.bench import Netlist
from sfqclock.dag import CircuitDag
from sfqclock.formulation import ProblemInstance


def brute_force_ilp(inst: ProblemInstance) -> tuple[str, float | None, np.ndarray | None]:
    """Enumerate every integer point inside the variable boxes.

    All variables must carry finite upper bounds. Returns
    (status, objective, argmin) with status 'optimal' or 'infeasible'.
    """
    lo = np.array([int(v.lb) for v in inst.variables], dtype=np.int64)
    hi = np.array([int(v.ub) for v in inst.variables], dtype=np.int64)
    spans = hi - lo + 1
    grid = np.indices(spans).reshape(len(spans), -1).T + lo  # (points, vars)

    ok = np.ones(len(grid), dtype=bool)
    for con in inst.constraints:
        lhs = np.zeros(len(grid), dtype=np.int64)
        for j, a in con.coeffs:
            lhs += int(a) * grid[:, j]
        if con.sense == "<=":
            ok &= lhs <= con.rhs
        elif con.sense == ">=":
            ok &= lhs >= con.rhs
        else:
            ok &= lhs == con.rhs
    if not ok.any():
        return "infeasible", None, None
    obj = np.zeros(len(grid), dtype=np.int64)
    for j, c in inst.objective.items():
        obj += int(c) * grid[:, j]
    obj = np.where(ok, obj, np.iinfo(np.int64).max)
    best = int(np.argmin(obj))
    return "optimal", float(obj[best]), grid[best].astype(float)


def enumerate_min_inserted(
    dag: CircuitDag,
    n_phases: int,
    d_loop: int,
    window: int,
    fanout_shared: bool = False,
    max_depth: int = 10,
) -> int | None:
    """Exhaustive minimum DFF count over all feasible depth assignments.

    Free variables are the non-PI nodes (outputs tied to one value,
    register pairs tied to their span). Only usable on tiny circuits.
    """
    free: list[list[int]] = []  # groups sharing one enumerated value
    fixed: dict[int, int] = {idx: 1 for idx in dag.pis}
    deep_of: dict[int, int] = {}  # psi (shallow .q) -> pso (deep .d)
    for pso, psi in dag.register_pairs:
        deep_of[psi] = pso
    if dag.pos:
        free.append(list(dag.pos))
    for idx in range(dag.n_nodes):
        if idx in fixed or idx in dag.pos or idx in deep_of.values():
            continue
        if idx in deep_of:
            free.append([idx, deep_of[idx]])  # psi carries the value, pso follows
        else:
            free.append([idx])

    best: int | None = None
    for combo in itertools.product(range(1, max_depth + 1), repeat=len(free)):
        depth = dict(fixed)
        for group, v in zip(free, combo):
            depth[group[0]] = v
            if len(group) == 2:
                depth[group[1]] = v + d_loop  # deep register side
        valid = True
        for s, t in dag.edges:
            if depth[t] - depth[s] < 1:
                valid = False
                break
        if not valid:
            continue
        if fanout_shared:
            total = 0
            for idx in range(dag.n_nodes):
                edges = dag.fanout_edges[idx]
                if edges:
                    total += max(
                        (depth[t] - depth[s] - 1) // window for s, t in
                        (dag.edges[e] for e in edges)
                    )
        else:
            total = sum((depth[t] - depth[s] - 1) // window for s, t in dag.edges)
        if best is None or total < best:
            best = total
    return best


def golden_interpreter(net: Netlist, stimuli: np.ndarray) -> np.ndarray:
    """Step-by-step synchronous interpreter: dicts, no vectorization.

    DFFs read their input from the previous step and start at 0.
    """
    ops = {
        "AND": lambda vs: int(all(vs)),
        "NAND": lambda vs: int(not all(vs)),
        "OR": lambda vs: int(any(vs)),
        "NOR": lambda vs: int(not any(vs)),
        "XOR": lambda vs: sum(vs) % 2,
        "XNOR": lambda vs: (sum(vs) + 1) % 2,
        "NOT": lambda vs: 1 - vs[0],
        "BUFF": lambda vs: vs[0],
    }
    dffs = [c for c in net.cells.values() if c.op == "DFF"]
    comb = [c for c in net.cells.values() if c.op != "DFF"]

    # Order combinational cells by repeated relaxation (tiny nets only).
    ordered: list = []
    known = set(net.inputs) | {c.name for c in dffs}
    pending = list(comb)
    while pending:
        rest = []
        for cell in pending:
            if all(f in known for f in cell.fanins):
                ordered.append(cell)
                known.add(cell.name)
            else:
                rest.append(cell)
        assert len(rest) < len(pending), "combinational loop"
        pending = rest

    state = {c.name: 0 for c in dffs}
    out = np.zeros((stimuli.shape[0], len(net.outputs)), dtype=np.uint8)
    for step in range(stimuli.shape[0]):
        values = dict(state)
        for i, pi in enumerate(net.inputs):
            values[pi] = int(stimuli[step, i])
        for cell in ordered:
            values[cell.name] = ops[cell.op]([values[f] for f in cell.fanins])
        for i, po in enumerate(net.outputs):
            out[step, i] = values[po]
        state = {c.name: values[c.fanins[0]] for c in dffs}
    return out


def longest_levels(dag: CircuitDag) -> list[int]:
    """Memoized longest-path level per node; sources sit at level 1."""
    memo: dict[int, int] = {}

    def level(idx: int) -> int:
        if idx not in memo:
            preds = [dag.edges[e][0] for e in dag.fanin_edges[idx]]
            memo[idx] = 1 if not preds else 1 + max(level(p) for p in preds)
        return memo[idx]

    return [level(i) for i in range(dag.n_nodes)]
