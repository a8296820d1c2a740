"""Integer-program construction for multi-phase clocking assignment.

Variables: one depth D per DAG node, one shared D_outputs, one edge cost
C per wire (the number of balancing DFFs on it), and in the fanout-shared
variant one driver cost C per fanout system. Constraints per wire (i, j):

    D_j - D_i >= 1
    D_j - D_i <= (C_ij + 1) * W

with window W = n_phases normally and W = n_phases - 1 in the hold-safe
variant (then no two connected cells can land on the same phase). Primary
inputs sit at depth 1, all primary outputs share one depth, and each
register pair is pinned to a gap of exactly d_loop, a multiple of
n_phases; the circuit then interleaves d_loop / n_phases threads.
Minimizing total cost is the full-path-balancing problem when
n_phases = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dag import PI, PO, CircuitDag, min_feasible_dloop, topological_order


class FormulationError(ValueError):
    pass


@dataclass(frozen=True)
class Variable:
    name: str
    lb: float
    ub: float | None
    integer: bool
    kind: str  # 'depth' | 'edge_cost' | 'driver_cost'


@dataclass(frozen=True)
class LinearConstraint:
    coeffs: tuple[tuple[int, float], ...]  # (variable index, coefficient)
    sense: str  # '<=' | '>=' | '=='
    rhs: float
    tag: str

    def value(self, x) -> float:
        return sum(c * x[i] for i, c in self.coeffs)


@dataclass
class ProblemInstance:
    variables: list[Variable]
    constraints: list[LinearConstraint]
    objective: dict[int, float]
    n_phases: int = 1
    d_loop: int = 1
    window: int = 1
    fanout_shared: bool = False
    hold_safe: bool = False
    dag: CircuitDag | None = None
    d_index: dict[int, int] = field(default_factory=dict)  # node idx -> var idx
    c_edge_index: dict[int, int] = field(default_factory=dict)  # edge idx -> var idx
    c_driver_index: dict[int, int] = field(default_factory=dict)  # node idx -> var idx
    d_outputs_index: int | None = None

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def threads(self) -> int:
        return self.d_loop // self.n_phases

    def objective_value(self, x) -> float:
        return sum(c * x[i] for i, c in self.objective.items())


def formulate(
    dag: CircuitDag,
    n_phases: int,
    d_loop: int | None = None,
    fanout_shared: bool = False,
    hold_safe: bool = False,
) -> ProblemInstance:
    """Build the clocking-assignment program for a DAG.

    d_loop=None picks the smallest feasible multiple of n_phases (n_phases
    itself for purely combinational circuits, so one thread). Raises
    FormulationError for invalid parameter combinations, circuits with no
    outputs, and a d_loop too small for the deepest feedback path (the
    minimal feasible value is reported in the message).
    """
    if n_phases < 1:
        raise FormulationError(f"n_phases must be >= 1, got {n_phases}")
    if hold_safe and n_phases < 2:
        raise FormulationError("hold-safe assignment needs at least 2 phases")
    if not dag.pos:
        raise FormulationError("circuit has no outputs; nothing to clock")
    if d_loop is None:
        if dag.register_pairs:
            d_loop = min_feasible_dloop(dag, n_phases)
        else:
            d_loop = n_phases
    if d_loop < n_phases or d_loop % n_phases != 0:
        raise FormulationError(
            f"d_loop must be a positive multiple of n_phases, got {d_loop}"
        )
    if dag.register_pairs:
        d_min = min_feasible_dloop(dag, n_phases)
        if d_loop < d_min:
            raise FormulationError(
                f"d_loop={d_loop} cannot fit the deepest feedback path; "
                f"minimum feasible is {d_min}"
            )
    window = n_phases - 1 if hold_safe else n_phases

    inst = ProblemInstance(
        variables=[],
        constraints=[],
        objective={},
        n_phases=n_phases,
        d_loop=d_loop,
        window=window,
        fanout_shared=fanout_shared,
        hold_safe=hold_safe,
        dag=dag,
    )

    def add_var(name: str, kind: str) -> int:
        inst.variables.append(Variable(name, 1.0 if kind == "depth" else 0.0, None, True, kind))
        return len(inst.variables) - 1

    order = topological_order(dag)
    for idx in order:
        inst.d_index[idx] = add_var("D_" + dag.nodes[idx].name, "depth")
    inst.d_outputs_index = add_var("D_outputs", "depth")
    # Edge costs in edge id order: deterministic under DAG construction order.
    edge_order = range(dag.n_edges)
    for e in edge_order:
        s, t = dag.edges[e]
        inst.c_edge_index[e] = add_var(
            f"C_{dag.nodes[s].name}__{dag.nodes[t].name}", "edge_cost"
        )
    if fanout_shared:
        for idx in order:
            if dag.out_degree(idx) > 0:
                inst.c_driver_index[idx] = add_var("C_" + dag.nodes[idx].name, "driver_cost")

    cons = inst.constraints
    for e in edge_order:
        s, t = dag.edges[e]
        ds, dt, ce = inst.d_index[s], inst.d_index[t], inst.c_edge_index[e]
        cons.append(LinearConstraint(((dt, 1.0), (ds, -1.0)), ">=", 1.0, "gap_lb"))
        cons.append(
            LinearConstraint(
                ((dt, 1.0), (ds, -1.0), (ce, -float(window))), "<=", float(window), "gap_ub"
            )
        )
    for idx in dag.pis:
        cons.append(LinearConstraint(((inst.d_index[idx], 1.0),), "==", 1.0, "pi_pin"))
    for idx in dag.pos:
        cons.append(
            LinearConstraint(
                ((inst.d_index[idx], 1.0), (inst.d_outputs_index, -1.0)), "==", 0.0, "po_tie"
            )
        )
    for pso, psi in dag.register_pairs:
        cons.append(
            LinearConstraint(
                ((inst.d_index[pso], 1.0), (inst.d_index[psi], -1.0)),
                "==",
                float(d_loop),
                "loop",
            )
        )
    if fanout_shared:
        for e in edge_order:
            s, _ = dag.edges[e]
            cons.append(
                LinearConstraint(
                    ((inst.c_edge_index[e], 1.0), (inst.c_driver_index[s], -1.0)),
                    "<=",
                    0.0,
                    "share",
                )
            )
        inst.objective = {v: 1.0 for v in inst.c_driver_index.values()}
    else:
        inst.objective = {v: 1.0 for v in inst.c_edge_index.values()}
    return inst


def formulate_fpb(dag: CircuitDag, d_loop: int | None = None) -> ProblemInstance:
    """Full path balancing: the single-phase instance (every gap exactly shared)."""
    return formulate(dag, 1, d_loop=d_loop, fanout_shared=False, hold_safe=False)
