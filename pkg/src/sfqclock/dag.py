"""Clocking DAG built from a netlist.

Every DFF cell is split into a pseudo output (PSO, the register's data
input, a sink) and a pseudo input (PSI, the register's output, a source),
which breaks all feedback: the result must be acyclic. Parallel wires
between the same pair (e.g. ``AND(a, a)``) collapse into one edge with a
multiplicity annotation.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .bench import Netlist

PI, PO, GATE, PSI, PSO = "pi", "po", "gate", "psi", "pso"


class DagError(ValueError):
    pass


@dataclass(frozen=True)
class DagNode:
    idx: int
    kind: str
    net: str  # origin net (PI/gate output; register net for PSI/PSO; port net for PO)
    op: str | None = None

    @property
    def name(self) -> str:
        # Unique label; PSI/PSO/PO share their net with other nodes.
        if self.kind == PSI:
            return self.net + ".q"
        if self.kind == PSO:
            return self.net + ".d"
        if self.kind == PO:
            return self.net + ".po"
        return self.net


@dataclass
class CircuitDag:
    nodes: list[DagNode] = field(default_factory=list)
    edges: list[tuple[int, int]] = field(default_factory=list)
    edge_mult: list[int] = field(default_factory=list)
    fanout_edges: list[list[int]] = field(default_factory=list)
    fanin_edges: list[list[int]] = field(default_factory=list)
    pis: list[int] = field(default_factory=list)
    pos: list[int] = field(default_factory=list)
    # (pso_idx, psi_idx) per DFF cell, in cell order
    register_pairs: list[tuple[int, int]] = field(default_factory=list)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def out_degree(self, idx: int) -> int:
        return len(self.fanout_edges[idx])


def build_dag(net: Netlist) -> CircuitDag:
    """Build the clocking DAG; rejects combinational cycles and dangling nets."""
    dag = CircuitDag()
    source_of: dict[str, int] = {}  # net -> node index that drives it

    def add_node(kind: str, netname: str, op: str | None = None) -> int:
        idx = len(dag.nodes)
        dag.nodes.append(DagNode(idx, kind, netname, op))
        dag.fanout_edges.append([])
        dag.fanin_edges.append([])
        return idx

    for signal in net.inputs:
        idx = add_node(PI, signal)
        dag.pis.append(idx)
        source_of[signal] = idx
    psos: list[tuple[int, str]] = []  # deferred sink wiring: (pso_idx, fanin net)
    for cell in net.cells.values():
        if cell.op == "DFF":
            psi = add_node(PSI, cell.name, "DFF")
            pso = add_node(PSO, cell.name, "DFF")
            source_of[cell.name] = psi
            dag.register_pairs.append((pso, psi))
            psos.append((pso, cell.fanins[0]))
        else:
            source_of[cell.name] = add_node(GATE, cell.name, cell.op)

    edge_index: dict[tuple[int, int], int] = {}

    def add_edge(src: int, dst: int) -> None:
        key = (src, dst)
        if key in edge_index:
            dag.edge_mult[edge_index[key]] += 1
            return
        edge_index[key] = len(dag.edges)
        dag.edges.append(key)
        dag.edge_mult.append(1)
        dag.fanout_edges[src].append(edge_index[key])
        dag.fanin_edges[dst].append(edge_index[key])

    for cell in net.cells.values():
        if cell.op == "DFF":
            continue
        dst = source_of[cell.name]
        for f in cell.fanins:
            add_edge(source_of[f], dst)
    for pso, fanin in psos:
        add_edge(source_of[fanin], pso)
    for signal in net.outputs:
        po = add_node(PO, signal)
        dag.pos.append(po)
        add_edge(source_of[signal], po)

    for node in dag.nodes:
        if node.kind in (PO, PSO):
            continue
        if not dag.fanout_edges[node.idx]:
            raise DagError(f"dangling net: {node.name} drives nothing")

    _check_acyclic(dag)
    return dag


def _check_acyclic(dag: CircuitDag) -> None:
    order = topological_order(dag)
    if len(order) == dag.n_nodes:
        return
    # Some cycle remains among the unvisited nodes; walk one out for the message.
    seen = set(order)
    remaining = [n.idx for n in dag.nodes if n.idx not in seen]
    cyc = []
    cur = remaining[0]
    trail: dict[int, int] = {}
    while cur not in trail:
        trail[cur] = len(trail)
        nxt = None
        for e in dag.fanout_edges[cur]:
            if dag.edges[e][1] not in seen:
                nxt = dag.edges[e][1]
                break
        cur = nxt
    start = trail[cur]
    cyc = [dag.nodes[i].name for i, pos in trail.items() if pos >= start]
    raise DagError("combinational cycle through: " + " -> ".join(cyc))


def topological_order(dag: CircuitDag) -> list[int]:
    """Kahn's algorithm; ties broken by node index for determinism."""
    indeg = [len(dag.fanin_edges[i]) for i in range(dag.n_nodes)]
    ready = [i for i, d in enumerate(indeg) if d == 0]
    heapq.heapify(ready)
    order: list[int] = []
    while ready:
        cur = heapq.heappop(ready)
        order.append(cur)
        for e in dag.fanout_edges[cur]:
            dst = dag.edges[e][1]
            indeg[dst] -= 1
            if indeg[dst] == 0:
                heapq.heappush(ready, dst)
    return order


def longest_path_levels(dag: CircuitDag) -> list[int]:
    """ASAP levels: 1 at sources, each edge adds at least 1.

    Register-pair coupling is ignored here; this is the structural lower
    bound used for presolve and the leveling oracle.
    """
    level = [1] * dag.n_nodes
    for idx in topological_order(dag):
        for e in dag.fanout_edges[idx]:
            dst = dag.edges[e][1]
            level[dst] = max(level[dst], level[idx] + 1)
    return level


def min_feasible_dloop(dag: CircuitDag, n_phases: int) -> int:
    """Smallest multiple of n_phases the register-pair depth gap can take.

    The depth system has a solution iff the constraint graph (each wire
    demands a gap of at least 1; each register pair pins PSO minus PSI to
    exactly d_loop) has no positive cycle. Feasibility is monotone in
    d_loop, so binary-search multiples of n_phases.
    """
    if not dag.register_pairs:
        return n_phases
    lo, hi = 1, (dag.n_nodes + n_phases - 1) // n_phases  # d = t * n_phases
    while lo < hi:
        mid = (lo + hi) // 2
        if _dloop_feasible(dag, mid * n_phases):
            hi = mid
        else:
            lo = mid + 1
    return lo * n_phases


def _dloop_feasible(dag: CircuitDag, d_loop: int) -> bool:
    # Bellman-Ford longest-path; a positive cycle means infeasible.
    # Arcs: src->dst weight 1 per edge, psi->pso weight d_loop and
    # pso->psi weight -d_loop per register pair.
    arcs = [(s, t, 1) for (s, t) in dag.edges]
    for pso, psi in dag.register_pairs:
        arcs.append((psi, pso, d_loop))
        arcs.append((pso, psi, -d_loop))
    dist = [0] * dag.n_nodes
    for it in range(dag.n_nodes):
        changed = False
        for s, t, w in arcs:
            if dist[s] + w > dist[t]:
                dist[t] = dist[s] + w
                changed = True
        if not changed:
            return True
    return False


def to_dot(dag: CircuitDag) -> str:
    """Graphviz dump for debugging."""
    shape = {PI: "invtriangle", PO: "triangle", PSI: "invhouse", PSO: "house"}
    lines = ["digraph circuit {", "  rankdir=LR;"]
    for node in dag.nodes:
        attrs = [f'label="{node.name}"']
        if node.kind in shape:
            attrs.append(f"shape={shape[node.kind]}")
        lines.append(f"  n{node.idx} [{', '.join(attrs)}];")
    for e, (s, t) in enumerate(dag.edges):
        label = f' [label="x{dag.edge_mult[e]}"]' if dag.edge_mult[e] > 1 else ""
        lines.append(f"  n{s} -> n{t}{label};")
    lines.append("}")
    return "\n".join(lines) + "\n"
