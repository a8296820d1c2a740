"""From solved depths to a clocked netlist with balancing DFFs spliced in.

Phase depth D maps to stage S = ceil(D / N) and clock phase
CLK = D - S*N + N, so elements one full period apart share a phase. A wire
with depth gap g needs ceil(g / W) - 1 balancing DFFs (window W = N, or
N - 1 hold-safe); they are placed W apart starting from the driver, which
leaves the residual gap adjacent to the sink. In the fanout-shared variant
each driver grows a single chain of length max(C_ij) and every fanout taps
the chain at its own C_ij. Register pairs are re-merged into a single DFF
cell whose two sides, d_loop apart, land on the same phase by
construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bench import AnnotatedNetlist, Cell, Netlist
from .dag import GATE, PI, PSI, CircuitDag
from .formulation import ProblemInstance


class AssignmentError(ValueError):
    pass


def phase_of_depth(depth: int, n_phases: int) -> int:
    stage = math.ceil(depth / n_phases)
    return depth - stage * n_phases + n_phases


@dataclass
class PhaseAssignment:
    n_phases: int
    threads: int
    window: int
    fanout_shared: bool
    depth: list[int]  # per DAG node
    stage: list[int]
    phase: list[int]
    d_outputs: int

    @property
    def latency_cycles(self) -> int:
        """Cycles between first injection and first valid output."""
        return math.ceil(self.d_outputs / self.n_phases) - 1


def extract_phases(inst: ProblemInstance, values: np.ndarray) -> PhaseAssignment:
    """Read integral depths out of a solved instance and derive stages/phases."""
    dag = inst.dag
    if dag is None:
        raise AssignmentError("instance does not describe a circuit")
    n = inst.n_phases
    depth = [0] * dag.n_nodes
    for idx, j in inst.d_index.items():
        v = float(values[j])
        if abs(v - round(v)) > 1e-6 or round(v) < 1:
            raise AssignmentError(f"depth of {dag.nodes[idx].name} not a positive integer: {v}")
        depth[idx] = int(round(v))
    d_outputs = int(round(float(values[inst.d_outputs_index])))
    stage = [math.ceil(d / n) for d in depth]
    phase = [phase_of_depth(d, n) for d in depth]
    return PhaseAssignment(
        n_phases=n,
        threads=inst.threads,
        window=inst.window,
        fanout_shared=inst.fanout_shared,
        depth=depth,
        stage=stage,
        phase=phase,
        d_outputs=d_outputs,
    )


def recompute_edge_costs(dag: CircuitDag, depth: list[int], window: int) -> list[int]:
    """Balancing-DFF count per edge from final depths: ceil(gap / W) - 1."""
    costs = []
    for s, t in dag.edges:
        gap = depth[t] - depth[s]
        if gap < 1:
            raise AssignmentError(
                f"edge {dag.nodes[s].name} -> {dag.nodes[t].name} has non-positive gap {gap}"
            )
        costs.append((gap - 1) // window)
    return costs


def count_inserted(dag: CircuitDag, costs: list[int], fanout_shared: bool) -> int:
    if not fanout_shared:
        return sum(costs)
    total = 0
    for idx in range(dag.n_nodes):
        if dag.fanout_edges[idx]:
            total += max(costs[e] for e in dag.fanout_edges[idx])
    return total


def insert_dffs(net: Netlist, dag: CircuitDag, assign: PhaseAssignment) -> AnnotatedNetlist:
    """Build the clocked netlist: splice chains, re-merge registers, tap outputs."""
    costs = recompute_edge_costs(dag, assign.depth, assign.window)
    w = assign.window
    n = assign.n_phases

    taken = set(net.driver_nets())
    phase_of: dict[str, int] = {}
    depth_of: dict[str, int] = {}
    chains: list[Cell] = []
    edge_tap: dict[int, str] = {}

    def fresh(base: str) -> str:
        name = base
        while name in taken:
            name += "_"
        taken.add(name)
        return name

    def grow_chain(driver_net: str, src_idx: int, length: int, tag: str) -> list[str]:
        nets = []
        prev = driver_net
        for m in range(1, length + 1):
            name = fresh(f"{driver_net}_pb{m}{tag}")
            chains.append(Cell(name, "DFF", (prev,)))
            d = assign.depth[src_idx] + m * w
            depth_of[name] = d
            phase_of[name] = phase_of_depth(d, n)
            nets.append(name)
            prev = name
        return nets

    for idx, node in enumerate(dag.nodes):
        edges = dag.fanout_edges[idx]
        if not edges:
            continue
        if assign.fanout_shared:
            chain = grow_chain(node.net, idx, max(costs[e] for e in edges), "")
            for e in edges:
                edge_tap[e] = chain[costs[e] - 1] if costs[e] else node.net
        else:
            for k, e in enumerate(edges):
                if costs[e]:
                    edge_tap[e] = grow_chain(node.net, idx, costs[e], f"_{k}")[-1]
                else:
                    edge_tap[e] = node.net

    # Sinks listed per node so cells can be rewired by looking up their edge.
    edge_into: dict[int, dict[int, str]] = {}
    for e, (s, t) in enumerate(dag.edges):
        edge_into.setdefault(t, {})[s] = edge_tap[e]

    source_node: dict[str, int] = {}
    for node in dag.nodes:
        if node.kind in (PI, PSI, GATE):
            source_node[node.net] = node.idx

    new = Netlist(name=net.name, inputs=list(net.inputs))
    registers = set()
    for cell in net.cells.values():
        if cell.op == "DFF":
            registers.add(cell.name)
    pso_of = {dag.nodes[pso].net: pso for pso, _ in dag.register_pairs}
    psi_of = {dag.nodes[psi].net: psi for _, psi in dag.register_pairs}

    for cell in net.cells.values():
        if cell.op == "DFF":
            sink = pso_of[cell.name]
            fanins = (edge_into[sink][source_node[cell.fanins[0]]],)
            depth_of[cell.name] = assign.depth[psi_of[cell.name]]
        else:
            sink = source_node[cell.name]
            fanins = tuple(edge_into[sink][source_node[f]] for f in cell.fanins)
            depth_of[cell.name] = assign.depth[sink]
        phase_of[cell.name] = phase_of_depth(depth_of[cell.name], n)
        new.cells[cell.name] = Cell(cell.name, cell.op, fanins)
    for cell in chains:
        new.cells[cell.name] = cell
    for signal in net.inputs:
        depth_of[signal] = 1
        phase_of[signal] = phase_of_depth(1, n)

    output_taps: dict[str, str] = {}
    for po_idx in dag.pos:
        node = dag.nodes[po_idx]
        tap = edge_into[po_idx][source_node[node.net]]
        output_taps[node.net] = tap
        new.outputs.append(tap)

    inserted = count_inserted(dag, costs, assign.fanout_shared)
    assert inserted == len(chains)
    return AnnotatedNetlist(
        netlist=new,
        n_phases=n,
        threads=assign.threads,
        phase_of=phase_of,
        depth_of=depth_of,
        output_phase=phase_of_depth(assign.d_outputs, n),
        output_depth=assign.d_outputs,
        registers=frozenset(registers),
        balance=frozenset(c.name for c in chains),
        output_taps=output_taps,
        inserted_count=inserted,
    )
