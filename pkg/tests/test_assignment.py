"""Phase extraction, DFF insertion, and optimality vs exhaustive search."""

import pytest

from sfqclock.assignment import (
    AssignmentError,
    count_inserted,
    extract_phases,
    insert_dffs,
    phase_of_depth,
    recompute_edge_costs,
)
from sfqclock.bench import parse_bench
from sfqclock.dag import build_dag
from sfqclock.formulation import ProblemInstance, Variable, formulate
from sfqclock.solver import round_solution, solve_ilp, solve_lp

from conftest import bench_text
from oracles import enumerate_min_inserted

DIAMOND = "INPUT(a)\nOUTPUT(y)\ng1 = NOT(a)\ny = AND(g1, a)\n"
SKIP3 = (
    "INPUT(a)\nOUTPUT(y)\n"
    "g1 = NOT(a)\ng2 = NOT(g1)\ng3 = NOT(g2)\ny = AND(g3, a)\n"
)


def _assign(text, n_phases, **kwargs):
    dag = build_dag(parse_bench(text, name="t"))
    inst = formulate(dag, n_phases, **kwargs)
    sol = solve_ilp(inst)
    assert sol.status == "optimal"
    return dag, inst, extract_phases(inst, sol.values)


def test_phase_formula_known_values():
    assert phase_of_depth(5, 2) == 1  # stage 3, first slot of the period
    assert phase_of_depth(1, 3) == 1
    assert phase_of_depth(2, 3) == 2
    assert phase_of_depth(3, 3) == 3
    assert phase_of_depth(4, 3) == 1


def test_phase_formula_periodic_and_in_range():
    for n in range(1, 6):
        for d in range(1, 40):
            p = phase_of_depth(d, n)
            assert 1 <= p <= n
            assert p == phase_of_depth(d + n, n)
    assert all(phase_of_depth(d, 1) == 1 for d in range(1, 20))


def test_diamond_needs_one_dff_single_phase_none_with_two():
    dag, inst, a1 = _assign(DIAMOND, 1)
    assert int(inst.objective_value(solve_ilp(inst).values)) == 1
    costs = recompute_edge_costs(dag, a1.depth, a1.window)
    assert count_inserted(dag, costs, False) == 1

    dag2, inst2, a2 = _assign(DIAMOND, 2)
    costs2 = recompute_edge_costs(dag2, a2.depth, a2.window)
    assert count_inserted(dag2, costs2, False) == 0


def test_skip_chain_hold_safe_triples_padding():
    # The skip edge spans a forced gap of 4: one DFF inside a 2-slot
    # window, three inside the hold-safe 1-slot window.
    dag, _, base = _assign(SKIP3, 2)
    assert count_inserted(dag, recompute_edge_costs(dag, base.depth, base.window), False) == 1

    dag_h, _, hold = _assign(SKIP3, 2, hold_safe=True)
    assert hold.window == 1
    assert count_inserted(dag_h, recompute_edge_costs(dag_h, hold.depth, hold.window), False) == 3


def test_hold_safe_no_connected_pair_shares_phase():
    for text in (DIAMOND, SKIP3, bench_text("s27"), bench_text("count8")):
        dag, inst, assign = _assign(text, 3, hold_safe=True)
        net = parse_bench(text, name="t")
        ann = insert_dffs(net, dag, assign)
        for cell in ann.netlist.cells.values():
            for f in cell.fanins:
                assert ann.phase_of[f] != ann.phase_of[cell.name], (
                    f"{f} and {cell.name} share phase {ann.phase_of[f]}"
                )


def test_extract_phases_rejects_bad_values():
    dag = build_dag(parse_bench(DIAMOND, name="t"))
    inst = formulate(dag, 2)
    sol = solve_ilp(inst)
    ok = sol.values.copy()
    ok[inst.d_index[0]] = 1.4
    with pytest.raises(AssignmentError):
        extract_phases(inst, ok)
    neg = sol.values.copy()
    neg[inst.d_index[0]] = 0.0
    with pytest.raises(AssignmentError):
        extract_phases(inst, neg)


def test_extract_phases_requires_circuit_instance():
    inst = ProblemInstance([Variable("x", 0.0, 1.0, True, "depth")], [], {0: 1.0})
    with pytest.raises(AssignmentError):
        extract_phases(inst, [0.0])


def test_edge_costs_reject_nonpositive_gap():
    dag = build_dag(parse_bench(DIAMOND, name="t"))
    with pytest.raises(AssignmentError):
        recompute_edge_costs(dag, [1] * dag.n_nodes, 2)


def test_shared_counting_takes_driver_max():
    dag = build_dag(parse_bench(DIAMOND, name="t"))
    # Edge order: a->g1, a->y, g1->y, y->PO. Give 'a' two different costs.
    costs = []
    for s, t in dag.edges:
        costs.append(2 if dag.nodes[s].net == "a" and dag.nodes[t].net == "y" else 1)
    assert count_inserted(dag, costs, False) == sum(costs)
    by_driver = sum(
        max(costs[e] for e in dag.fanout_edges[i])
        for i in range(dag.n_nodes)
        if dag.fanout_edges[i]
    )
    assert count_inserted(dag, costs, True) == by_driver
    assert by_driver < sum(costs)


def _check_annotated_invariants(net, dag, ann):
    w = ann.n_phases  # window equals N for these baseline runs
    d_loop = ann.threads * ann.n_phases
    for cell in ann.netlist.cells.values():
        sink_depth = ann.depth_of[cell.name]
        if cell.name in ann.registers:
            sink_depth += d_loop  # data enters on the deep side
        for f in cell.fanins:
            # Register fanins fire at their shallow depth, which is what
            # depth_of already stores, so no adjustment on the source side.
            gap = sink_depth - ann.depth_of[f]
            assert 1 <= gap <= w, f"{f}->{cell.name} gap {gap}"
    for name, p in ann.phase_of.items():
        assert p == phase_of_depth(ann.depth_of[name], ann.n_phases)
    for tap in ann.output_taps.values():
        gap = ann.output_depth - ann.depth_of[tap]
        assert 1 <= gap <= w
    assert ann.inserted_count == len(ann.balance)
    for name in ann.balance:
        cell = ann.netlist.cells[name]
        assert cell.op == "DFF" and len(cell.fanins) == 1


@pytest.mark.parametrize("name", ["c17", "s27", "count8", "lfsr16"])
@pytest.mark.parametrize("n_phases", [1, 2, 3])
def test_inserted_netlist_invariants(name, n_phases):
    net = parse_bench(bench_text(name), name=name)
    dag = build_dag(net)
    inst = formulate(dag, n_phases)
    assign = extract_phases(inst, round_solution(inst, solve_lp(inst).values))
    ann = insert_dffs(net, dag, assign)
    _check_annotated_invariants(net, dag, ann)
    # Original non-register cells survive with their op intact.
    for cell in net.cells.values():
        assert ann.netlist.cells[cell.name].op == cell.op
    assert ann.registers == frozenset(
        c.name for c in net.cells.values() if c.op == "DFF"
    )


def test_shared_chain_taps_are_prefixes():
    net = parse_bench(bench_text("rnd300"), name="rnd300")
    dag = build_dag(net)
    inst = formulate(dag, 2, fanout_shared=True)
    assign = extract_phases(inst, round_solution(inst, solve_lp(inst).values))
    ann = insert_dffs(net, dag, assign)
    # Every balance cell feeds from either the driver or the previous link,
    # so per driver the chain nets form one linear run: each balance DFF is
    # consumed by at least one sink or another chain cell.
    consumers = {}
    for cell in ann.netlist.cells.values():
        for f in cell.fanins:
            consumers.setdefault(f, []).append(cell.name)
    for tap in ann.output_taps.values():
        consumers.setdefault(tap, []).append("<output>")
    for name in ann.balance:
        assert name in consumers, f"dangling balance DFF {name}"
    # Sharing can only help relative to splicing each edge separately.
    assert ann.inserted_count <= sum(
        recompute_edge_costs(dag, assign.depth, assign.window)
    )


@pytest.mark.parametrize("n_phases", [1, 2, 3])
@pytest.mark.parametrize("fanout_shared", [False, True])
def test_optimal_matches_exhaustive_on_tiny_circuits(n_phases, fanout_shared):
    for text in (DIAMOND, SKIP3):
        dag = build_dag(parse_bench(text, name="t"))
        inst = formulate(dag, n_phases, fanout_shared=fanout_shared)
        sol = solve_ilp(inst)
        assert sol.status == "optimal"
        best = enumerate_min_inserted(
            dag, n_phases, inst.d_loop, inst.window, fanout_shared, max_depth=8
        )
        assert int(round(sol.objective)) == best


@pytest.mark.parametrize("n_phases", [1, 2])
def test_optimal_matches_exhaustive_with_register_loop(n_phases):
    text = (
        "INPUT(a)\nOUTPUT(y)\n"
        "q = DFF(g2)\ng1 = AND(a, q)\ng2 = NOT(g1)\ny = OR(g2, q)\n"
    )
    dag = build_dag(parse_bench(text, name="loop"))
    inst = formulate(dag, n_phases)
    sol = solve_ilp(inst)
    assert sol.status == "optimal"
    best = enumerate_min_inserted(dag, n_phases, inst.d_loop, inst.window, False, max_depth=9)
    assert int(round(sol.objective)) == best
