"""End-to-end compile flow: parse, assign depths, splice DFFs, verify, report."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Iterable

import numpy as np

from .assignment import (
    PhaseAssignment,
    count_inserted,
    extract_phases,
    insert_dffs,
    recompute_edge_costs,
)
from .bench import AnnotatedNetlist, Netlist, parse_bench
from .dag import CircuitDag, build_dag, longest_path_levels
from .formulation import ProblemInstance, formulate, formulate_fpb
from .simulator import DEFAULT_SEED, SimConfig, VerifyReport, verify
from .solver import (
    DEFAULT_TIME_LIMIT,
    FEASTOL,
    OPTIMAL,
    Solution,
    SolverError,
    round_solution,
    solve_ilp,
    solve_lp,
)

REPORT_SCHEMA = 1
MODES = ("fpb", "baseline", "fanout", "holdsafe")
SOLVERS = ("lp", "ilp", "both")


class FlowError(ValueError):
    pass


@dataclass
class FlowResult:
    """Everything a single compile produces, report included."""

    netlist: Netlist
    dag: CircuitDag
    instance: ProblemInstance
    lp: Solution
    rounded_count: int
    ilp: Solution | None
    assignment: PhaseAssignment
    annotated: AnnotatedNetlist
    verify_report: VerifyReport | None
    fpb_count: int | None
    report: dict[str, Any]

    @property
    def savings_pct(self) -> float | None:
        if self.fpb_count is None or self.fpb_count == 0:
            return None
        return round(
            100.0 * (self.fpb_count - self.annotated.inserted_count) / self.fpb_count, 1
        )


def mode_flags(mode: str) -> tuple[bool, bool]:
    """(fanout_shared, hold_safe) for a mode name."""
    if mode not in MODES:
        raise FlowError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    return mode == "fanout", mode == "holdsafe"


def _solution_dict(sol: Solution) -> dict[str, Any]:
    return {
        "status": sol.status,
        "objective": None if sol.objective is None else float(sol.objective),
        "bound": None if sol.bound is None else float(sol.bound),
        "iterations": sol.iterations,
        "branch_nodes": sol.branch_nodes,
        "wall_time": round(sol.wall_time, 6),
    }


def optimal_inserted(
    dag: CircuitDag,
    inst: ProblemInstance,
    time_limit: float = DEFAULT_TIME_LIMIT,
) -> tuple[int, Solution, Solution | None]:
    """Minimal inserted-DFF count for an instance, with an optimality proof.

    The relaxation is rounded up; when the rounded count already meets
    ceil(LP objective) the bound certifies it and branch-and-bound is
    skipped. Otherwise the rounded point warm-starts the exact solve.
    """
    rel = solve_lp(inst)
    if rel.status != OPTIMAL:
        raise FlowError(f"relaxation not solvable: {rel.status}")
    rounded = round_solution(inst, rel.values)
    count = int(round(float(inst.objective_value(rounded))))
    if count <= math.ceil(rel.objective - FEASTOL):
        return count, rel, None
    sol = solve_ilp(inst, time_limit=time_limit, warm_start=rounded)
    if sol.objective is None:
        raise FlowError(f"exact solve failed: {sol.status}")
    return int(round(sol.objective)), rel, sol


def run_flow(
    source: str,
    name: str = "circuit",
    mode: str = "baseline",
    n_phases: int = 1,
    d_loop: int | None = None,
    solver: str = "both",
    time_limit: float = DEFAULT_TIME_LIMIT,
    verify_vectors: int | None = 1000,
    seed: int = DEFAULT_SEED,
    warmup_cycles: int | None = None,
    compare_fpb: bool = True,
) -> FlowResult:
    """Compile one netlist end to end.

    solver='lp' assigns depths from the rounded relaxation, 'ilp' from the
    exact optimum, 'both' solves the two routes and cross-checks the bound
    ordering LP <= ILP <= rounded before using the exact answer.
    verify_vectors=None skips simulation.
    """
    if solver not in SOLVERS:
        raise FlowError(f"unknown solver {solver!r}; expected one of {', '.join(SOLVERS)}")
    fanout_shared, hold_safe = mode_flags(mode)
    if mode == "fpb":
        if n_phases != 1:
            raise FlowError("full path balancing is single-phase; leave n_phases at 1")
    net = parse_bench(source, name=name)
    dag = build_dag(net)
    inst = formulate(
        dag, n_phases, d_loop=d_loop, fanout_shared=fanout_shared, hold_safe=hold_safe
    )

    lp = solve_lp(inst)
    if lp.status != OPTIMAL:
        raise FlowError(f"relaxation not solvable: {lp.status}")
    rounded = round_solution(inst, lp.values)
    rounded_count = int(round(float(inst.objective_value(rounded))))

    ilp: Solution | None = None
    if solver in ("ilp", "both"):
        ilp = solve_ilp(inst, time_limit=time_limit, warm_start=rounded)
        if ilp.values is None:
            raise FlowError(f"exact solve failed: {ilp.status}")
        if solver == "both":
            # The two routes bound each other; a violation is a solver bug.
            if lp.objective > ilp.objective + FEASTOL:
                raise SolverError(
                    f"relaxation bound {lp.objective} exceeds exact optimum {ilp.objective}"
                )
            if ilp.objective > rounded_count + FEASTOL:
                raise SolverError(
                    f"exact objective {ilp.objective} exceeds rounded count {rounded_count}"
                )
        values = ilp.values
    else:
        values = rounded

    assign = extract_phases(inst, values)
    ann = insert_dffs(net, dag, assign)

    fpb_count = None
    fpb_sections: dict[str, Any] | None = None
    if compare_fpb and mode != "fpb":
        fpb_inst = formulate_fpb(dag)
        fpb_count, fpb_rel, fpb_sol = optimal_inserted(dag, fpb_inst, time_limit)
        fpb_sections = {
            "inserted": fpb_count,
            "lp_objective": float(fpb_rel.objective),
            "proved_by": "rounding_meets_bound" if fpb_sol is None else "branch_and_bound",
        }
    elif mode == "fpb":
        fpb_count = ann.inserted_count
        fpb_sections = {"inserted": fpb_count, "lp_objective": float(lp.objective),
                        "proved_by": "self"}

    vrep: VerifyReport | None = None
    if verify_vectors is not None:
        vrep = verify(
            net,
            ann,
            SimConfig(vectors_per_thread=verify_vectors, seed=seed,
                      warmup_cycles=warmup_cycles),
        )

    savings = None
    if fpb_count:
        savings = round(100.0 * (fpb_count - ann.inserted_count) / fpb_count, 1)

    report: dict[str, Any] = {
        "schema": REPORT_SCHEMA,
        "circuit": {
            "name": net.name,
            "inputs": len(net.inputs),
            "outputs": len(net.outputs),
            "gates": net.n_gates,
            "registers": net.n_dffs,
            "edges": dag.n_edges,
            "levels": max(longest_path_levels(dag)),
        },
        "params": {
            "mode": mode,
            "solver": solver,
            "n_phases": n_phases,
            "window": inst.window,
            "d_loop": inst.d_loop,
            "threads": inst.threads,
            "time_limit": time_limit,
        },
        "lp": dict(_solution_dict(lp), rounded_inserted=rounded_count),
        "ilp": None if ilp is None else _solution_dict(ilp),
        "assignment": {
            "route": "ilp" if ilp is not None else "lp_rounded",
            "inserted": ann.inserted_count,
            "output_depth": ann.output_depth,
            "output_phase": ann.output_phase,
            "latency_cycles": assign.latency_cycles,
            "max_depth": max(assign.depth),
        },
        "reference": fpb_sections and dict(fpb_sections, savings_pct=savings),
        "verify": None
        if vrep is None
        else {
            "ok": vrep.ok,
            "compared_bits": vrep.compared_bits,
            "mismatches": vrep.mismatches,
            "violations": list(vrep.violations),
            "threads": vrep.threads,
            "vectors_per_thread": vrep.vectors_per_thread,
            "seed": vrep.seed,
            "first_mismatch": vrep.first_mismatch,
        },
    }

    return FlowResult(
        netlist=net,
        dag=dag,
        instance=inst,
        lp=lp,
        rounded_count=rounded_count,
        ilp=ilp,
        assignment=assign,
        annotated=ann,
        verify_report=vrep,
        fpb_count=fpb_count,
        report=report,
    )


def batch_flow(
    named_sources: Iterable[tuple[str, str]],
    **kwargs: Any,
) -> dict[str, Any]:
    """Run the flow over (name, bench text) pairs and aggregate a totals row."""
    circuits = []
    total_inserted = 0
    total_fpb = 0
    all_ok = True
    for name, source in named_sources:
        res = run_flow(source, name=name, **kwargs)
        circuits.append(res.report)
        total_inserted += res.annotated.inserted_count
        if res.fpb_count is not None:
            total_fpb += res.fpb_count
        if res.verify_report is not None and not res.verify_report.ok:
            all_ok = False
    totals: dict[str, Any] = {
        "inserted": total_inserted,
        "fpb_inserted": total_fpb,
        "verified_ok": all_ok,
    }
    if total_fpb:
        totals["savings_pct"] = round(100.0 * (total_fpb - total_inserted) / total_fpb, 1)
    return {"schema": REPORT_SCHEMA, "circuits": circuits, "totals": totals}


def report_to_json(report: dict[str, Any]) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def strip_times(obj: Any) -> Any:
    """Copy a report with every *_time field zeroed, for determinism checks."""
    if isinstance(obj, dict):
        return {
            k: 0.0 if k.endswith("_time") else strip_times(v) for k, v in obj.items()
        }
    if isinstance(obj, list):
        return [strip_times(v) for v in obj]
    return obj


def report_text(report: dict[str, Any]) -> str:
    """Human-oriented one-screen summary of a run report."""
    c = report["circuit"]
    p = report["params"]
    a = report["assignment"]
    lines = [
        f"circuit {c['name']}: {c['inputs']} in / {c['outputs']} out, "
        f"{c['gates']} gates, {c['registers']} registers, {c['edges']} wires",
        f"mode {p['mode']}  phases {p['n_phases']}  window {p['window']}  "
        f"d_loop {p['d_loop']}  threads {p['threads']}",
    ]
    lp = report["lp"]
    lines.append(
        f"relaxation: objective {lp['objective']:.4f}  rounded {lp['rounded_inserted']}"
        f"  ({lp['iterations']} pivots, {lp['wall_time']:.3f}s)"
    )
    ilp = report["ilp"]
    if ilp is not None:
        lines.append(
            f"exact: {ilp['status']}  objective {ilp['objective']:.0f}"
            f"  ({ilp['branch_nodes']} nodes, {ilp['wall_time']:.3f}s)"
        )
    lines.append(
        f"assignment [{a['route']}]: {a['inserted']} DFFs inserted, "
        f"output depth {a['output_depth']} (phase {a['output_phase']}), "
        f"latency {a['latency_cycles']} cycles"
    )
    ref = report["reference"]
    if ref is not None and ref["proved_by"] != "self":
        pct = ref["savings_pct"]
        pct_s = "n/a" if pct is None else f"{pct:.1f}%"
        lines.append(f"full balancing needs {ref['inserted']} DFFs; saved {pct_s}")
    v = report["verify"]
    if v is not None:
        state = "OK" if v["ok"] else "FAIL"
        lines.append(
            f"verify: {state}  {v['compared_bits']} bits over {v['threads']} threads, "
            f"{v['mismatches']} mismatches, {len(v['violations'])} violations"
        )
    return "\n".join(lines) + "\n"
