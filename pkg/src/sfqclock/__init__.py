"""Multi-phase clocking assignment for gate-level SFQ circuits."""

from .bench import AnnotatedNetlist, BenchError, Cell, Netlist, emit_bench, parse_annotated, parse_bench
from .dag import CircuitDag, DagError, build_dag, min_feasible_dloop, to_dot, topological_order
from .formulation import FormulationError, ProblemInstance, formulate, formulate_fpb
from .solver import Solution, export_lp_format, round_solution, solve_ilp, solve_lp, verify_integral
from .assignment import PhaseAssignment, count_inserted, extract_phases, insert_dffs, recompute_edge_costs
from .simulator import (
    DEFAULT_SEED,
    SimConfig,
    SimulationViolation,
    Trace,
    VerifyReport,
    random_stimuli,
    simulate_golden,
    simulate_multiphase,
    verify,
)
from .flow import (
    FlowError,
    FlowResult,
    batch_flow,
    report_text,
    report_to_json,
    run_flow,
    strip_times,
)
from .vcd import dump_vcd

__version__ = "0.1.0"

__all__ = [
    "AnnotatedNetlist",
    "BenchError",
    "Cell",
    "CircuitDag",
    "DagError",
    "DEFAULT_SEED",
    "FlowError",
    "FlowResult",
    "FormulationError",
    "Netlist",
    "PhaseAssignment",
    "ProblemInstance",
    "SimConfig",
    "SimulationViolation",
    "Solution",
    "Trace",
    "VerifyReport",
    "batch_flow",
    "build_dag",
    "count_inserted",
    "dump_vcd",
    "emit_bench",
    "export_lp_format",
    "extract_phases",
    "formulate",
    "formulate_fpb",
    "insert_dffs",
    "min_feasible_dloop",
    "parse_annotated",
    "parse_bench",
    "random_stimuli",
    "recompute_edge_costs",
    "report_text",
    "report_to_json",
    "round_solution",
    "run_flow",
    "simulate_golden",
    "simulate_multiphase",
    "solve_ilp",
    "solve_lp",
    "strip_times",
    "to_dot",
    "topological_order",
    "verify",
    "verify_integral",
]
