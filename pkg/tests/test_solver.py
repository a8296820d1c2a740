"""Solver tests: branch-and-bound vs exhaustive search, rounding, LP export."""

import re

import numpy as np
import pytest

from sfqclock.bench import parse_bench
from sfqclock.dag import build_dag
from sfqclock.formulation import LinearConstraint, ProblemInstance, Variable, formulate
from sfqclock.solver import (
    FEASTOL,
    INFEASIBLE,
    OPTIMAL,
    SolverError,
    export_lp_format,
    round_solution,
    solve_ilp,
    solve_lp,
    verify_integral,
)

from conftest import bench_text
from oracles import brute_force_ilp


def _random_ilp(rng):
    """Small box-bounded integer program with integer data."""
    n = int(rng.integers(2, 7))
    variables = []
    for j in range(n):
        lb = int(rng.integers(0, 3))
        ub = int(rng.integers(lb + 1, 9))
        variables.append(Variable(f"x{j}", float(lb), float(ub), True, "edge_cost"))
    mid = np.array([(v.lb + v.ub) / 2 for v in variables])
    cons = []
    for k in range(int(rng.integers(1, 5))):
        picks = rng.choice(n, size=int(rng.integers(1, min(3, n) + 1)), replace=False)
        coeffs = tuple(
            (int(j), float(rng.choice([-3, -2, -1, 1, 2, 3]))) for j in picks
        )
        sense = str(rng.choice(["<=", ">=", "=="]))
        anchor = sum(a * mid[j] for j, a in coeffs)
        rhs = float(int(round(anchor)) + int(rng.integers(-4, 5)))
        cons.append(LinearConstraint(coeffs, sense, rhs, f"r{k}"))
    obj = {}
    while not obj:
        for j in range(n):
            c = int(rng.integers(-3, 4))
            if c:
                obj[j] = float(c)
    return ProblemInstance(variables, cons, obj)


def test_random_ilps_match_brute_force():
    rng = np.random.default_rng(20260814)
    solved = 0
    for _ in range(80):
        inst = _random_ilp(rng)
        ref_status, ref_obj, _ = brute_force_ilp(inst)
        sol = solve_ilp(inst)
        if ref_status == "infeasible":
            assert sol.status == INFEASIBLE
            continue
        assert sol.status == OPTIMAL
        assert sol.objective == pytest.approx(ref_obj, abs=1e-6)
        verify_integral(inst, sol.values)
        lp = solve_lp(inst)
        if lp.status == OPTIMAL:
            assert lp.objective <= sol.objective + FEASTOL
        solved += 1
    assert solved >= 20, "generator should produce a healthy mix"


def test_warm_start_never_worse_and_usually_cheaper():
    rng = np.random.default_rng(99)
    cheaper = total = 0
    for _ in range(60):
        inst = _random_ilp(rng)
        cold = solve_ilp(inst)
        if cold.status != OPTIMAL:
            continue
        warm = solve_ilp(inst, warm_start=cold.values)
        assert warm.status == OPTIMAL
        assert warm.objective <= cold.objective + FEASTOL
        total += 1
        cheaper += warm.branch_nodes <= cold.branch_nodes
    assert total >= 15
    assert cheaper / total >= 0.9


def test_warm_start_must_be_feasible():
    dag = build_dag(parse_bench(bench_text("c17"), name="c17"))
    inst = formulate(dag, 2)
    bad = np.zeros(inst.n_vars)
    with pytest.raises(SolverError):
        solve_ilp(inst, warm_start=bad)


def test_infeasible_instance_detected():
    variables = [Variable("x", 0.0, 5.0, True, "depth")]
    cons = [
        LinearConstraint(((0, 1.0),), ">=", 4.0, "lo"),
        LinearConstraint(((0, 1.0),), "<=", 2.0, "hi"),
    ]
    inst = ProblemInstance(variables, cons, {0: 1.0})
    assert solve_lp(inst).status == INFEASIBLE
    assert solve_ilp(inst).status == INFEASIBLE


def test_time_limit_returns_warm_incumbent():
    dag = build_dag(parse_bench(bench_text("add8"), name="add8"))
    inst = formulate(dag, 2)
    warm = round_solution(inst, solve_lp(inst).values)
    sol = solve_ilp(inst, time_limit=0.0, warm_start=warm)
    assert sol.status == "incumbent"
    assert sol.objective == pytest.approx(inst.objective_value(warm))


@pytest.mark.parametrize("name", ["c17", "add8", "count8", "lfsr16"])
@pytest.mark.parametrize("n_phases", [1, 2, 3])
@pytest.mark.parametrize("fanout_shared", [False, True])
def test_rounding_always_feasible(name, n_phases, fanout_shared):
    dag = build_dag(parse_bench(bench_text(name), name=name))
    inst = formulate(dag, n_phases, fanout_shared=fanout_shared)
    lp = solve_lp(inst)
    assert lp.status == OPTIMAL
    x = round_solution(inst, lp.values)
    verify_integral(inst, x)  # raises if not feasible
    assert inst.objective_value(x) >= lp.objective - FEASTOL


def test_descent_no_worse_than_plain_ceiling():
    for name in ("c17", "add8", "count8", "lfsr16", "rnd300"):
        dag = build_dag(parse_bench(bench_text(name), name=name))
        for n_phases in (1, 2, 4):
            inst = formulate(dag, n_phases)
            lp = solve_lp(inst)
            plain = inst.objective_value(round_solution(inst, lp.values, descend=False))
            walked = inst.objective_value(round_solution(inst, lp.values, descend=True))
            assert walked <= plain + FEASTOL


def test_verify_integral_rejects_corruption():
    dag = build_dag(parse_bench(bench_text("c17"), name="c17"))
    inst = formulate(dag, 2)
    x = round_solution(inst, solve_lp(inst).values)
    bad = x.copy()
    bad[inst.d_index[dag.pis[0]]] += 1  # breaks the input pin constraint
    with pytest.raises(SolverError):
        verify_integral(inst, bad)
    frac = x.copy()
    frac[inst.d_outputs_index] += 0.5
    with pytest.raises(SolverError):
        verify_integral(inst, frac)


def test_lp_engines_agree():
    dag = build_dag(parse_bench(bench_text("add8"), name="add8"))
    inst = formulate(dag, 2)
    a = solve_lp(inst, engine="simplex")
    b = solve_lp(inst, engine="scipy")
    assert a.status == b.status == OPTIMAL
    assert a.objective == pytest.approx(b.objective, abs=1e-6)


def test_fanout_shared_ilp_solution_integral_where_it_must_be():
    # Shared-driver instances keep per-edge costs continuous; the reported
    # optimum must still satisfy every constraint and have integer depths
    # and driver counters.
    dag = build_dag(parse_bench(bench_text("lfsr16"), name="lfsr16"))
    inst = formulate(dag, 2, fanout_shared=True)
    sol = solve_ilp(inst)
    assert sol.status == OPTIMAL
    verify_integral(inst, sol.values)
    for j in list(inst.d_index.values()) + list(inst.c_driver_index.values()):
        assert float(sol.values[j]).is_integer()


_TERM = re.compile(r"([+-])?\s*(\d+(?:\.\d+)?(?=\s))?\s*([A-Za-z_][\w.]*)")


def _parse_expr(expr):
    out = {}
    for sign, mag, name in _TERM.findall(expr):
        coef = float(mag) if mag else 1.0
        if sign == "-":
            coef = -coef
        out[name] = out.get(name, 0.0) + coef
    return out


def _parse_lp_text(text):
    section = None
    obj, cons, bounds, general = {}, [], {}, []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        low = line.lower()
        if low in ("minimize", "subject to", "bounds", "general", "end"):
            section = low
            continue
        if section == "minimize":
            obj = _parse_expr(line.split(":", 1)[1])
        elif section == "subject to":
            tag, rest = line.split(":", 1)
            m = re.match(r"(.+?)(<=|>=|=)\s*(-?[\d.]+)$", rest.strip())
            cons.append((tag, _parse_expr(m.group(1)), m.group(2), float(m.group(3))))
        elif section == "bounds":
            m = re.match(r"(-?[\d.]+)\s*<=\s*([\w.]+)\s*<=\s*(-?[\d.]+)$", line)
            if m:
                bounds[m.group(2)] = (float(m.group(1)), float(m.group(3)))
            else:
                m = re.match(r"([\w.]+)\s*>=\s*(-?[\d.]+)$", line)
                bounds[m.group(1)] = (float(m.group(2)), None)
        elif section == "general":
            general.extend(line.split())
    return obj, cons, bounds, general


@pytest.mark.parametrize("fanout_shared", [False, True])
def test_lp_export_round_trips(fanout_shared):
    dag = build_dag(parse_bench(bench_text("count8"), name="count8"))
    inst = formulate(dag, 2, fanout_shared=fanout_shared)
    obj, cons, bounds, general = _parse_lp_text(export_lp_format(inst))

    want_obj = {inst.variables[j].name: a for j, a in inst.objective.items()}
    assert obj == want_obj

    assert len(cons) == len(inst.constraints)
    for (tag, lhs, op, rhs), con in zip(cons, inst.constraints):
        assert tag.strip().startswith(con.tag)
        want = {inst.variables[j].name: a for j, a in con.coeffs}
        assert lhs == want
        assert {"<=": "<=", ">=": ">=", "==": "="}[con.sense] == op
        assert rhs == con.rhs

    for var in inst.variables:
        if var.ub is not None:
            assert bounds[var.name] == (var.lb, var.ub)
        elif var.lb != 0:
            assert bounds[var.name] == (var.lb, None)

    assert general == [v.name for v in inst.variables if v.integer]


def test_lp_export_relaxed_variant_drops_general():
    dag = build_dag(parse_bench(bench_text("c17"), name="c17"))
    inst = formulate(dag, 2)
    text = export_lp_format(inst, integer=False)
    assert "General" not in text
    assert text.rstrip().endswith("End")
