"""Quick solve sweep over the bundled circuits.

Dev utility: prints LP / rounded / exact counts per (circuit, mode, N) at a
short time limit so changes to the formulation or solver are easy to eyeball.
Not part of the test suite.

Usage: python3 tools/probe_bundle.py [circuit ...] [--limit SECONDS]
"""

import argparse
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from sfqclock.bench import parse_bench
from sfqclock.dag import build_dag
from sfqclock.formulation import formulate
from sfqclock.solver import round_solution, solve_ilp, solve_lp

BENCH_DIR = ROOT / "src" / "sfqclock" / "benchmarks"


def probe(name, mode, n, limit):
    net = parse_bench((BENCH_DIR / f"{name}.bench").read_text(), name=name)
    inst = formulate(
        build_dag(net), n,
        fanout_shared=mode == "fanout", hold_safe=mode == "holdsafe",
    )
    lp = solve_lp(inst)
    rounded = int(round(inst.objective_value(round_solution(inst, lp.values))))
    ilp = solve_ilp(inst, time_limit=limit)
    ratio = rounded / ilp.objective if ilp.objective else 1.0
    print(
        f"{name:10s} {mode:8s} N{n}  dloop={inst.d_loop:2d}  "
        f"lp={lp.objective:8.2f}  rounded={rounded:4d}  "
        f"ilp={ilp.objective:6.0f} [{ilp.status}, {ilp.branch_nodes} nodes, "
        f"{ilp.wall_time:5.1f}s]  ratio={ratio:.3f}",
        flush=True,
    )


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("circuits", nargs="*",
                    default=[p.stem for p in sorted(BENCH_DIR.glob("*.bench"))])
    ap.add_argument("--limit", type=float, default=60.0)
    args = ap.parse_args()
    for name in args.circuits:
        for mode in ("baseline", "fanout", "holdsafe"):
            for n in (1, 2, 3, 4):
                if mode == "holdsafe" and n == 1:
                    continue
                probe(name, mode, n, args.limit)


if __name__ == "__main__":
    main()
