"""Command-line front end.

All compile work goes through the HTTP API: by default against an
in-process application instance, or against a remote server with
--server, so results are identical either way.
"""

from __future__ import annotations

import json
import pathlib
import sys

import click
import httpx

from .flow import MODES, SOLVERS, report_text, report_to_json
from .simulator import DEFAULT_SEED
from .solver import DEFAULT_TIME_LIMIT


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    # In-process bridge to the same ASGI app the server runs.
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

    from .service.app import create_app

    return TestClient(create_app(), raise_server_exceptions=False)


class _Artifacts:
    """Write-through collector; on failure everything written is removed."""

    def __init__(self) -> None:
        self.written: list[pathlib.Path] = []

    def write(self, path: str, text: str) -> None:
        p = pathlib.Path(path)
        p.write_text(text)
        self.written.append(p)

    def discard(self) -> None:
        for p in self.written:
            try:
                p.unlink()
            except OSError:
                pass


def _fail(message: str, artifacts: _Artifacts | None = None) -> None:
    if artifacts is not None:
        artifacts.discard()
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _post(client: httpx.Client, path: str, payload: dict, artifacts: _Artifacts | None = None):
    try:
        resp = client.post(path, json=payload)
    except httpx.HTTPError as exc:
        _fail(f"cannot reach service: {exc}", artifacts)
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        _fail(str(detail), artifacts)
    return resp.json()


_shared_options = [
    click.option("--mode", type=click.Choice(MODES), default="baseline", show_default=True),
    click.option("--phases", "-N", type=int, default=2, show_default=True,
                 help="clock phases per cycle"),
    click.option("--dloop", type=int, default=None,
                 help="register loop depth gap (multiple of phases; default: smallest feasible)"),
    click.option("--solver", type=click.Choice(SOLVERS), default="both", show_default=True),
    click.option("--time-limit", type=float, default=DEFAULT_TIME_LIMIT, show_default=True),
    click.option("--verify", "verify_vectors", type=int, default=1000, show_default=True,
                 help="random vectors per thread for equivalence checking"),
    click.option("--no-verify", is_flag=True, help="skip simulation"),
    click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True),
    click.option("--warmup", type=int, default=None, help="override warm-up cycle count"),
    click.option("--no-fpb", is_flag=True, help="skip the full-balancing reference"),
    click.option("--report", "report_fmt", type=click.Choice(["text", "json"]),
                 default="text", show_default=True),
    click.option("--report-file", type=click.Path(dir_okay=False), default=None),
    click.option("--server", default=None, metavar="URL",
                 help="use a running service instead of in-process"),
]


def _apply(options):
    def wrap(f):
        for opt in reversed(options):
            f = opt(f)
        return f

    return wrap


def _params(mode, phases, dloop, solver, time_limit, verify_vectors, no_verify,
            seed, warmup, no_fpb) -> dict:
    return {
        "mode": mode,
        "n_phases": phases,
        "d_loop": dloop,
        "solver": solver,
        "time_limit": time_limit,
        "verify_vectors": None if no_verify else verify_vectors,
        "seed": seed,
        "warmup_cycles": warmup,
        "compare_fpb": not no_fpb,
    }


@click.group()
def main() -> None:
    """Multi-phase clocking assignment for pulse-logic netlists."""


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="netlist in .bench format")
@_apply(_shared_options)
@click.option("--emit", type=click.Path(dir_okay=False), default=None,
              help="write the annotated clocked netlist here")
@click.option("--export-lp", type=click.Path(dir_okay=False), default=None,
              help="write the program in LP text format here")
@click.option("--dump-dot", type=click.Path(dir_okay=False), default=None,
              help="write the circuit graph in DOT format here")
@click.option("--dump-vcd", type=click.Path(dir_okay=False), default=None,
              help="write simulation waveforms here")
def run(input_path, mode, phases, dloop, solver, time_limit, verify_vectors, no_verify,
        seed, warmup, no_fpb, report_fmt, report_file, server,
        emit, export_lp, dump_dot, dump_vcd) -> None:
    """Compile one netlist."""
    source = pathlib.Path(input_path).read_text()
    name = pathlib.Path(input_path).stem
    payload = dict(
        _params(mode, phases, dloop, solver, time_limit, verify_vectors, no_verify,
                seed, warmup, no_fpb),
        source=source,
        name=name,
        include_netlist=True,
        export_lp=export_lp is not None,
    )
    artifacts = _Artifacts()
    with _client(server) as client:
        body = _post(client, "/compile", payload, artifacts)
    report = body["report"]

    try:
        if emit:
            artifacts.write(emit, body["netlist"])
        if export_lp:
            artifacts.write(export_lp, body["lp_text"])
        if dump_dot:
            from .bench import parse_bench
            from .dag import build_dag, to_dot

            artifacts.write(dump_dot, to_dot(build_dag(parse_bench(source, name=name))))
        if dump_vcd:
            from .bench import parse_annotated
            from .simulator import SimConfig
            from .vcd import dump_vcd as render_vcd

            ann = parse_annotated(body["netlist"], name=name)
            vectors = 32 if no_verify else min(verify_vectors, 256)
            artifacts.write(
                dump_vcd,
                render_vcd(ann, SimConfig(vectors_per_thread=vectors, seed=seed,
                                          warmup_cycles=warmup)),
            )
        if report_file:
            artifacts.write(report_file, report_to_json(report))
    except OSError as exc:
        _fail(f"cannot write artifact: {exc}", artifacts)

    if report_fmt == "json":
        click.echo(report_to_json(report), nl=False)
    else:
        click.echo(report_text(report), nl=False)

    v = report.get("verify")
    if v is not None and not v["ok"]:
        _fail("verification failed")


@main.command()
@click.option("--input", "input_paths", type=click.Path(exists=True, dir_okay=False),
              required=True, multiple=True, help="netlist file; repeatable")
@_apply(_shared_options)
def batch(input_paths, mode, phases, dloop, solver, time_limit, verify_vectors, no_verify,
          seed, warmup, no_fpb, report_fmt, report_file, server) -> None:
    """Compile several netlists and aggregate the counts."""
    circuits = [
        {"name": pathlib.Path(p).stem, "source": pathlib.Path(p).read_text()}
        for p in input_paths
    ]
    payload = dict(
        _params(mode, phases, dloop, solver, time_limit, verify_vectors, no_verify,
                seed, warmup, no_fpb),
        circuits=circuits,
    )
    artifacts = _Artifacts()
    with _client(server) as client:
        body = _post(client, "/batch", payload, artifacts)
    report = body["report"]

    try:
        if report_file:
            artifacts.write(report_file, report_to_json(report))
    except OSError as exc:
        _fail(f"cannot write artifact: {exc}", artifacts)

    if report_fmt == "json":
        click.echo(report_to_json(report), nl=False)
    else:
        for rep in report["circuits"]:
            c, a, ref, v = rep["circuit"], rep["assignment"], rep["reference"], rep["verify"]
            parts = [f"{c['name']}: inserted {a['inserted']}"]
            if ref is not None:
                parts.append(f"fpb {ref['inserted']}")
                if ref["savings_pct"] is not None:
                    parts.append(f"saved {ref['savings_pct']:.1f}%")
            if v is not None:
                parts.append("verify OK" if v["ok"] else "verify FAIL")
            click.echo("  ".join(parts))
        t = report["totals"]
        line = f"total: inserted {t['inserted']}  fpb {t['fpb_inserted']}"
        if "savings_pct" in t:
            line += f"  saved {t['savings_pct']:.1f}%"
        click.echo(line)

    if not report["totals"]["verified_ok"]:
        _fail("verification failed for at least one circuit")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host: str, port: int) -> None:
    """Start the HTTP service."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
