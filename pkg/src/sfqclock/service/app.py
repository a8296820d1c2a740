"""HTTP face of the compiler: thin handlers over flow.py."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..assignment import AssignmentError
from ..bench import BenchError, parse_annotated, parse_bench
from ..dag import DagError
from ..flow import FlowError, batch_flow, run_flow
from ..formulation import FormulationError
from ..simulator import SimConfig, SimulationViolation, verify
from ..solver import SolverError, export_lp_format
from .schemas import (
    BatchRequest,
    BatchResponse,
    CompileRequest,
    CompileResponse,
    HealthResponse,
    VerifyRequest,
    VerifyResponse,
)

_USER_ERRORS = (
    BenchError,
    DagError,
    FormulationError,
    AssignmentError,
    FlowError,
    SimulationViolation,
)


def create_app() -> FastAPI:
    app = FastAPI(title="sfqclock", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/compile", response_model=CompileResponse)
    def compile_circuit(req: CompileRequest) -> CompileResponse:
        try:
            res = run_flow(
                req.source,
                name=req.name,
                mode=req.mode,
                n_phases=req.n_phases,
                d_loop=req.d_loop,
                solver=req.solver,
                time_limit=req.time_limit,
                verify_vectors=req.verify_vectors,
                seed=req.seed,
                warmup_cycles=req.warmup_cycles,
                compare_fpb=req.compare_fpb,
            )
        except _USER_ERRORS as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except SolverError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        return CompileResponse(
            report=res.report,
            netlist=res.annotated.emit() if req.include_netlist else None,
            lp_text=export_lp_format(res.instance) if req.export_lp else None,
        )

    @app.post("/verify", response_model=VerifyResponse)
    def verify_circuit(req: VerifyRequest) -> VerifyResponse:
        try:
            net = parse_bench(req.source, name=req.name)
            ann = parse_annotated(req.annotated, name=req.name)
            rep = verify(
                net,
                ann,
                SimConfig(
                    vectors_per_thread=req.vectors_per_thread,
                    seed=req.seed,
                    warmup_cycles=req.warmup_cycles,
                ),
            )
        except _USER_ERRORS as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return VerifyResponse(
            ok=rep.ok,
            compared_bits=rep.compared_bits,
            mismatches=rep.mismatches,
            violations=list(rep.violations),
            threads=rep.threads,
            vectors_per_thread=rep.vectors_per_thread,
            seed=rep.seed,
            first_mismatch=rep.first_mismatch,
        )

    @app.post("/batch", response_model=BatchResponse)
    def batch(req: BatchRequest) -> BatchResponse:
        try:
            report = batch_flow(
                [(c.name, c.source) for c in req.circuits],
                mode=req.mode,
                n_phases=req.n_phases,
                d_loop=req.d_loop,
                solver=req.solver,
                time_limit=req.time_limit,
                verify_vectors=req.verify_vectors,
                seed=req.seed,
                warmup_cycles=req.warmup_cycles,
                compare_fpb=req.compare_fpb,
            )
        except _USER_ERRORS as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except SolverError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        return BatchResponse(report=report)

    return app


app = create_app()
