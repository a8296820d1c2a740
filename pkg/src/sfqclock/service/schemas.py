"""Request/response models for the HTTP service."""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field

from ..flow import MODES, SOLVERS
from ..simulator import DEFAULT_SEED
from ..solver import DEFAULT_TIME_LIMIT


class FlowParams(BaseModel):
    mode: str = Field("baseline", description=f"one of {', '.join(MODES)}")
    n_phases: int = Field(1, ge=1)
    d_loop: int | None = Field(None, ge=1)
    solver: str = Field("both", description=f"one of {', '.join(SOLVERS)}")
    time_limit: float = Field(DEFAULT_TIME_LIMIT, gt=0)
    verify_vectors: int | None = Field(1000, ge=1)
    seed: int = DEFAULT_SEED
    warmup_cycles: int | None = Field(None, ge=0)
    compare_fpb: bool = True


class CompileRequest(FlowParams):
    source: str = Field(..., description="netlist in .bench format")
    name: str = "circuit"
    include_netlist: bool = Field(True, description="return the annotated netlist text")
    export_lp: bool = Field(False, description="return the program in LP text format")


class CompileResponse(BaseModel):
    report: dict[str, Any]
    netlist: str | None = None
    lp_text: str | None = None


class VerifyRequest(BaseModel):
    source: str = Field(..., description="original netlist, the reference behaviour")
    annotated: str = Field(..., description="clocked netlist with phase annotations")
    name: str = "circuit"
    vectors_per_thread: int = Field(1000, ge=1)
    seed: int = DEFAULT_SEED
    warmup_cycles: int | None = Field(None, ge=0)


class VerifyResponse(BaseModel):
    ok: bool
    compared_bits: int
    mismatches: int
    violations: list[str]
    threads: int
    vectors_per_thread: int
    seed: int
    first_mismatch: str | None = None


class BatchCircuit(BaseModel):
    name: str
    source: str


class BatchRequest(FlowParams):
    circuits: list[BatchCircuit] = Field(..., min_length=1)


class BatchResponse(BaseModel):
    report: dict[str, Any]


class HealthResponse(BaseModel):
    status: str
    version: str
