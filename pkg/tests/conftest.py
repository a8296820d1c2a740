from __future__ import annotations

import pathlib

import pytest

DATA = pathlib.Path(__file__).parent / "data"
BENCHMARKS = pathlib.Path(__file__).parent.parent / "src" / "sfqclock" / "benchmarks"

# Every circuit the package ships; acceptance sweeps run over these.
SUITE = ("c17", "ladder32", "ring12", "lfsr16", "rnd300", "xtree2048")


def bench_text(name: str) -> str:
    p = BENCHMARKS / f"{name}.bench"
    if not p.exists():
        p = DATA / f"{name}.bench"
    return p.read_text()


@pytest.fixture(scope="session")
def s27_text() -> str:
    return bench_text("s27")


@pytest.fixture(scope="session")
def c17_text() -> str:
    return bench_text("c17")
