"""ISCAS-style .bench netlist reader/writer.

Grammar (one statement per line, '#' starts a comment):

    INPUT(a)
    OUTPUT(y)
    y = NAND(a, b)

Net names match [A-Za-z0-9_.]+. NOT/BUFF/DFF take exactly one fanin, all
other gates at least two. Files are UTF-8; CRLF input is accepted, output
is always LF.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

GATE_OPS = ("AND", "NAND", "OR", "NOR", "XOR", "XNOR", "NOT", "BUFF", "DFF")
UNARY_OPS = ("NOT", "BUFF", "DFF")

_NAME_RE = re.compile(r"[A-Za-z0-9_.]+\Z")
_DECL_RE = re.compile(r"(INPUT|OUTPUT)\s*\(\s*([A-Za-z0-9_.]+)\s*\)\s*\Z")
_CELL_RE = re.compile(
    r"([A-Za-z0-9_.]+)\s*=\s*([A-Za-z]+)\s*\(\s*([A-Za-z0-9_.,\s]*?)\s*\)\s*\Z"
)


class BenchError(ValueError):
    """Malformed .bench input; carries a 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Cell:
    """One gate; ``name`` is the net the gate drives."""

    name: str
    op: str
    fanins: tuple[str, ...]


@dataclass
class Netlist:
    name: str
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    cells: dict[str, Cell] = field(default_factory=dict)  # insertion-ordered

    @property
    def n_gates(self) -> int:
        """Logic gates, excluding state-holding DFF cells."""
        return sum(1 for c in self.cells.values() if c.op != "DFF")

    @property
    def n_dffs(self) -> int:
        return sum(1 for c in self.cells.values() if c.op == "DFF")

    def driver_nets(self) -> set[str]:
        return set(self.inputs) | set(self.cells)


def parse_bench(text: str, name: str = "netlist") -> Netlist:
    """Parse .bench source into a Netlist.

    Raises BenchError (with line number) for syntax problems, unknown or
    mis-used operators, multiply-driven nets, and fanins that nothing
    drives.
    """
    net = Netlist(name=name)
    declared_outputs: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _DECL_RE.match(line)
        if m:
            kind, signal = m.group(1), m.group(2)
            if kind == "INPUT":
                if signal in net.inputs:
                    raise BenchError(f"duplicate INPUT({signal})", lineno)
                net.inputs.append(signal)
            else:
                if signal in declared_outputs:
                    raise BenchError(f"duplicate OUTPUT({signal})", lineno)
                declared_outputs.add(signal)
                net.outputs.append(signal)
            continue
        m = _CELL_RE.match(line)
        if m:
            out, op, args = m.group(1), m.group(2).upper(), m.group(3)
            if op not in GATE_OPS:
                raise BenchError(f"unknown gate type {op!r}", lineno)
            fanins = tuple(a.strip() for a in args.split(",")) if args.strip() else ()
            for f in fanins:
                if not _NAME_RE.match(f):
                    raise BenchError(f"bad net name {f!r}", lineno)
            if op in UNARY_OPS and len(fanins) != 1:
                raise BenchError(f"{op} takes exactly one fanin, got {len(fanins)}", lineno)
            if op not in UNARY_OPS and len(fanins) < 2:
                raise BenchError(f"{op} needs at least two fanins, got {len(fanins)}", lineno)
            if out in net.cells or out in net.inputs:
                raise BenchError(f"net {out!r} is multiply driven", lineno)
            net.cells[out] = Cell(out, op, fanins)
            continue
        raise BenchError(f"cannot parse {line!r}", lineno)

    drivers = net.driver_nets()
    for cell in net.cells.values():
        for f in cell.fanins:
            if f not in drivers:
                raise BenchError(f"net {f!r} (fanin of {cell.name!r}) is never driven")
    for out in net.outputs:
        if out not in drivers:
            raise BenchError(f"OUTPUT({out}) is never driven")
    return net


def emit_bench(net: Netlist, header: list[str] | None = None) -> str:
    """Serialize a Netlist (LF line endings).

    ``header`` lines are emitted as leading comments verbatim (each is
    prefixed with '# ').
    """
    lines = [f"# {net.name}"]
    for extra in header or ():
        lines.append(f"# {extra}")
    for signal in net.inputs:
        lines.append(f"INPUT({signal})")
    for signal in net.outputs:
        lines.append(f"OUTPUT({signal})")
    for cell in net.cells.values():
        lines.append(f"{cell.name} = {cell.op}({', '.join(cell.fanins)})")
    return "\n".join(lines) + "\n"


@dataclass
class AnnotatedNetlist:
    """A clocked netlist: every cell, PI, and output port carries a phase.

    ``netlist`` is the transformed circuit (path-balancing DFFs spliced in,
    register pairs re-merged into single DFF cells). ``depth_of`` stores the
    phase depth that determines each element's firing slots; for a register
    cell this is the shallow (output-side) depth, the deep side being
    depth + threads * n_phases.
    """

    netlist: Netlist
    n_phases: int
    threads: int
    phase_of: dict[str, int]
    depth_of: dict[str, int]
    output_phase: int
    output_depth: int
    registers: frozenset[str]
    balance: frozenset[str]
    output_taps: dict[str, str]  # logical output name -> net feeding the port
    inserted_count: int = 0

    @property
    def output_names(self) -> list[str]:
        return list(self.output_taps)

    def emit(self) -> str:
        """Serialize with phase/depth annotations as comments."""
        header = [
            f"PHASES {self.n_phases}",
            f"THREADS {self.threads}",
            f"OUTPUT_DEPTH {self.output_depth}",
        ]
        header += [f"REGISTER {name}" for name in sorted(self.registers)]
        for logical, tap in self.output_taps.items():
            header.append(f"PO {logical} {tap} {self.output_phase}")
        for name in list(self.netlist.inputs) + list(self.netlist.cells):
            header.append(f"PHASE {name} {self.phase_of[name]}")
            header.append(f"DEPTH {name} {self.depth_of[name]}")
        return emit_bench(self.netlist, header)


def parse_annotated(text: str, name: str = "netlist") -> AnnotatedNetlist:
    """Re-load an annotated netlist emitted by AnnotatedNetlist.emit()."""
    net = parse_bench(text, name)
    n_phases = threads = output_depth = None
    phase_of: dict[str, int] = {}
    depth_of: dict[str, int] = {}
    registers: set[str] = set()
    taps: dict[str, str] = {}
    output_phase = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if "#" not in raw:
            continue
        words = raw.split("#", 1)[1].split()
        if not words:
            continue
        key, args = words[0], words[1:]
        try:
            if key == "PHASES":
                n_phases = int(args[0])
            elif key == "THREADS":
                threads = int(args[0])
            elif key == "OUTPUT_DEPTH":
                output_depth = int(args[0])
            elif key == "REGISTER":
                registers.add(args[0])
            elif key == "PO":
                taps[args[0]] = args[1]
                output_phase = int(args[2])
            elif key == "PHASE":
                phase_of[args[0]] = int(args[1])
            elif key == "DEPTH":
                depth_of[args[0]] = int(args[1])
        except (IndexError, ValueError) as exc:
            raise BenchError(f"bad annotation {raw.strip()!r}: {exc}", lineno)
    if n_phases is None or threads is None or output_depth is None or output_phase is None:
        raise BenchError("missing PHASES/THREADS/OUTPUT_DEPTH/PO annotations")
    for element in list(net.inputs) + list(net.cells):
        if element not in phase_of or element not in depth_of:
            raise BenchError(f"no phase/depth annotation for {element!r}")
    balance = {c.name for c in net.cells.values() if c.op == "DFF"} - registers
    return AnnotatedNetlist(
        netlist=net,
        n_phases=n_phases,
        threads=threads,
        phase_of=phase_of,
        depth_of=depth_of,
        output_phase=output_phase,
        output_depth=output_depth,
        registers=frozenset(registers),
        balance=frozenset(balance),
        output_taps=taps,
        inserted_count=len(balance),
    )
