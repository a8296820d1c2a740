"""Token-level simulation of clocked netlists, plus the golden reference.

The multi-phase model is slot-driven: slot t carries phase (t mod N) + 1
and every element fires at its labeled phase. A firing consumes the
latched fanin tokens (they must be all present or all absent - a mixed
state means the clocking is wrong), computes the cell function, and writes
one token into each fanout latch; writes commit at the end of the slot, so
a token never feeds a firing in its own slot. Overwriting a still-full
latch is a violation. Primary inputs inject one vector per cycle at phase
1, cycle c belonging to thread c mod T; outputs fire at the shared output
phase and are demuxed per thread after a warm-up prefix.

A merged register cell stores its token in its own input latch: the read
event for thread t's next step lands exactly d_loop slots after the write,
so the cell passes its input through at each firing and emits initial-state
zeros for its first T firings (one per thread) while the loop fills.

The golden model is plain synchronous semantics: combinational cells
evaluated in topological order every step, DFFs with unit delay and
initial state 0, no X propagation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bench import AnnotatedNetlist, Netlist

DEFAULT_SEED = 0xC10C4

_REDUCE = {
    "AND": np.bitwise_and.reduce,
    "NAND": np.bitwise_and.reduce,
    "OR": np.bitwise_or.reduce,
    "NOR": np.bitwise_or.reduce,
    "XOR": np.bitwise_xor.reduce,
    "XNOR": np.bitwise_xor.reduce,
}
_INVERTING = {"NAND", "NOR", "XNOR", "NOT"}


class SimulationViolation(RuntimeError):
    """Synchronization broken: mixed fanin arrival or a latch overwrite."""


@dataclass
class SimConfig:
    vectors_per_thread: int = 1000
    seed: int = DEFAULT_SEED
    warmup_cycles: int | None = None  # default: ceil(D_out / N) + T, padded to a multiple of T


@dataclass
class Trace:
    threads: int
    outputs: list[str]
    streams: np.ndarray  # (threads, vectors_per_thread, n_outputs) uint8
    warmup_cycles: int
    total_cycles: int


@dataclass
class VerifyReport:
    ok: bool
    compared_bits: int = 0
    mismatches: int = 0
    violations: list[str] = field(default_factory=list)
    threads: int = 1
    vectors_per_thread: int = 0
    seed: int = DEFAULT_SEED
    first_mismatch: str | None = None


def random_stimuli(n_inputs: int, threads: int, steps: int, seed: int) -> np.ndarray:
    """(threads, steps, n_inputs) uint8 bits from a PCG64 stream."""
    gen = np.random.Generator(np.random.PCG64(seed))
    return gen.integers(0, 2, size=(threads, steps, n_inputs), dtype=np.uint8)


def _eval_op(op: str, rows: np.ndarray) -> np.ndarray:
    if op in ("NOT", "BUFF", "DFF"):
        out = rows[:, 0]
    else:
        out = _REDUCE[op](rows, axis=1)
    if op in _INVERTING:
        out = (1 - out).astype(np.uint8)
    return out


class _Engine:
    """Precompiled slot-simulation structure for one annotated netlist."""

    def __init__(self, ann: AnnotatedNetlist):
        self.ann = ann
        net = ann.netlist
        self.n = ann.n_phases
        self.threads = ann.threads

        # One latch per (driver net, sink element); duplicate fanin slots share it.
        self.latch_driver: list[str] = []
        self.latch_sink: list[str] = []
        fanout_latches: dict[str, list[int]] = {s: [] for s in net.driver_nets()}

        def new_latch(driver: str, sink: str) -> int:
            idx = len(self.latch_driver)
            self.latch_driver.append(driver)
            self.latch_sink.append(sink)
            fanout_latches[driver].append(idx)
            return idx

        cell_in: dict[str, list[int]] = {}
        for cell in net.cells.values():
            seen: dict[str, int] = {}
            for f in cell.fanins:
                if f not in seen:  # duplicate fanins share one latch
                    seen[f] = new_latch(f, cell.name)
            cell_in[cell.name] = [seen[f] for f in cell.fanins]
        self.po_latch = [
            new_latch(tap, f"output {logical}") for logical, tap in ann.output_taps.items()
        ]
        self.n_latches = len(self.latch_driver)

        def out_arrays(names):
            ptr = [0]
            flat: list[int] = []
            for name in names:
                flat.extend(fanout_latches[name])
                ptr.append(len(flat))
            counts = np.diff(np.array(ptr))
            return np.array(flat, dtype=np.int64), counts

        # Primary inputs (all inject at phase 1).
        self.pi_out, self.pi_counts = out_arrays(net.inputs)

        # Group plain cells by (phase, op, arity); registers get their own group.
        plain: dict[tuple[int, str, int], list[str]] = {}
        regs_by_phase: dict[int, list[str]] = {}
        for cell in net.cells.values():
            if cell.name in ann.registers:
                regs_by_phase.setdefault(ann.phase_of[cell.name], []).append(cell.name)
            else:
                key = (ann.phase_of[cell.name], cell.op, len(cell.fanins))
                plain.setdefault(key, []).append(cell.name)

        self.groups: dict[int, list] = {p: [] for p in range(1, self.n + 1)}
        for (phase, op, arity), names in sorted(plain.items()):
            fin = np.array([cell_in[nm] for nm in names], dtype=np.int64)
            out_flat, counts = out_arrays(names)
            self.groups[phase].append((op, arity, names, fin, out_flat, counts))

        self.regs: dict[int, tuple] = {}
        for phase, names in sorted(regs_by_phase.items()):
            in_latch = np.array([cell_in[nm][0] for nm in names], dtype=np.int64)
            emit_start = np.array([ann.depth_of[nm] - 1 for nm in names], dtype=np.int64)
            consume_start = emit_start + self.threads * self.n
            out_flat, counts = out_arrays(names)
            self.regs[phase] = (names, in_latch, emit_start, consume_start, out_flat, counts)

        self.po_in = np.array(self.po_latch, dtype=np.int64)
        self.out_phase = ann.output_phase
        self.out_depth = ann.output_depth

    def _violation(self, kind: str, latches, slot: int):
        where = ", ".join(
            f"{self.latch_driver[i]} -> {self.latch_sink[i]}" for i in latches[:4]
        )
        raise SimulationViolation(f"{kind} at slot {slot}: {where}")

    def run(self, stimuli: np.ndarray, observer=None) -> np.ndarray:
        """Simulate; stimuli is (threads, steps, n_pi). Returns (cycles, n_po)."""
        threads, steps, n_pi = stimuli.shape
        assert threads == self.threads and n_pi == len(self.ann.netlist.inputs)
        total_cycles = threads * steps
        n = self.n
        total_slots = max((total_cycles - 1) * n + self.out_depth, 0)
        full = np.zeros(self.n_latches, dtype=bool)
        val = np.zeros(self.n_latches, dtype=np.uint8)
        out = np.zeros((total_cycles, len(self.po_in)), dtype=np.uint8)
        zero_vec = np.zeros(n_pi, dtype=np.uint8)

        for slot in range(total_slots):
            phase = slot % n + 1
            consumed: list[np.ndarray] = []
            w_edges: list[np.ndarray] = []
            w_vals: list[np.ndarray] = []

            if phase == 1:
                # Cycles past the stimulus are padded with zero vectors so the
                # pipeline keeps streaming while the real tokens drain; their
                # outputs fall outside the recorded range.
                cycle = slot // n
                if cycle < total_cycles:
                    vec = stimuli[cycle % threads, cycle // threads]
                else:
                    vec = zero_vec
                if len(self.pi_out):
                    w_edges.append(self.pi_out)
                    w_vals.append(np.repeat(vec, self.pi_counts))

            for op, arity, names, fin, out_flat, counts in self.groups[phase]:
                f = full[fin]
                cnt = f.sum(axis=1)
                firing = cnt == arity
                bad = ~(firing | (cnt == 0))
                if bad.any():
                    i = int(np.nonzero(bad)[0][0])
                    self._violation(
                        f"partial fanin arrival at {names[i]}", fin[i][~f[i]], slot
                    )
                if not firing.any():
                    continue
                rows = fin[firing]
                vals = _eval_op(op, val[rows])
                consumed.append(rows.ravel())
                sel = np.repeat(firing, counts)
                w_edges.append(out_flat[sel])
                w_vals.append(np.repeat(vals, counts[firing]))

            if phase in self.regs:
                names, in_latch, emit_start, consume_start, out_flat, counts = self.regs[phase]
                active = emit_start <= slot
                if active.any():
                    cons = consume_start <= slot
                    vals = np.zeros(int(active.sum()), dtype=np.uint8)
                    if cons.any():
                        lat = in_latch[cons]
                        missing = ~full[lat]
                        if missing.any():
                            self._violation("register input missing", lat[missing], slot)
                        vals[cons[active]] = val[lat]
                        consumed.append(lat)
                    sel = np.repeat(active, counts)
                    w_edges.append(out_flat[sel])
                    w_vals.append(np.repeat(vals, counts[active]))

            if phase == self.out_phase and (slot - (self.out_depth - 1)) % n == 0:
                ready = full[self.po_in]
                if ready.any():
                    cycle = (slot - (self.out_depth - 1)) // n
                    lat = self.po_in[ready]
                    if 0 <= cycle < total_cycles:
                        out[cycle, np.nonzero(ready)[0]] = val[lat]
                    consumed.append(lat)

            if consumed:
                full[np.concatenate(consumed)] = False
            if w_edges:
                edges = np.concatenate(w_edges)
                values = np.concatenate(w_vals)
                order = np.argsort(edges, kind="stable")
                edges, values = edges[order], values[order]
                dup = edges[1:] == edges[:-1]
                if dup.any():
                    self._violation("latch written twice in one slot", edges[1:][dup], slot)
                clobber = full[edges]
                if clobber.any():
                    self._violation(
                        "latch overwritten before its sink fired", edges[clobber], slot
                    )
                full[edges] = True
                val[edges] = values
                if observer is not None:
                    observer(slot, edges, values)
        return out


def simulate_multiphase(
    ann: AnnotatedNetlist, stimuli: np.ndarray, config: SimConfig | None = None, observer=None
) -> Trace:
    """Run the slot simulation and demux outputs per thread.

    ``stimuli`` has shape (threads, warm_steps + vectors_per_thread, n_pi);
    warm-up cycles are dropped from the returned streams.
    """
    config = config or SimConfig()
    engine = _Engine(ann)
    warmup = resolve_warmup(ann, config)
    threads = ann.threads
    raw = engine.run(stimuli, observer=observer)
    total_cycles = raw.shape[0]
    steps = (total_cycles - warmup) // threads
    streams = np.zeros((threads, steps, raw.shape[1]), dtype=np.uint8)
    for t in range(threads):
        streams[t] = raw[warmup + t :: threads][:steps]
    return Trace(
        threads=threads,
        outputs=list(ann.output_taps),
        streams=streams,
        warmup_cycles=warmup,
        total_cycles=total_cycles,
    )


def resolve_warmup(ann: AnnotatedNetlist, config: SimConfig) -> int:
    """Warm-up cycle count, padded up to a multiple of the thread count."""
    t = ann.threads
    base = config.warmup_cycles
    if base is None:
        base = math.ceil(ann.output_depth / ann.n_phases) + t
    return ((base + t - 1) // t) * t


def simulate_golden(net: Netlist, stimuli: np.ndarray) -> np.ndarray:
    """Synchronous reference semantics; stimuli (steps, n_pi) -> (steps, n_po)."""
    steps = stimuli.shape[0]
    dffs = [c for c in net.cells.values() if c.op == "DFF"]
    order = _comb_order(net)
    if not dffs:
        values: dict[str, np.ndarray] = {
            name: stimuli[:, k].astype(np.uint8) for k, name in enumerate(net.inputs)
        }
        for cell in order:
            rows = np.stack([values[f] for f in cell.fanins], axis=1)
            values[cell.name] = _eval_op(cell.op, rows)
        return np.stack([values[o] for o in net.outputs], axis=1)

    state = {c.name: 0 for c in dffs}
    vals: dict[str, int] = {}
    out = np.zeros((steps, len(net.outputs)), dtype=np.uint8)
    for k in range(steps):
        for i, name in enumerate(net.inputs):
            vals[name] = int(stimuli[k, i])
        vals.update(state)
        for cell in order:
            rows = np.array([[vals[f] for f in cell.fanins]], dtype=np.uint8)
            vals[cell.name] = int(_eval_op(cell.op, rows)[0])
        out[k] = [vals[o] for o in net.outputs]
        for c in dffs:
            state[c.name] = vals[c.fanins[0]]
    return out


def _comb_order(net: Netlist) -> list:
    """Topological order of non-DFF cells, registers treated as sources."""
    comb = {c.name: c for c in net.cells.values() if c.op != "DFF"}
    remaining = dict(comb)
    known = set(net.inputs) | {c.name for c in net.cells.values() if c.op == "DFF"}
    order = []
    while remaining:
        ready = [nm for nm, c in remaining.items() if all(f in known for f in c.fanins)]
        if not ready:
            raise ValueError("combinational cycle in golden evaluation")
        for nm in ready:
            order.append(remaining.pop(nm))
            known.add(nm)
    return order


def verify(
    net: Netlist, ann: AnnotatedNetlist, config: SimConfig | None = None
) -> VerifyReport:
    """Compare the clocked netlist against per-thread golden runs, bit-exactly."""
    config = config or SimConfig()
    threads = ann.threads
    warmup = resolve_warmup(ann, config)
    warm_steps = warmup // threads
    steps = warm_steps + config.vectors_per_thread
    stim = random_stimuli(len(net.inputs), threads, steps, config.seed)
    report = VerifyReport(
        ok=False,
        threads=threads,
        vectors_per_thread=config.vectors_per_thread,
        seed=config.seed,
    )
    try:
        trace = simulate_multiphase(ann, stim, config)
    except SimulationViolation as exc:
        report.violations.append(str(exc))
        return report
    for t in range(threads):
        golden = simulate_golden(net, stim[t])[warm_steps:]
        got = trace.streams[t]
        report.compared_bits += golden.size
        diff = golden != got
        if diff.any():
            report.mismatches += int(diff.sum())
            if report.first_mismatch is None:
                k, o = np.argwhere(diff)[0]
                report.first_mismatch = (
                    f"thread {t} vector {k} output {net.outputs[o]}: "
                    f"expected {golden[k, o]}, got {got[k, o]}"
                )
    report.ok = report.mismatches == 0 and not report.violations
    return report
