"""Waveform dump of a clocked run: one wire per driver net, one tick per slot."""

from __future__ import annotations

from .bench import AnnotatedNetlist
from .simulator import SimConfig, _Engine, random_stimuli, resolve_warmup


def _ident(k: int) -> str:
    # VCD identifiers: bijective base 94 over '!'..'~'.
    s = ""
    k += 1
    while k > 0:
        k, r = divmod(k - 1, 94)
        s += chr(33 + r)
    return s


def dump_vcd(ann: AnnotatedNetlist, config: SimConfig | None = None) -> str:
    """Simulate with the usual random stimulus and render every net as VCD.

    Time is the phase-slot counter; a net changes value in the slot its
    driver fires. Warm-up slots are included so pipeline fill is visible.
    """
    config = config or SimConfig()
    engine = _Engine(ann)
    net = ann.netlist
    warmup = resolve_warmup(ann, config)
    steps = warmup // ann.threads + config.vectors_per_thread
    stim = random_stimuli(len(net.inputs), ann.threads, steps, config.seed)

    drivers = [nm for nm in list(net.inputs) + list(net.cells) if nm in set(engine.latch_driver)]
    dr_id = {nm: _ident(i) for i, nm in enumerate(drivers)}
    latch_net = [engine.latch_driver[i] for i in range(engine.n_latches)]

    changes: dict[int, dict[str, int]] = {}

    def observer(slot: int, edges, values) -> None:
        per_slot = changes.setdefault(slot, {})
        for e, v in zip(edges.tolist(), values.tolist()):
            per_slot[latch_net[e]] = v

    engine.run(stim, observer=observer)

    lines = [
        "$comment clock slots as timestamps $end",
        "$timescale 1 ns $end",
        f"$scope module {net.name} $end",
    ]
    for nm in drivers:
        lines.append(f"$var wire 1 {dr_id[nm]} {nm} $end")
    lines.append("$upscope $end")
    lines.append("$enddefinitions $end")
    lines.append("$dumpvars")
    lines.extend(f"x{dr_id[nm]}" for nm in drivers)
    lines.append("$end")

    current: dict[str, int] = {}
    for slot in sorted(changes):
        slot_lines = []
        for nm, v in changes[slot].items():
            if current.get(nm) != v:
                current[nm] = v
                slot_lines.append(f"{v}{dr_id[nm]}")
        if slot_lines:
            lines.append(f"#{slot}")
            lines.extend(sorted(slot_lines))
    return "\n".join(lines) + "\n"
