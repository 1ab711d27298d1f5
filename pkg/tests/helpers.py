"""Shared test machinery: independent oracles and random instance builders.

The brute-force placement search enumerates injective assignments directly
against the domain/pin/defect rules, with no CNF machinery, so it can
arbitrate the encoder+solver path.
"""

from __future__ import annotations

import random
from typing import Optional

from cmolcad.encoder import PinSet
from cmolcad.fabric import Cell, Fabric
from cmolcad.netlist import Circuit


def assignment_valid(circuit: Circuit, fabric: Fabric, mapping: dict[int, Cell],
                     pins: Optional[PinSet] = None) -> bool:
    """Full rule check of a complete assignment, written independently of
    placer.validate."""
    cells = list(mapping.values())
    if len(set(cells)) != len(cells):
        return False
    dead = fabric.dead_cells()
    for g, cell in mapping.items():
        if not fabric.in_bounds(cell) or cell in dead:
            return False
        if pins is not None:
            if g in pins.must and cell not in pins.must[g]:
                return False
            if g in pins.forbid and cell in pins.forbid[g]:
                return False
    for g1, g2 in circuit.edges():
        if mapping[g1] not in fabric.input_domain(mapping[g2]):
            return False
    at = {cell: g for g, cell in mapping.items()}
    for a, b in fabric.stuck_closed_pairs():
        occ = at.get(b)
        if occ is None:
            continue
        gate = circuit.gates[occ]
        if gate.kind == "INPUT":
            return False
        if not any(mapping.get(f) == a for f in gate.fanin):
            return False
    return True


def brute_force_place(circuit: Circuit, fabric: Fabric,
                      pins: Optional[PinSet] = None) -> Optional[dict[int, Cell]]:
    """Exhaustive backtracking over injective assignments; returns one valid
    mapping or None when no assignment exists."""
    gates = circuit.assignable_ids()
    usable = [c for c in fabric.cells() if c not in fabric.dead_cells()]
    if len(gates) > len(usable):
        return None
    edges = circuit.edges()
    mapping: dict[int, Cell] = {}
    used: set[Cell] = set()

    def consistent(g: int, cell: Cell) -> bool:
        if pins is not None:
            if g in pins.must and cell not in pins.must[g]:
                return False
            if g in pins.forbid and cell in pins.forbid[g]:
                return False
        for g1, g2 in edges:
            if g1 == g and g2 in mapping and cell not in fabric.input_domain(mapping[g2]):
                return False
            if g2 == g and g1 in mapping and mapping[g1] not in fabric.input_domain(cell):
                return False
        return True

    def extend(i: int) -> bool:
        if i == len(gates):
            return assignment_valid(circuit, fabric, mapping, pins)
        g = gates[i]
        for cell in usable:
            if cell in used or not consistent(g, cell):
                continue
            mapping[g] = cell
            used.add(cell)
            if extend(i + 1):
                return True
            del mapping[g]
            used.discard(cell)
        return False

    return dict(mapping) if extend(0) else None


# ---------------------------------------------------------------------------
# random instances


def random_circuit(rng: random.Random, n_inputs: int, n_gates: int,
                   kinds=("AND", "OR", "NOT", "NOR")) -> Circuit:
    """Random feed-forward circuit; every sink-less gate becomes an output,
    so nothing is dead."""
    c = Circuit()
    pool = [c.add_gate("INPUT", (), f"i{k}").id for k in range(n_inputs)]
    for k in range(n_gates):
        kind = rng.choice(kinds)
        nf = 1 if kind == "NOT" else rng.randint(1, min(3, len(pool)))
        fanin = rng.sample(pool, nf)
        pool.append(c.add_gate(kind, fanin, f"g{k}").id)
    read = set()
    for g in c.gates.values():
        read.update(g.fanin)
    sinks = [gid for gid in c.logic_gate_ids() if gid not in read]
    if not sinks:
        sinks = [c.logic_gate_ids()[-1]]
    for gid in sinks:
        c.add_gate("OUTPUT", [gid], f"o_{c.name_of(gid)}")
    c.validate()
    return c


def random_nor_circuit(rng: random.Random, n_inputs: int, n_gates: int) -> Circuit:
    return random_circuit(rng, n_inputs, n_gates, kinds=("NOR", "NOT"))


def random_pos_circuit(rng: random.Random) -> Circuit:
    """Product-of-sums instance: optional input inverters, one OR layer,
    one AND layer driving the outputs. Every NOT feeds an OR and every OR
    feeds an AND, so the NOR rewrite preserves the gate count exactly."""
    c = Circuit()
    n_in = rng.randint(2, 5)
    inputs = [c.add_gate("INPUT", (), f"i{k}").id for k in range(n_in)]
    literals = list(inputs)
    nots = []
    for k, gid in enumerate(inputs):
        if rng.random() < 0.5:
            inv = c.add_gate("NOT", [gid], f"n{k}").id
            nots.append(inv)
            literals.append(inv)
    n_or = rng.randint(2, 5)
    ors = []
    for k in range(n_or):
        width = rng.randint(2, min(4, len(literals)))
        ors.append(c.add_gate("OR", rng.sample(literals, width), f"t{k}").id)
    # route unused inverters into some OR term
    used = set()
    for gid in ors:
        used.update(c.gates[gid].fanin)
    for inv in nots:
        if inv not in used:
            host = c.gates[rng.choice(ors)]
            if inv not in host.fanin:
                host.fanin.append(inv)
    n_and = rng.randint(1, 3)
    or_cover: list[list[int]] = [[] for _ in range(n_and)]
    for k, o in enumerate(ors):
        or_cover[k % n_and].append(o)
    for k in range(n_and):
        terms = or_cover[k] or [rng.choice(ors)]
        extra = [o for o in ors if o not in terms and rng.random() < 0.3]
        fanin = list(dict.fromkeys(terms + extra))
        if len(fanin) == 1 and len(ors) > 1:
            fanin.append(next(o for o in ors if o not in fanin))
        gid = c.add_gate("AND", fanin, f"p{k}").id
        c.add_gate("OUTPUT", [gid], f"p{k}")
    c.validate()
    return c


def random_fabric(rng: random.Random, max_side: int = 3) -> Fabric:
    x = rng.randint(1, max_side)
    y = rng.randint(1, max_side)
    override = None
    if rng.random() < 0.5:
        override = {}
        cells = [(cx, cy) for cx in range(x) for cy in range(y)]
        for cell in cells:
            others = [c for c in cells if c != cell]
            rng.shuffle(others)
            override[cell] = others[: rng.randint(0, len(others))]
    return Fabric(x, y, r=2, domain_override=override)
