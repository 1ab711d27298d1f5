"""Gate-level netlist IR: parsing, sequential carving, dead-logic sweep.

Circuits are directed gate graphs. Nodes are gates (AND/OR/NOT/NOR), primary
inputs, output markers, and DFF markers awaiting carving. Edges run from a
driver gate to each gate that lists it in its fanin.

The `.bench` parser accepts the ISCAS-89 dialect. NAND and XOR are expanded
over AND/OR/NOT, BUFF collapses to a wire alias, and DFF is kept as a marker
pair so `carve_sequential` can break the circuit at state elements.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

LOGIC_KINDS = ("AND", "OR", "NOT", "NOR")
KINDS = LOGIC_KINDS + ("INPUT", "OUTPUT", "DFF")

_FANIN_OK = {
    "NOT": (1, 1),
    "INPUT": (0, 0),
    "OUTPUT": (1, 1),
    "DFF": (1, 1),
    "AND": (1, None),
    "OR": (1, None),
    "NOR": (1, None),
}


class NetlistError(ValueError):
    """Raised on malformed netlists: bad references, cycles, bad opcodes."""


@dataclass
class Gate:
    id: int
    kind: str
    fanin: list[int]
    name: str

    def is_logic(self) -> bool:
        return self.kind in LOGIC_KINDS


class Circuit:
    """Id-indexed gate collection plus ordered primary input/output lists.

    `outputs` holds OUTPUT marker gates; a marker is never assigned to a
    fabric cell itself, its single fanin names the driving gate.
    """

    def __init__(self) -> None:
        self.gates: dict[int, Gate] = {}
        self.inputs: list[int] = []
        self.outputs: list[int] = []
        self._next_id = 0

    # -- construction ------------------------------------------------------

    def add_gate(self, kind: str, fanin: Iterable[int] = (), name: Optional[str] = None) -> Gate:
        gid = self._next_id
        self._next_id += 1
        gate = Gate(gid, kind, list(fanin), name if name is not None else f"n{gid}")
        self.gates[gid] = gate
        if kind == "INPUT":
            self.inputs.append(gid)
        elif kind == "OUTPUT":
            self.outputs.append(gid)
        return gate

    def copy(self) -> "Circuit":
        c = Circuit()
        c.gates = {gid: Gate(g.id, g.kind, list(g.fanin), g.name) for gid, g in self.gates.items()}
        c.inputs = list(self.inputs)
        c.outputs = list(self.outputs)
        c._next_id = self._next_id
        return c

    # -- views -------------------------------------------------------------

    def gate(self, gid: int) -> Gate:
        return self.gates[gid]

    def logic_gate_ids(self) -> list[int]:
        return sorted(gid for gid, g in self.gates.items() if g.is_logic())

    def assignable_ids(self) -> list[int]:
        """Nodes that occupy fabric cells: primary inputs plus logic gates."""
        return sorted(gid for gid, g in self.gates.items() if g.is_logic() or g.kind == "INPUT")

    def output_driver_ids(self) -> list[int]:
        seen: list[int] = []
        for oid in self.outputs:
            drv = self.gates[oid].fanin[0]
            if drv not in seen:
                seen.append(drv)
        return seen

    def edges(self) -> list[tuple[int, int]]:
        """Deduplicated (driver, sink) net list over assignable sinks."""
        es = set()
        for gid, g in sorted(self.gates.items()):
            if not g.is_logic():
                continue
            for f in g.fanin:
                es.add((f, gid))
        return sorted(es)

    def fanout_map(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {gid: [] for gid in self.gates}
        for gid, g in sorted(self.gates.items()):
            for f in g.fanin:
                out[f].append(gid)
        return out

    def has_dff(self) -> bool:
        return any(g.kind == "DFF" for g in self.gates.values())

    def name_of(self, gid: int) -> str:
        return self.gates[gid].name

    def by_name(self) -> dict[str, int]:
        """Name index over assignable gates (unique by construction)."""
        return {self.gates[gid].name: gid for gid in self.assignable_ids()}

    # -- integrity ---------------------------------------------------------

    def validate(self) -> None:
        for gid, g in self.gates.items():
            lo, hi = _FANIN_OK[g.kind]
            n = len(g.fanin)
            if n < lo or (hi is not None and n > hi):
                raise NetlistError(f"gate {g.name}: {g.kind} with {n} fanins")
            for f in g.fanin:
                if f not in self.gates:
                    raise NetlistError(f"gate {g.name}: dangling fanin id {f}")
                if self.gates[f].kind == "OUTPUT":
                    raise NetlistError(f"gate {g.name}: reads an output marker")
        if not self.has_dff():
            self.topo_order()

    def topo_order(self) -> list[int]:
        """Topological order over all gates; DFF fanin edges are ignored
        (state breaks the cycle). Raises on combinational cycles."""
        indeg = {gid: 0 for gid in self.gates}
        fanout: dict[int, list[int]] = {gid: [] for gid in self.gates}
        for gid, g in self.gates.items():
            if g.kind == "DFF":
                continue
            for f in g.fanin:
                fanout[f].append(gid)
                indeg[gid] += 1
        ready = sorted(gid for gid, d in indeg.items() if d == 0)
        order: list[int] = []
        while ready:
            gid = ready.pop()
            order.append(gid)
            for s in fanout[gid]:
                indeg[s] -= 1
                if indeg[s] == 0:
                    ready.append(s)
        if len(order) != len(self.gates):
            stuck = sorted(self.gates[g].name for g, d in indeg.items() if d > 0)
            raise NetlistError(f"cyclic combinational path through: {', '.join(stuck[:8])}")
        return order

    # -- simulation --------------------------------------------------------

    def simulate(self, vector: dict[str, bool]) -> list[bool]:
        """Evaluate a combinational circuit; returns output values in
        `outputs` order. `vector` maps input names to booleans."""
        if self.has_dff():
            raise NetlistError("cannot simulate a circuit with uncarved DFFs")
        values: dict[int, bool] = {}
        for gid in self.topo_order():
            g = self.gates[gid]
            if g.kind == "INPUT":
                values[gid] = bool(vector[g.name])
            elif g.kind == "OUTPUT":
                values[gid] = values[g.fanin[0]]
            elif g.kind == "AND":
                values[gid] = all(values[f] for f in g.fanin)
            elif g.kind == "OR":
                values[gid] = any(values[f] for f in g.fanin)
            elif g.kind == "NOT":
                values[gid] = not values[g.fanin[0]]
            elif g.kind == "NOR":
                values[gid] = not any(values[f] for f in g.fanin)
        return [values[oid] for oid in self.outputs]

    def input_names(self) -> list[str]:
        return [self.gates[i].name for i in self.inputs]


# ---------------------------------------------------------------------------
# .bench parsing


_DEF_RE = re.compile(r"^\s*([^\s=]+)\s*=\s*([A-Za-z][A-Za-z0-9]*)\s*\((.*)\)\s*$")
_IO_RE = re.compile(r"^\s*(INPUT|OUTPUT)\s*\(\s*([^\s()]+)\s*\)\s*$", re.IGNORECASE)

_BENCH_OPS = {"AND", "OR", "NOT", "NAND", "NOR", "XOR", "BUFF", "DFF"}


def parse_bench(text: str) -> Circuit:
    """Parse ISCAS-89 `.bench` source into a Circuit.

    NAND becomes AND+NOT, XOR expands over AND/OR/NOT, BUFF collapses to a
    wire alias, DFF survives as a carving marker. Raises NetlistError on
    undefined signals, duplicate definitions, unsupported opcodes, or
    combinational cycles.
    """
    inputs: list[str] = []
    output_signals: list[str] = []
    defs: dict[str, tuple[str, list[str]]] = {}

    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _IO_RE.match(line)
        if m:
            kw, name = m.group(1).upper(), m.group(2)
            if kw == "INPUT":
                if name in inputs or name in defs:
                    raise NetlistError(f"duplicate definition of {name}")
                inputs.append(name)
            else:
                output_signals.append(name)
            continue
        m = _DEF_RE.match(line)
        if m:
            name, op, argstr = m.group(1), m.group(2).upper(), m.group(3)
            if op not in _BENCH_OPS:
                raise NetlistError(f"unsupported opcode {op} in definition of {name}")
            if name in defs or name in inputs:
                raise NetlistError(f"duplicate definition of {name}")
            args = [a.strip() for a in argstr.split(",") if a.strip()]
            if not args:
                raise NetlistError(f"definition of {name} has no operands")
            defs[name] = (op, args)
            continue
        raise NetlistError(f"unparseable line: {raw.strip()!r}")

    return _build(inputs, output_signals, defs)


def parse_circuit_json(src: str | dict) -> Circuit:
    """Parse the structural-netlist JSON form:
    {"inputs":[...],"outputs":[...],"gates":[{"name","kind","fanin"}]}."""
    obj = json.loads(src) if isinstance(src, str) else src
    inputs = list(obj.get("inputs", []))
    output_signals = list(obj.get("outputs", []))
    defs: dict[str, tuple[str, list[str]]] = {}
    for entry in obj.get("gates", []):
        name, kind = entry["name"], entry["kind"].upper()
        if kind not in _BENCH_OPS:
            raise NetlistError(f"unsupported opcode {kind} in definition of {name}")
        if name in defs or name in inputs:
            raise NetlistError(f"duplicate definition of {name}")
        defs[name] = (kind, [str(f) for f in entry["fanin"]])
    return _build(inputs, output_signals, defs)


def _build(inputs: list[str], output_signals: list[str], defs: dict[str, tuple[str, list[str]]]) -> Circuit:
    c = Circuit()
    ids: dict[str, int] = {}

    def resolve(name: str) -> str:
        # chase BUFF aliases to the defining signal
        seen = set()
        while name in defs and defs[name][0] == "BUFF":
            if name in seen:
                raise NetlistError(f"cyclic combinational path through: {name}")
            seen.add(name)
            name = defs[name][1][0]
        return name

    for name in inputs:
        ids[name] = c.add_gate("INPUT", (), name).id

    def gate_for(name: str) -> int:
        name = resolve(name)
        if name in ids:
            return ids[name]
        if name not in defs:
            raise NetlistError(f"undefined signal reference: {name}")
        op, args = defs[name]
        if name in building:
            raise NetlistError(f"cyclic combinational path through: {name}")
        building.add(name)
        if op == "DFF":
            # state breaks combinational cycles: resolve the data input later
            g = c.add_gate("DFF", (), name)
            ids[name] = g.id
            building.discard(name)
            pending_dff.append((g, args[0]))
            return g.id
        fin = [gate_for(a) for a in args]
        gid = _emit_op(c, op, fin, name)
        ids[name] = gid
        building.discard(name)
        return gid

    building: set[str] = set()
    pending_dff: list[tuple[Gate, str]] = []
    for name in list(defs):
        gate_for(name)
    while pending_dff:
        g, d = pending_dff.pop(0)
        g.fanin = [gate_for(d)]
    for sig in output_signals:
        drv = gate_for(sig)
        c.add_gate("OUTPUT", [drv], resolve(sig))
    c.validate()
    return c


def _emit_op(c: Circuit, op: str, fin: list[int], name: str) -> int:
    if op in ("AND", "OR", "NOR", "NAND"):
        fin = list(dict.fromkeys(fin))
    if op in ("AND", "OR") and len(fin) == 1:
        return fin[0]  # single-operand AND/OR is a wire
    if op in ("NOR", "NAND") and len(fin) == 1:
        return c.add_gate("NOT", fin, name).id
    if op in ("AND", "OR", "NOT", "NOR"):
        return c.add_gate(op, fin, name).id
    if op == "NAND":
        t = c.add_gate("AND", fin, f"{name}$and")
        return c.add_gate("NOT", [t.id], name).id
    if op == "XOR":
        acc = fin[0]
        for k, b in enumerate(fin[1:]):
            label = name if k == len(fin) - 2 else f"{name}$x{k}"
            na = c.add_gate("NOT", [acc], f"{label}$na")
            nb = c.add_gate("NOT", [b], f"{label}$nb")
            t1 = c.add_gate("AND", [acc, nb.id], f"{label}$a1")
            t2 = c.add_gate("AND", [na.id, b], f"{label}$a2")
            acc = c.add_gate("OR", [t1.id, t2.id], label).id
        return acc
    raise NetlistError(f"unsupported opcode {op}")


# ---------------------------------------------------------------------------
# emission


def emit_bench(c: Circuit) -> str:
    lines = []
    for i in c.inputs:
        lines.append(f"INPUT({c.gates[i].name})")
    for o in c.outputs:
        lines.append(f"OUTPUT({c.gates[c.gates[o].fanin[0]].name})")
    for gid in sorted(c.gates):
        g = c.gates[gid]
        if g.kind in ("INPUT", "OUTPUT"):
            continue
        args = ", ".join(c.gates[f].name for f in g.fanin)
        lines.append(f"{g.name} = {g.kind}({args})")
    return "\n".join(lines) + "\n"


def circuit_to_json(c: Circuit) -> dict:
    return {
        "inputs": [c.gates[i].name for i in c.inputs],
        "outputs": [c.gates[c.gates[o].fanin[0]].name for o in c.outputs],
        "gates": [
            {"name": g.name, "kind": g.kind, "fanin": [c.gates[f].name for f in g.fanin]}
            for gid, g in sorted(c.gates.items())
            if g.kind not in ("INPUT", "OUTPUT")
        ],
    }


# ---------------------------------------------------------------------------
# transformations


def carve_sequential(c: Circuit) -> Circuit:
    """Break the circuit at state elements: every DFF output becomes a new
    primary input, every DFF data input a new primary output."""
    out = c.copy()
    for gid in sorted(out.gates):
        g = out.gates[gid]
        if g.kind != "DFF":
            continue
        src = g.fanin[0]
        out.add_gate("OUTPUT", [src], out.gates[src].name)
        g.kind = "INPUT"
        g.fanin = []
        out.inputs.append(gid)
    out.validate()
    return out


def sweep(c: Circuit) -> Circuit:
    """Remove logic gates with no path to any primary output.

    Primary inputs are interface and always survive. Simulation-equivalent
    to the input circuit on all shared I/O.
    """
    live: set[int] = set()
    stack = [c.gates[o].fanin[0] for o in c.outputs]
    while stack:
        gid = stack.pop()
        if gid in live:
            continue
        live.add(gid)
        stack.extend(c.gates[gid].fanin)
    out = Circuit()
    out._next_id = c._next_id
    for gid, g in sorted(c.gates.items()):
        if g.kind == "OUTPUT" or g.kind == "INPUT" or gid in live:
            out.gates[gid] = Gate(g.id, g.kind, list(g.fanin), g.name)
    out.inputs = list(c.inputs)
    out.outputs = list(c.outputs)
    out.validate()
    return out
