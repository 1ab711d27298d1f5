"""CNF encoding of the cell-assignment problem.

One boolean variable per live (gate, cell) pair. The reference encoding is
pairwise: per gate, at-most-one over its allowed cells and one at-least-one
clause; per cell, at-most-one over the gates allowed there; and per net
(g1, g2), for every cell c2 that may host g2, a clause requiring g1 on some
cell of D_in(c2). Pin and defect restrictions become FALSE constants that
are propagated before clause emission: satisfied clauses are dropped and
false literals removed, so the emitted formula is already simplified.

Forced-ON devices (stuck_closed a->b) contribute two rules: a fanin-free
node may never sit at b, and any gate at b must have one of its fanins at a.

`fixed` supports localized re-assignment: gates in it keep their cells and
participate as constants (their nets restrict the allowed sets of free
gates); `cells` restricts the usable cell pool to a region.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

from .fabric import Cell, Fabric
from .netlist import Circuit


@dataclass
class PinSet:
    """Per-gate allowed (`must`) and forbidden (`forbid`) cell sets."""
    must: dict[int, frozenset[Cell]] = field(default_factory=dict)
    forbid: dict[int, frozenset[Cell]] = field(default_factory=dict)

    def restrict(self, gid: int, allowed: set[Cell]) -> set[Cell]:
        if gid in self.must:
            allowed &= self.must[gid]
        if gid in self.forbid:
            allowed -= self.forbid[gid]
        return allowed

    def check(self) -> None:
        for gid, cells in self.must.items():
            if not cells:
                raise ValueError(f"empty must-pin set for gate id {gid}")
            if cells & self.forbid.get(gid, frozenset()):
                raise ValueError(f"must/forbid overlap for gate id {gid}")

    def to_json(self, circuit: Circuit) -> dict:
        name = circuit.name_of
        return {
            "must": {name(g): sorted([list(c) for c in cs]) for g, cs in sorted(self.must.items())},
            "forbid": {name(g): sorted([list(c) for c in cs]) for g, cs in sorted(self.forbid.items())},
        }

    @staticmethod
    def from_json(obj: dict, circuit: Circuit) -> "PinSet":
        import json
        if isinstance(obj, str):
            obj = json.loads(obj)
        index = circuit.by_name()
        pins = PinSet()
        for key, target in (("must", pins.must), ("forbid", pins.forbid)):
            for name, cells in obj.get(key, {}).items():
                if name not in index:
                    raise ValueError(f"pin references unknown gate {name!r}")
                target[index[name]] = frozenset(tuple(c) for c in cells)
        pins.check()
        return pins


class VarMap:
    """Bijection between live (gate, cell) pairs and dense CNF variables.

    Pairs excluded by pins or defects are FALSE constants, never variables.
    """

    def __init__(self) -> None:
        self.var_of: dict[tuple[int, Cell], int] = {}
        self.pair_of: list[Optional[tuple[int, Cell]]] = [None]
        self.allowed: dict[int, list[Cell]] = {}

    def add(self, gid: int, cell: Cell) -> int:
        v = len(self.pair_of)
        self.var_of[(gid, cell)] = v
        self.pair_of.append((gid, cell))
        return v

    @property
    def num_vars(self) -> int:
        return len(self.pair_of) - 1

    def var(self, gid: int, cell: Cell) -> Optional[int]:
        return self.var_of.get((gid, cell))


@dataclass
class CnfFormula:
    num_vars: int
    clauses: list[list[int]]
    diagnostics: list[str] = field(default_factory=list)

    @property
    def trivially_unsat(self) -> bool:
        return any(not cl for cl in self.clauses)


def encode(
    circuit: Circuit,
    fabric: Fabric,
    pins: Optional[PinSet] = None,
    fixed: Optional[dict[int, Cell]] = None,
    cells: Optional[list[Cell]] = None,
) -> tuple[CnfFormula, VarMap]:
    """Build the assignment CNF for `circuit` on `fabric`.

    Satisfying assignments correspond exactly to injective placements of the
    free gates that keep every net inside the sink's input domain, honor the
    pins, and respect defect constraints. Unsatisfiable-by-construction
    cases (a gate with no allowed cell, more gates than usable cells) yield
    a trivially UNSAT formula with a diagnostic instead of an error.
    """
    pins = pins or PinSet()
    pins.check()
    fixed = fixed or {}
    pool = cells if cells is not None else fabric.cells()
    usable = [c for c in pool if c not in fabric.dead_cells()]
    usable_set = set(usable)

    gates = [g for g in circuit.assignable_ids() if g not in fixed]
    edges = circuit.edges()
    sc_pairs = fabric.stuck_closed_pairs()

    vm = VarMap()
    diagnostics: list[str] = []

    allowed: dict[int, set[Cell]] = {}
    for g in gates:
        cand = pins.restrict(gid=g, allowed=set(usable))
        if circuit.gates[g].kind == "INPUT":
            # a fanin-free node can never sit at a forced device's input side
            for _, b in sc_pairs:
                cand.discard(b)
        allowed[g] = cand

    # nets against fixed context gates restrict the free side directly
    for g1, g2 in edges:
        if g1 in fixed and g2 in fixed:
            continue  # outside the re-assignment scope
        if g1 in fixed and g2 in allowed:
            allowed[g2] &= fabric.output_domain(fixed[g1])
        elif g2 in fixed and g1 in allowed:
            allowed[g1] &= fabric.input_domain(fixed[g2])

    for g in gates:
        if not allowed[g]:
            diagnostics.append(f"gate {circuit.name_of(g)} has no allowed cell")
    if len(gates) > len(usable):
        diagnostics.append(f"{len(gates)} gates exceed {len(usable)} usable cells")

    order: dict[int, list[Cell]] = {g: sorted(allowed[g], key=lambda c: (c[1], c[0])) for g in gates}
    for g in gates:
        for c in order[g]:
            vm.add(g, c)
    vm.allowed = order

    clauses: list[list[int]] = []
    if diagnostics:
        clauses.append([])

    # at most one cell per gate
    for g in gates:
        for c1, c2 in combinations(order[g], 2):
            clauses.append([-vm.var_of[(g, c1)], -vm.var_of[(g, c2)]])
    # at least one cell per gate
    for g in gates:
        if order[g]:
            clauses.append([vm.var_of[(g, c)] for c in order[g]])
    # at most one gate per cell
    gates_at: dict[Cell, list[int]] = {c: [] for c in usable}
    for g in gates:
        for c in order[g]:
            gates_at[c].append(g)
    for c in usable:
        for g1, g2 in combinations(gates_at[c], 2):
            clauses.append([-vm.var_of[(g1, c)], -vm.var_of[(g2, c)]])
    # nets stay inside input domains
    for g1, g2 in edges:
        if g1 in fixed or g2 in fixed:
            continue
        for c2 in order[g2]:
            dom = fabric.input_domain(c2) & allowed[g1]
            clauses.append([-vm.var_of[(g2, c2)]]
                           + [vm.var_of[(g1, c1)] for c1 in sorted(dom, key=lambda c: (c[1], c[0]))])
    # forced-ON devices: a gate at b needs one of its fanins at a
    for a, b in sc_pairs:
        if b not in usable_set:
            continue
        for g1 in gates:
            gate = circuit.gates[g1]
            if not gate.is_logic() or b not in allowed[g1]:
                continue
            if any(fixed.get(f) == a for f in gate.fanin):
                continue
            disj = [vm.var_of[(f, a)] for f in sorted(set(gate.fanin))
                    if f in allowed and a in allowed[f]]
            clauses.append([-vm.var_of[(g1, b)]] + disj)
        # a fixed gate at b constrains where its free fanins may go
        for g1, cell in sorted(fixed.items()):
            if cell != b:
                continue
            gate = circuit.gates[g1]
            if not gate.is_logic():
                continue
            if any(fixed.get(f) == a for f in gate.fanin):
                continue
            disj = [vm.var_of[(f, a)] for f in sorted(set(gate.fanin))
                    if f in allowed and a in allowed[f]]
            if disj:
                clauses.append(disj)

    return CnfFormula(vm.num_vars, clauses, diagnostics), vm


def decode(model: list[bool], vm: VarMap) -> dict[int, Cell]:
    """Map a satisfying model back to gate -> cell. Raises if any gate has
    other than exactly one true cell variable (an encoder bug, never a
    solver outcome)."""
    placement: dict[int, Cell] = {}
    for (g, c), v in vm.var_of.items():
        if model[v]:
            if g in placement:
                raise ValueError(f"model places gate id {g} on {placement[g]} and {c}")
            placement[g] = c
    for g in vm.allowed:
        if g not in placement:
            raise ValueError(f"model leaves gate id {g} unplaced")
    return placement


def emit_dimacs(cnf: CnfFormula) -> str:
    """Standard DIMACS text with stable clause order."""
    lines = [f"p cnf {cnf.num_vars} {len(cnf.clauses)}"]
    for cl in cnf.clauses:
        lines.append(" ".join(str(l) for l in cl) + " 0" if cl else "0")
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> CnfFormula:
    num_vars = 0
    clauses: list[list[int]] = []
    cur: list[int] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad DIMACS problem line: {line!r}")
            num_vars = int(parts[2])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(cur)
                cur = []
            else:
                cur.append(lit)
    if cur:
        clauses.append(cur)
    for cl in clauses:
        for l in cl:
            num_vars = max(num_vars, abs(l))
    return CnfFormula(num_vars, clauses)
