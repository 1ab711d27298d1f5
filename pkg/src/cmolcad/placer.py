"""End-to-end cell assignment plus independent result checking.

`place` chains encoder and solver and hands back a validated placement.
`validate` re-checks a placement structurally with no SAT machinery, and
`simulate_fabric` evaluates the placed array cell by cell (each occupied
cell computes the NOR of whatever its input nanowire collects, including
forced-ON devices), serving as the logic-equivalence oracle against plain
circuit simulation.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional

from .encoder import CnfFormula, PinSet, VarMap, decode, encode
from .fabric import Cell, Fabric
from .netlist import Circuit, parse_circuit_json, circuit_to_json
from .solver import SAT, TIMEOUT, UNSAT, SolveBudget, SolveResult, solve, solve_external

log = logging.getLogger(__name__)

# beyond this many assignable gates a flat encoding is unreasonable; a
# hierarchical global placement front-end is out of scope here
SIZE_GUARD_GATES = 1500

_PLACEABLE_KINDS = {"NOR", "NOT", "INPUT", "OUTPUT"}


class PlacementError(ValueError):
    pass


@dataclass
class Placement:
    """Injective map from assignable gate ids to fabric cells."""
    cells: dict[int, Cell]
    circuit: Circuit
    fabric: Fabric
    pins: Optional[PinSet] = None

    def gate_at(self) -> dict[Cell, int]:
        return {c: g for g, c in self.cells.items()}

    def with_fabric(self, fabric: Fabric) -> "Placement":
        return Placement(dict(self.cells), self.circuit, fabric, self.pins)

    def to_json(self) -> dict:
        name = self.circuit.name_of
        obj = {
            "cells": {name(g): list(c) for g, c in sorted(self.cells.items())},
            "fabric": self.fabric.to_json(),
            "circuit": circuit_to_json(self.circuit),
        }
        if self.pins is not None:
            obj["pins"] = self.pins.to_json(self.circuit)
        return obj

    @staticmethod
    def from_json(obj: dict) -> "Placement":
        import json
        if isinstance(obj, str):
            obj = json.loads(obj)
        circuit = parse_circuit_json(obj["circuit"])
        fabric = Fabric.from_json(obj["fabric"])
        index = circuit.by_name()
        cells = {}
        for name, cell in obj["cells"].items():
            if name not in index:
                raise PlacementError(f"placement references unknown gate {name!r}")
            cells[index[name]] = tuple(cell)
        pins = PinSet.from_json(obj["pins"], circuit) if "pins" in obj else None
        return Placement(cells, circuit, fabric, pins)


@dataclass
class PlaceOutcome:
    status: str  # sat | unsat | timeout
    placement: Optional[Placement]
    num_vars: int
    num_clauses: int
    solve_result: Optional[SolveResult]
    diagnostics: list[str] = field(default_factory=list)


def choose_fabric(n_assignable: int, r: int = 9, slack: float = 1.15) -> Fabric:
    """Smallest near-square array holding the design with a little headroom."""
    target = max(1, math.ceil(n_assignable * slack))
    x = max(1, math.ceil(math.sqrt(target)))
    y = max(1, math.ceil(target / x))
    return Fabric(x, y, r)


def perimeter_cells(fabric: Fabric) -> frozenset[Cell]:
    return frozenset(
        (x, y)
        for x in range(fabric.x)
        for y in range(fabric.y)
        if x in (0, fabric.x - 1) or y in (0, fabric.y - 1)
    )


def perimeter_pins(circuit: Circuit, fabric: Fabric) -> PinSet:
    """Primary inputs and output drivers restricted to the array perimeter."""
    ring = perimeter_cells(fabric)
    pins = PinSet()
    for gid in circuit.inputs:
        pins.must[gid] = ring
    for gid in circuit.output_driver_ids():
        pins.must[gid] = ring
    return pins


def place(
    circuit: Circuit,
    fabric: Optional[Fabric] = None,
    pins: Optional[PinSet] = None,
    budget: Optional[SolveBudget] = None,
    seed: int = 0,
    external_solver: Optional[str] = None,
) -> PlaceOutcome:
    """Assign every input and NOR/NOT gate of `circuit` to a fabric cell.

    With no fabric given, a near-square one is sized automatically and I/O
    is pinned to the perimeter. A Sat answer is decoded and re-validated
    before being returned.
    """
    kinds = {g.kind for g in circuit.gates.values()}
    if not kinds <= _PLACEABLE_KINDS:
        raise PlacementError(f"placement needs a NOR/NOT circuit, found {sorted(kinds - _PLACEABLE_KINDS)}")
    n = len(circuit.assignable_ids())
    if n > SIZE_GUARD_GATES:
        log.warning("flat placement of %d gates; expect large CNFs (size guard %d)",
                    n, SIZE_GUARD_GATES)
    if fabric is None:
        fabric = choose_fabric(n)
        if pins is None:
            pins = perimeter_pins(circuit, fabric)

    cnf, vm = encode(circuit, fabric, pins)
    if cnf.trivially_unsat:
        return PlaceOutcome(UNSAT, None, cnf.num_vars, len(cnf.clauses), None, cnf.diagnostics)
    if external_solver:
        timeout = budget.max_seconds if budget else None
        result = solve_external(cnf, external_solver, timeout=timeout)
    else:
        result = solve(cnf, budget, seed=seed)
    if result.status != SAT:
        return PlaceOutcome(result.status, None, cnf.num_vars, len(cnf.clauses), result, cnf.diagnostics)
    placement = Placement(decode(result.model, vm), circuit, fabric, pins)
    report = validate(placement)
    if not report.ok:
        raise PlacementError(f"solver produced an invalid placement: {report.violations[:3]}")
    return PlaceOutcome(SAT, placement, cnf.num_vars, len(cnf.clauses), result, cnf.diagnostics)


# ---------------------------------------------------------------------------
# independent validation


@dataclass
class ValidationReport:
    violations: list[dict]

    @property
    def ok(self) -> bool:
        return not self.violations

    def jsonl(self) -> str:
        import json
        return "\n".join(json.dumps(v, sort_keys=True) for v in self.violations)


def validate(placement: Placement, pins: Optional[PinSet] = None) -> ValidationReport:
    """Structural re-check of a placement, independent of the encoder.

    Verifies injectivity, bounds, dead cells, every net against the sink's
    input domain, pin membership, and the forced-ON device rules.
    """
    c = placement.circuit
    f = placement.fabric
    pins = pins if pins is not None else placement.pins
    out: list[dict] = []

    def bad(rule: str, gid: Optional[int], cell: Optional[Cell], detail: str) -> None:
        out.append({
            "rule": rule,
            "gate": c.name_of(gid) if gid is not None else None,
            "cell": list(cell) if cell is not None else None,
            "detail": detail,
        })

    for gid in c.assignable_ids():
        if gid not in placement.cells:
            bad("unplaced", gid, None, "assignable gate has no cell")
    seen: dict[Cell, int] = {}
    for gid, cell in sorted(placement.cells.items()):
        if not f.in_bounds(cell):
            bad("out_of_bounds", gid, cell, "cell outside the fabric")
            continue
        if cell in f.dead_cells():
            bad("dead_cell", gid, cell, "gate assigned to an unusable cell")
        if cell in seen:
            bad("collision", gid, cell, f"cell already holds {c.name_of(seen[cell])}")
        seen[cell] = gid

    for g1, g2 in c.edges():
        c1, c2 = placement.cells.get(g1), placement.cells.get(g2)
        if c1 is None or c2 is None or not f.in_bounds(c2):
            continue
        if c1 not in f.input_domain(c2):
            bad("edge_domain", g2, c2,
                f"driver {c.name_of(g1)} at {list(c1)} outside the input domain")

    if pins is not None:
        for gid, cell in sorted(placement.cells.items()):
            if gid in pins.must and cell not in pins.must[gid]:
                bad("pin_must", gid, cell, "cell outside the pinned set")
            if gid in pins.forbid and cell in pins.forbid[gid]:
                bad("pin_forbid", gid, cell, "cell is pinned off")

    at = placement.gate_at()
    for a, b in f.stuck_closed_pairs():
        occupant = at.get(b)
        if occupant is None:
            continue
        gate = c.gates[occupant]
        if gate.kind == "INPUT":
            bad("stuck_closed_source", occupant, b,
                f"fanin-free node at forced-device sink {list(b)}")
        elif not any(placement.cells.get(fi) == a for fi in gate.fanin):
            bad("stuck_closed_fanin", occupant, b,
                f"no fanin sits at forced source {list(a)}")
    return ValidationReport(out)


# ---------------------------------------------------------------------------
# fabric-level simulation


def simulate_fabric(placement: Placement, vectors: list[dict[str, bool]]) -> list[list[bool]]:
    """Evaluate the placed array on input vectors.

    Each occupied cell computes NOR over the cells wired into its input
    nanowire: its gate's fanins plus any forced-ON contributor. Cells
    hosting primary inputs emit the input value. Returns one output-value
    list (in circuit output order) per vector.
    """
    c = placement.circuit
    f = placement.fabric
    kinds = {g.kind for g in c.gates.values()}
    if not kinds <= _PLACEABLE_KINDS:
        raise PlacementError("fabric computes NOR only; convert the circuit first")
    for gid in c.assignable_ids():
        if gid not in placement.cells:
            raise PlacementError(f"unplaced gate {c.name_of(gid)}")
    forced_into: dict[Cell, list[Cell]] = {}
    for a, b in f.stuck_closed_pairs():
        forced_into.setdefault(b, []).append(a)
    order = c.topo_order()
    results = []
    for vec in vectors:
        val_gate: dict[int, bool] = {}
        val_cell: dict[Cell, bool] = {}
        for gid in order:
            g = c.gates[gid]
            if g.kind == "OUTPUT":
                continue
            cell = placement.cells[gid]
            if g.kind == "INPUT":
                v = bool(vec[g.name])
            else:
                wired = [val_cell[placement.cells[fi]] for fi in g.fanin]
                for src in forced_into.get(cell, ()):
                    # an unconfigured cell's inverter sees an empty wired-OR
                    # and therefore drives constant 1
                    wired.append(val_cell.get(src, True))
                v = not any(wired)
            val_gate[gid] = v
            val_cell[cell] = v
        results.append([val_gate[c.gates[o].fanin[0]] for o in c.outputs])
    return results


def equivalence_vectors(input_names: list[str], limit_exhaustive: int = 16,
                        samples: int = 10000, seed: int = 7) -> list[dict[str, bool]]:
    """Exhaustive vectors up to `limit_exhaustive` inputs, else a seeded
    random sample."""
    n = len(input_names)
    if n <= limit_exhaustive:
        return [
            {name: bool((i >> k) & 1) for k, name in enumerate(input_names)}
            for i in range(1 << n)
        ]
    import numpy as np
    rng = np.random.Generator(np.random.PCG64(seed))
    bits = rng.integers(0, 2, size=(samples, n))
    return [{name: bool(row[k]) for k, name in enumerate(input_names)} for row in bits]


def wall_time() -> float:
    return time.perf_counter()
