"""Repair a placement against fabric defects by growing-region re-assignment.

The loop finds all placed gates that conflict with the defect set, cuts a
small region around the conflicts' center of mass, frees every gate inside
it, and re-solves the assignment locally: outside gates stay put and act as
constants, which restricts where freed gates may go through the net-domain
relation. The region grows one cell per side until the local problem is
satisfiable; the outer loop repeats until no conflicts remain. Defects tend
to cluster, which is what makes the center-of-mass focus effective.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

from .encoder import PinSet, decode, encode
from .fabric import Cell, Fabric
from .placer import Placement, validate
from .solver import SAT, TIMEOUT, SolveBudget, solve

REPAIRED = "repaired"
FAILED = "failed"
BUDGET = "budget"


@dataclass
class Conflict:
    gate: int
    cell: Cell
    rule: str


def find_conflicts(placement: Placement, fabric: Fabric) -> list[Conflict]:
    """Placed gates that clash with `fabric`'s defects.

    Flags occupants of dead cells, both endpoints of nets broken by domain
    shrinkage, and forced-device sinks whose occupant violates the
    stuck-closed rules.
    """
    c = placement.circuit
    conflicts: list[Conflict] = []
    for gid, cell in sorted(placement.cells.items()):
        if cell in fabric.dead_cells():
            conflicts.append(Conflict(gid, cell, "dead_cell"))
    for g1, g2 in c.edges():
        c1, c2 = placement.cells.get(g1), placement.cells.get(g2)
        if c1 is None or c2 is None:
            continue
        if c1 not in fabric.input_domain(c2):
            conflicts.append(Conflict(g1, c1, "edge_broken"))
            conflicts.append(Conflict(g2, c2, "edge_broken"))
    at = {cell: gid for gid, cell in placement.cells.items()}
    for a, b in fabric.stuck_closed_pairs():
        occupant = at.get(b)
        if occupant is None:
            continue
        gate = c.gates[occupant]
        if gate.kind == "INPUT":
            conflicts.append(Conflict(occupant, b, "stuck_closed_source"))
        elif not any(placement.cells.get(fi) == a for fi in gate.fanin):
            conflicts.append(Conflict(occupant, b, "stuck_closed_fanin"))
    return conflicts


def _center_of_mass(conflicts: list[Conflict]) -> Cell:
    # nearest cell to the mean; ties round toward the lower coordinate
    mx = sum(c.cell[0] for c in conflicts) / len(conflicts)
    my = sum(c.cell[1] for c in conflicts) / len(conflicts)
    return (math.ceil(mx - 0.5), math.ceil(my - 0.5))


@dataclass
class RegionAttempt:
    center: Cell
    region: tuple[int, int, int, int]  # x0, y0, x1, y1 inclusive
    freed: int
    status: str
    solver_seconds: float
    conflicts: int


@dataclass
class RepairResult:
    status: str  # repaired | failed | budget
    placement: Optional[Placement]
    attempts: list[RegionAttempt] = field(default_factory=list)
    solver_seconds: float = 0.0
    freed_gates: set[int] = field(default_factory=set)
    residual_conflicts: list[Conflict] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    def log_jsonl(self) -> str:
        import json
        return "\n".join(
            json.dumps({
                "center": list(a.center), "region": list(a.region), "freed": a.freed,
                "status": a.status, "solver_seconds": round(a.solver_seconds, 6),
                "conflicts": a.conflicts,
            })
            for a in self.attempts
        )


def _clip_region(center: Cell, half: int, fabric: Fabric) -> tuple[int, int, int, int]:
    x0 = max(0, center[0] - half)
    y0 = max(0, center[1] - half)
    x1 = min(fabric.x - 1, center[0] + half)
    y1 = min(fabric.y - 1, center[1] + half)
    return x0, y0, x1, y1


def reconfigure(
    placement: Placement,
    fabric: Fabric,
    budget_seconds: Optional[float] = None,
    pins: Optional[PinSet] = None,
    seed: int = 0,
) -> RepairResult:
    """Re-place gates around defect conflicts until the placement is clean.

    Gates outside every repair region keep their cells bit-identically.
    Fails when the region has grown to the whole fabric and the problem is
    still unsatisfiable, or when the budget runs out.
    """
    del seed  # the embedded solver is deterministic
    t0 = time.perf_counter()
    pins = pins if pins is not None else placement.pins
    circuit = placement.circuit
    cells = dict(placement.cells)
    result = RepairResult(REPAIRED, None)
    max_outer = 2 * len(find_conflicts(placement, fabric)) + 8

    for _ in range(max_outer):
        current = Placement(cells, circuit, fabric, pins)
        conflicts = find_conflicts(current, fabric)
        if not conflicts:
            result.placement = current
            result.status = REPAIRED
            return result
        center = _center_of_mass(conflicts)
        conflict_cells = {c.cell for c in conflicts}
        half = 1
        while True:
            if budget_seconds is not None and time.perf_counter() - t0 > budget_seconds:
                result.status = BUDGET
                result.placement = current
                result.residual_conflicts = conflicts
                result.diagnostics.append("budget exhausted during region growth")
                return result
            x0, y0, x1, y1 = _clip_region(center, half, fabric)
            whole = (x0, y0) == (0, 0) and (x1, y1) == (fabric.x - 1, fabric.y - 1)
            region = [(x, y) for y in range(y0, y1 + 1) for x in range(x0, x1 + 1)]
            region_set = set(region)
            if not whole and not (conflict_cells & region_set):
                half += 1
                continue
            freed = sorted(g for g, c in cells.items() if c in region_set)
            fixed = {g: c for g, c in cells.items() if c not in region_set}
            local_pins = PinSet()
            if pins is not None:
                for g in freed:
                    if g in pins.must:
                        local_pins.must[g] = pins.must[g] & region_set
                    if g in pins.forbid:
                        local_pins.forbid[g] = pins.forbid[g]
            sat_budget = None
            if budget_seconds is not None:
                remaining = budget_seconds - (time.perf_counter() - t0)
                sat_budget = SolveBudget(max_seconds=max(0.1, remaining))
            ok_pins = all(local_pins.must.get(g, {None}) for g in freed)
            if ok_pins:
                cnf, vm = encode(circuit, fabric, pins=local_pins, fixed=fixed, cells=region)
                res = solve(cnf, sat_budget)
                result.solver_seconds += res.stats.wall_time
                attempt_status = res.status
            else:
                # a pinned gate lost every allowed cell inside this region
                res = None
                attempt_status = "unsat"
            result.attempts.append(RegionAttempt(
                center, (x0, y0, x1, y1), len(freed), attempt_status,
                res.stats.wall_time if res else 0.0, len(conflicts)))
            if attempt_status == SAT:
                for g, c in decode(res.model, vm).items():
                    cells[g] = c
                result.freed_gates.update(freed)
                break
            if attempt_status == TIMEOUT:
                result.status = BUDGET
                result.placement = current
                result.residual_conflicts = conflicts
                result.diagnostics.append("solver budget exhausted inside region")
                return result
            if whole:
                result.status = FAILED
                result.placement = current
                result.residual_conflicts = conflicts
                result.diagnostics.append(
                    "no defect-avoiding assignment exists on the full fabric"
                    + (f": {'; '.join(cnf.diagnostics)}" if res is not None and cnf.diagnostics else ""))
                return result
            half += 1

    result.status = FAILED
    result.placement = Placement(cells, circuit, fabric, pins)
    result.residual_conflicts = find_conflicts(result.placement, fabric)
    result.diagnostics.append("outer-loop iteration cap reached without convergence")
    return result


def verify_repair(result: RepairResult, fabric: Fabric) -> bool:
    """True iff the repaired placement passes the structural validator."""
    if result.status != REPAIRED or result.placement is None:
        return False
    return validate(result.placement.with_fabric(fabric)).ok
