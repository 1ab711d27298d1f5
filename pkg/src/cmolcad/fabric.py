"""CMOL cell array: connectivity domains and static defect edits.

Every cell owns one input and one output nanowire; a cell can read the cells
whose output wires cross its input wire. That reachable set is the input
connectivity domain D_in(c); the output domain is its dual. The canonical
generator uses a square window of side s = round(sqrt(2r(r-1))) around the
cell (offset toward lower-left when s is even), so for the standard radius
r = 9 an interior cell sees 2r(r-1)-1 = 143 neighbors. Explicit per-cell
domain overrides take precedence over the generator; defects then edit the
result and can only shrink it.

Defect kinds:
  wire_break   - a nanowire fractures; only the pin-side segment stays usable.
                 The wire is modeled as the column-major traversal of the
                 base domain, and a break at fraction t keeps the leading
                 floor(t*n) entries.
  stuck_open   - the nanodevice between a's output wire and b's input wire is
                 permanently OFF: a leaves D_in(b).
  stuck_closed - the device is permanently ON. Domains are unchanged; the
                 forced connection becomes an assignment constraint and a
                 simulation term.
  dead_cell    - the cell is unusable and leaves every domain.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional

Cell = tuple[int, int]

DEFECT_KINDS = ("wire_break", "stuck_open", "stuck_closed", "dead_cell")


class FabricError(ValueError):
    """Raised on invalid fabric geometry or defect specifications."""


@dataclass(frozen=True)
class DefectSpec:
    """One static defect. `a` is the owning cell (output side for device
    defects); `b` is the input-side cell for stuck_open/stuck_closed."""
    kind: str
    a: Cell
    b: Optional[Cell] = None
    wire: Optional[str] = None
    break_fraction: Optional[float] = None

    def to_json(self) -> dict:
        obj: dict = {"kind": self.kind, "a": list(self.a)}
        if self.b is not None:
            obj["b"] = list(self.b)
        if self.wire is not None:
            obj["wire"] = self.wire
        if self.break_fraction is not None:
            obj["frac"] = self.break_fraction
        return obj

    @staticmethod
    def from_json(obj: dict) -> "DefectSpec":
        return DefectSpec(
            kind=obj["kind"],
            a=tuple(obj["a"]),
            b=tuple(obj["b"]) if obj.get("b") is not None else None,
            wire=obj.get("wire"),
            break_fraction=obj.get("frac"),
        )


def window_side(r: int) -> int:
    return round(math.sqrt(2 * r * (r - 1)))


class Fabric:
    """Rectangular cell array with per-cell connectivity domains.

    Immutable after construction; `apply_defect` returns a new value.
    Coordinates are zero-based, x right, y up.
    """

    def __init__(
        self,
        x: int,
        y: int,
        r: int = 9,
        domain_override: Optional[dict[Cell, Iterable[Cell]]] = None,
        defects: Iterable[DefectSpec] = (),
    ) -> None:
        if x < 1 or y < 1:
            raise FabricError(f"fabric dimensions must be positive, got {x}x{y}")
        if r < 2:
            raise FabricError(f"connectivity radius must be >= 2, got {r}")
        self.x = x
        self.y = y
        self.r = r
        self.domain_override: dict[Cell, frozenset[Cell]] = {}
        for cell, dom in (domain_override or {}).items():
            cell = tuple(cell)
            if not self.in_bounds(cell):
                raise FabricError(f"domain override for out-of-bounds cell {cell}")
            dom = frozenset(tuple(d) for d in dom)
            for d in dom:
                if not self.in_bounds(d):
                    raise FabricError(f"domain override entry {d} out of bounds")
            self.domain_override[cell] = dom - {cell}
        self.defects: tuple[DefectSpec, ...] = tuple(defects)
        for d in self.defects:
            self._check_defect(d)
        self._dead = frozenset(d.a for d in self.defects if d.kind == "dead_cell")
        self._eff_in = self._effective_inputs()
        self._eff_out: dict[Cell, frozenset[Cell]] = {c: frozenset() for c in self.cells()}
        inv: dict[Cell, set[Cell]] = {c: set() for c in self.cells()}
        for c, dom in self._eff_in.items():
            for src in dom:
                inv[src].add(c)
        self._eff_out = {c: frozenset(s) for c, s in inv.items()}

    # -- geometry ------------------------------------------------------------

    def in_bounds(self, c: Cell) -> bool:
        return 0 <= c[0] < self.x and 0 <= c[1] < self.y

    def cells(self) -> list[Cell]:
        return [(cx, cy) for cy in range(self.y) for cx in range(self.x)]

    def usable_cells(self) -> list[Cell]:
        return [c for c in self.cells() if c not in self._dead]

    def dead_cells(self) -> frozenset[Cell]:
        return self._dead

    def _window(self, c: Cell, invert: bool = False) -> frozenset[Cell]:
        s = window_side(self.r)
        if s % 2 == 0:
            lo, hi = -s // 2, s // 2 - 1
        else:
            lo, hi = -(s - 1) // 2, (s - 1) // 2
        if invert:
            lo, hi = -hi, -lo
        cx, cy = c
        cells = frozenset(
            (cx + dx, cy + dy)
            for dx in range(lo, hi + 1)
            for dy in range(lo, hi + 1)
            if self.in_bounds((cx + dx, cy + dy))
        )
        return cells - {c}

    def base_input_domain(self, c: Cell) -> frozenset[Cell]:
        """Domain before defect edits: override if present, else generator."""
        if not self.in_bounds(c):
            raise FabricError(f"cell {c} out of bounds")
        if c in self.domain_override:
            return self.domain_override[c]
        return self._window(c)

    def base_output_domain(self, c: Cell) -> frozenset[Cell]:
        if not self.in_bounds(c):
            raise FabricError(f"cell {c} out of bounds")
        if self.domain_override:
            return frozenset(c2 for c2 in self.cells() if c in self.base_input_domain(c2))
        return self._window(c, invert=True)

    # -- defect application ----------------------------------------------------

    def _check_defect(self, d: DefectSpec) -> None:
        if d.kind not in DEFECT_KINDS:
            raise FabricError(f"unknown defect kind {d.kind!r}")
        if not self.in_bounds(d.a):
            raise FabricError(f"{d.kind} at out-of-bounds cell {d.a}")
        if d.kind in ("stuck_open", "stuck_closed"):
            if d.b is None or not self.in_bounds(d.b):
                raise FabricError(f"{d.kind} requires an in-bounds input-side cell, got {d.b}")
            if d.a not in self.base_input_domain(d.b):
                raise FabricError(
                    f"{d.kind} pair {d.a}->{d.b} not adjacent in the defect-free fabric")
        if d.kind == "wire_break":
            if d.wire not in ("input", "output"):
                raise FabricError(f"wire_break needs wire 'input' or 'output', got {d.wire}")
            if d.break_fraction is None or not 0.0 < d.break_fraction < 1.0:
                raise FabricError(f"wire_break fraction must be in (0,1), got {d.break_fraction}")

    @staticmethod
    def _broken_tail(order: list[Cell], fraction: float) -> set[Cell]:
        n = len(order)
        drop = math.ceil((1.0 - fraction) * n)
        return set(order[n - drop:]) if drop > 0 else set()

    def _effective_inputs(self) -> dict[Cell, frozenset[Cell]]:
        removed: dict[Cell, set[Cell]] = {c: set() for c in self.cells()}
        for d in self.defects:
            if d.kind == "stuck_open":
                removed[d.b].add(d.a)
            elif d.kind == "wire_break":
                if d.wire == "input":
                    order = sorted(self.base_input_domain(d.a))
                    removed[d.a] |= self._broken_tail(order, d.break_fraction)
                else:
                    order = sorted(self.base_output_domain(d.a))
                    for far in self._broken_tail(order, d.break_fraction):
                        removed[far].add(d.a)
        eff = {}
        for c in self.cells():
            if c in self._dead:
                eff[c] = frozenset()
            else:
                eff[c] = self.base_input_domain(c) - removed[c] - self._dead
        return eff

    def input_domain(self, c: Cell) -> frozenset[Cell]:
        """D_in(c) after overrides, boundary clipping and defect edits."""
        if not self.in_bounds(c):
            raise FabricError(f"cell {c} out of bounds")
        return self._eff_in[c]

    def output_domain(self, c: Cell) -> frozenset[Cell]:
        """Dual of input_domain: c' is here iff c is in D_in(c')."""
        if not self.in_bounds(c):
            raise FabricError(f"cell {c} out of bounds")
        return self._eff_out[c]

    def stuck_closed_pairs(self) -> list[tuple[Cell, Cell]]:
        return [(d.a, d.b) for d in self.defects if d.kind == "stuck_closed"]

    def apply_defect(self, d: DefectSpec) -> "Fabric":
        self._check_defect(d)
        return self.with_defects(self.defects + (d,))

    def with_defects(self, defects: Iterable[DefectSpec]) -> "Fabric":
        return Fabric(self.x, self.y, self.r,
                      {c: set(v) for c, v in self.domain_override.items()},
                      tuple(defects))

    def without_defects(self) -> "Fabric":
        return self.with_defects(())

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        obj: dict = {"x": self.x, "y": self.y, "r": self.r}
        if self.domain_override:
            obj["domains"] = {
                f"{c[0]},{c[1]}": sorted([list(d) for d in dom])
                for c, dom in sorted(self.domain_override.items())
            }
        if self.defects:
            obj["defects"] = [d.to_json() for d in self.defects]
        return obj

    @staticmethod
    def from_json(src: str | dict) -> "Fabric":
        obj = json.loads(src) if isinstance(src, str) else src
        override = None
        if obj.get("domains"):
            override = {}
            for key, dom in obj["domains"].items():
                cx, cy = key.split(",")
                override[(int(cx), int(cy))] = [tuple(d) for d in dom]
        defects = [DefectSpec.from_json(d) for d in obj.get("defects", [])]
        return Fabric(obj["x"], obj["y"], obj.get("r", 9), override, defects)

    def __repr__(self) -> str:
        return f"Fabric({self.x}x{self.y}, r={self.r}, defects={len(self.defects)})"
