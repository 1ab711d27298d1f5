"""Rewrite AND/OR/NOT circuits into NOR/NOT form.

AND gates become NOR gates with inverters inserted at their inputs; OR gates
become NOR gates with an inverter at the output. Two cleanup loops then run
to fixpoint: inverter chains collapse, and inverters sharing the same driver
merge into one. For product-of-sums circuits the conversion preserves the
gate count exactly, which `check_pos_conversion` verifies.
"""

from __future__ import annotations

from dataclasses import dataclass

from .netlist import Circuit, NetlistError


def _is_inv(c: Circuit, gid: int) -> bool:
    g = c.gates[gid]
    return g.kind == "NOT" or (g.kind == "NOR" and len(g.fanin) == 1)


def _rewire(c: Circuit, old: int, new: int) -> bool:
    """Point every reader of `old` (gates and output markers) at `new`."""
    hit = False
    for g in c.gates.values():
        if old in g.fanin:
            g.fanin = [new if f == old else f for f in g.fanin]
            hit = True
    return hit


def _collapse_inverter_chains(c: Circuit) -> bool:
    changed = False
    again = True
    while again:
        again = False
        for gid in sorted(c.gates):
            if not _is_inv(c, gid):
                continue
            v = c.gates[gid].fanin[0]
            if _is_inv(c, v) and _rewire(c, gid, c.gates[v].fanin[0]):
                again = changed = True
    return changed


def _merge_duplicate_inverters(c: Circuit, hashed: bool = True) -> bool:
    """Merge inverters with identical fanin; `hashed=False` keeps the plain
    quadratic scan as a reference for tests."""
    changed = False
    again = True
    while again:
        again = False
        invs = [gid for gid in sorted(c.gates) if _is_inv(c, gid)]
        if hashed:
            by_src: dict[int, int] = {}
            for gid in invs:
                src = c.gates[gid].fanin[0]
                keep = by_src.setdefault(src, gid)
                if keep != gid and _rewire(c, gid, keep):
                    again = changed = True
        else:
            for u in invs:
                for v in invs:
                    if u < v and c.gates[u].fanin == c.gates[v].fanin and _rewire(c, v, u):
                        again = changed = True
    return changed


def _prune_unread(c: Circuit) -> None:
    again = True
    while again:
        again = False
        read = set()
        for g in c.gates.values():
            read.update(g.fanin)
        for gid in sorted(c.gates):
            g = c.gates[gid]
            if g.is_logic() and gid not in read:
                del c.gates[gid]
                again = True


def to_nor(c: Circuit) -> Circuit:
    """Convert an AND/OR/NOT/NOR circuit to NOR/NOT, logically equivalent.

    The result contains no inverter driving an inverter and no two inverters
    with identical fanin. Raises NetlistError on DFF markers or unknown
    kinds; carve sequential elements first.
    """
    if c.has_dff():
        raise NetlistError("unsupported gate kind DFF: carve sequential elements first")
    out = c.copy()

    for gid in sorted(out.gates):
        g = out.gates[gid]
        if g.kind == "NOR" and len(g.fanin) == 1:
            g.kind = "NOT"
        elif g.kind == "AND":
            g.fanin = [out.add_gate("NOT", [f], f"{g.name}$i{k}").id for k, f in enumerate(g.fanin)]
            g.kind = "NOR"
        elif g.kind == "OR":
            inv = out.add_gate("NOT", [], f"{g.name}$o")
            _rewire(out, gid, inv.id)
            inv.fanin = [gid]
            g.kind = "NOR"
        elif g.kind not in ("NOT", "NOR", "INPUT", "OUTPUT"):
            raise NetlistError(f"unsupported gate kind {g.kind}")

    while True:
        a = _collapse_inverter_chains(out)
        b = _merge_duplicate_inverters(out)
        if not (a or b):
            break
    _prune_unread(out)
    out.validate()
    return out


@dataclass
class PosConversionReport:
    """Gate-count check for product-of-sums inputs.

    `precondition_met` is False when the source circuit is not POS-shaped
    (at least one AND gate, every AND input driven by an OR); in that case
    `counts_equal` is reported but carries no guarantee.
    """
    precondition_met: bool
    pos_gates: int
    nor_gates: int

    @property
    def counts_equal(self) -> bool:
        return self.pos_gates == self.nor_gates

    @property
    def holds(self) -> bool:
        return self.precondition_met and self.counts_equal


def is_pos(c: Circuit) -> bool:
    ands = [g for g in c.gates.values() if g.kind == "AND"]
    if not ands:
        return False
    for g in ands:
        if any(c.gates[f].kind != "OR" for f in g.fanin):
            return False
    return True


def check_pos_conversion(c_pos: Circuit, c_nor: Circuit) -> PosConversionReport:
    """Compare logic-gate counts of a POS circuit and its NOR conversion."""
    return PosConversionReport(
        precondition_met=is_pos(c_pos),
        pos_gates=len(c_pos.logic_gate_ids()),
        nor_gates=len(c_nor.logic_gate_ids()),
    )
