"""Static placement diagrams: SVG grid or ASCII fallback.

Each occupied cell is drawn with a red output terminal at its lower-left
and a blue input terminal at its upper-right; straight lines between the
terminals trace the logical nets (not the physical crossbar). Output is a
pure function of the placement, suitable for golden-file comparison.
"""

from __future__ import annotations

from .placer import Placement

CELL = 44
PAD = 24


def render_svg(placement: Placement) -> str:
    f = placement.fabric
    c = placement.circuit
    width = f.x * CELL + 2 * PAD
    height = f.y * CELL + 2 * PAD

    def corner(cell):  # top-left pixel corner; fabric y points up
        return PAD + cell[0] * CELL, PAD + (f.y - 1 - cell[1]) * CELL

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    dead = f.dead_cells()
    for cell in f.cells():
        px, py = corner(cell)
        fill = "#d9d9d9" if cell in dead else "none"
        out.append(f'<rect x="{px}" y="{py}" width="{CELL}" height="{CELL}" '
                   f'fill="{fill}" stroke="#999999"/>')
    occupied = placement.cells
    for g1, g2 in c.edges():
        if g1 not in occupied or g2 not in occupied:
            continue
        x1, y1 = corner(occupied[g1])
        x2, y2 = corner(occupied[g2])
        out.append(f'<line x1="{x1 + 8}" y1="{y1 + CELL - 8}" x2="{x2 + CELL - 8}" y2="{y2 + 8}" '
                   f'stroke="#555555" stroke-width="1"/>')
    for gid, cell in sorted(occupied.items()):
        px, py = corner(cell)
        out.append(f'<circle cx="{px + 8}" cy="{py + CELL - 8}" r="3.5" fill="#cc2222"/>')
        out.append(f'<circle cx="{px + CELL - 8}" cy="{py + 8}" r="3.5" fill="#2244cc"/>')
        label = c.name_of(gid)
        if len(label) > 6:
            label = label[:5] + "…"
        out.append(f'<text x="{px + CELL / 2:.0f}" y="{py + CELL / 2 + 3:.0f}" '
                   f'font-family="monospace" font-size="9" text-anchor="middle">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_ascii(placement: Placement) -> str:
    f = placement.fabric
    c = placement.circuit
    at = placement.gate_at()
    dead = f.dead_cells()
    width = max([len(c.name_of(g)) for g in placement.cells] + [3])
    rows = [f"fabric {f.x}x{f.y} r={f.r} defects={len(f.defects)}"]
    for y in range(f.y - 1, -1, -1):
        row = []
        for x in range(f.x):
            cell = (x, y)
            if cell in at:
                row.append(c.name_of(at[cell]).ljust(width))
            elif cell in dead:
                row.append(("x" * 3).ljust(width))
            else:
                row.append(".".ljust(width))
        rows.append(" ".join(row).rstrip())
    return "\n".join(rows) + "\n"
