"""Random defect injection under a spatial Gaussian acceptance rule.

A run picks a cluster center (given, or uniform over cells), evaluates
pdf(x,y) = exp(-((x-x0)^2+(y-y0)^2) / (2 sigma^2)) / (sigma sqrt(2 pi)) at
every candidate site, and injects the defect where a uniform draw falls at
or below the pdf. The density is used directly as the acceptance threshold,
unnormalized, exactly as the model states it.

Stream discipline (PCG64, single stream, fixed order): the center consumes
two draws when not given; then kinds are visited in the canonical order
wire_break, stuck_open, stuck_closed, dead_cell; sites per kind are visited
row-major (pairs: input-side cell row-major, then partner in domain order);
one uniform draw per site; an accepted wire_break immediately consumes one
draw for the wire side and one for the break fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fabric import DEFECT_KINDS, Cell, DefectSpec, Fabric


@dataclass
class InjectionConfig:
    sigma: float
    center: Optional[Cell] = None
    seed: int = 0
    kinds: tuple[str, ...] = DEFECT_KINDS

    def __post_init__(self) -> None:
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        for k in self.kinds:
            if k not in DEFECT_KINDS:
                raise ValueError(f"unknown defect kind {k!r}")


def gaussian_pdf(cell: Cell, center: Cell, sigma: float) -> float:
    d2 = (cell[0] - center[0]) ** 2 + (cell[1] - center[1]) ** 2
    return math.exp(-d2 / (2.0 * sigma * sigma)) / (sigma * math.sqrt(2.0 * math.pi))


def _row_major(fabric: Fabric) -> list[Cell]:
    return fabric.cells()  # already row-major: y outer, x inner


def inject(fabric: Fabric, cfg: InjectionConfig) -> tuple[Fabric, list[DefectSpec]]:
    """Draw defects onto `fabric`; returns (edited fabric, injected list).

    Fully reproducible from (fabric, cfg). Candidate sites are cells for
    dead_cell/wire_break and defect-free in-domain pairs for stuck_open/
    stuck_closed with the pdf evaluated at the input-side cell.
    """
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    if cfg.center is not None:
        center = cfg.center
    else:
        center = (int(rng.integers(0, fabric.x)), int(rng.integers(0, fabric.y)))

    injected: list[DefectSpec] = []
    for kind in DEFECT_KINDS:
        if kind not in cfg.kinds:
            continue
        if kind == "wire_break":
            for cell in _row_major(fabric):
                if rng.random() <= gaussian_pdf(cell, center, cfg.sigma):
                    wire = "input" if rng.random() < 0.5 else "output"
                    frac = 0.2 + 0.6 * rng.random()
                    injected.append(DefectSpec("wire_break", cell, wire=wire, break_fraction=frac))
        elif kind in ("stuck_open", "stuck_closed"):
            for b in _row_major(fabric):
                for a in sorted(fabric.base_input_domain(b)):
                    if rng.random() <= gaussian_pdf(b, center, cfg.sigma):
                        injected.append(DefectSpec(kind, a, b=b))
        else:  # dead_cell
            for cell in _row_major(fabric):
                if rng.random() <= gaussian_pdf(cell, center, cfg.sigma):
                    injected.append(DefectSpec("dead_cell", cell))
    return fabric.with_defects(fabric.defects + tuple(injected)), injected
