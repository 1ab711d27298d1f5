"""SAT-based cell assignment toolkit for CMOL nanofabrics.

Pipeline: parse a gate-level netlist, carve sequential elements, sweep dead
logic, rewrite to NOR/NOT, encode the cell-assignment problem as CNF, solve
it, and repair placements against static fabric defects by localized
re-assignment.
"""

from .netlist import Circuit, Gate, NetlistError, parse_bench, parse_circuit_json, carve_sequential, sweep
from .nor import to_nor, check_pos_conversion
from .fabric import Fabric, DefectSpec, FabricError
from .encoder import CnfFormula, PinSet, VarMap, encode, emit_dimacs, decode
from .solver import SolveBudget, SolveResult, solve, check_model
from .placer import Placement, place, validate, simulate_fabric
from .defects import InjectionConfig, inject
from .reconfig import find_conflicts, reconfigure

__version__ = "0.1.0"

__all__ = [
    "Circuit", "Gate", "NetlistError", "parse_bench", "parse_circuit_json",
    "carve_sequential", "sweep",
    "to_nor", "check_pos_conversion",
    "Fabric", "DefectSpec", "FabricError",
    "CnfFormula", "PinSet", "VarMap", "encode", "emit_dimacs", "decode",
    "SolveBudget", "SolveResult", "solve", "check_model",
    "Placement", "place", "validate", "simulate_fabric",
    "InjectionConfig", "inject",
    "find_conflicts", "reconfigure",
]
