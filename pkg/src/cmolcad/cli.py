"""Command-line entry point chaining the assignment pipeline.

Subcommands: nor, place, verify, inject, reconfigure, render, bench.
Every artifact is a file (JSON, DIMACS, CSV, SVG); exit codes are 0 for
success, 1 when no assignment exists (or verification fails), 2 for invalid
input, 3 for an exhausted budget. Failures print one machine-readable JSON
object to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .defects import InjectionConfig, inject
from .encoder import PinSet, emit_dimacs, encode
from .fabric import DEFECT_KINDS, Fabric, FabricError
from .netlist import NetlistError, carve_sequential, circuit_to_json, emit_bench, parse_bench, parse_circuit_json, sweep
from .nor import check_pos_conversion, to_nor
from .placer import (Placement, PlacementError, choose_fabric, equivalence_vectors,
                     perimeter_pins, place, simulate_fabric, validate)
from .reconfig import BUDGET, REPAIRED, find_conflicts, reconfigure
from .render import render_ascii, render_svg
from .solver import SAT, TIMEOUT, UNSAT, SolveBudget

EXIT_OK = 0
EXIT_UNSAT = 1
EXIT_INVALID = 2
EXIT_BUDGET = 3


def _fail(code: int, kind: str, message: str) -> int:
    print(json.dumps({"error": {"type": kind, "message": message}}), file=sys.stderr)
    return code


def _load_circuit(path: str):
    text = Path(path).read_text()
    if path.endswith(".bench"):
        return parse_bench(text)
    return parse_circuit_json(text)


def _write_circuit(circuit, path: str) -> None:
    if path.endswith(".bench"):
        Path(path).write_text(emit_bench(circuit))
    else:
        Path(path).write_text(json.dumps(circuit_to_json(circuit), indent=1) + "\n")


def _budget(args) -> SolveBudget | None:
    if args.budget_seconds is None:
        return None
    return SolveBudget(max_seconds=args.budget_seconds)


# ---------------------------------------------------------------------------


def cmd_nor(args) -> int:
    raw = _load_circuit(args.input)
    combinational = sweep(carve_sequential(raw))
    nor_circuit = to_nor(combinational)
    report = check_pos_conversion(combinational, nor_circuit)
    counts = {
        "inputs": len(nor_circuit.inputs),
        "outputs": len(nor_circuit.outputs),
        "nor_not_gates": len(nor_circuit.logic_gate_ids()),
        "assignable_cells": len(nor_circuit.assignable_ids()),
    }
    print(json.dumps(counts))
    if report.precondition_met:
        note = "preserved" if report.counts_equal else "NOT preserved"
        print(f"POS input: gate count {note} "
              f"({report.pos_gates} -> {report.nor_gates})")
    if args.output:
        _write_circuit(nor_circuit, args.output)
    return EXIT_OK


def cmd_place(args) -> int:
    circuit = _load_circuit(args.input)
    fabric = Fabric.from_json(Path(args.fabric).read_text()) if args.fabric else None
    pins = None
    if args.pins:
        if fabric is None:
            return _fail(EXIT_INVALID, "usage", "--pins requires --fabric")
        pins = PinSet.from_json(json.loads(Path(args.pins).read_text()), circuit)
    elif fabric is not None and args.perimeter_io:
        pins = perimeter_pins(circuit, fabric)
    if args.emit_cnf:
        target = fabric if fabric is not None else choose_fabric(len(circuit.assignable_ids()))
        pre_pins = pins if pins is not None else (
            perimeter_pins(circuit, target) if fabric is None else None)
        cnf, _ = encode(circuit, target, pre_pins)
        Path(args.emit_cnf).write_text(emit_dimacs(cnf))
        fabric, pins = target, pre_pins
    outcome = place(circuit, fabric, pins, budget=_budget(args), seed=args.seed,
                    external_solver=args.external_solver)
    summary = {
        "status": outcome.status,
        "vars": outcome.num_vars,
        "clauses": outcome.num_clauses,
        "solve_seconds": round(outcome.solve_result.stats.wall_time, 4) if outcome.solve_result else None,
        "diagnostics": outcome.diagnostics,
    }
    print(json.dumps(summary))
    if outcome.status == TIMEOUT:
        return EXIT_BUDGET
    if outcome.status == UNSAT:
        return EXIT_UNSAT
    if args.output:
        Path(args.output).write_text(json.dumps(outcome.placement.to_json(), indent=1) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    placement = Placement.from_json(json.loads(Path(args.placement).read_text()))
    report = validate(placement)
    if report.violations:
        print(report.jsonl())
        return EXIT_UNSAT
    vectors = equivalence_vectors(placement.circuit.input_names())
    fab = simulate_fabric(placement, vectors)
    ref = [placement.circuit.simulate(v) for v in vectors]
    if fab != ref:
        bad = next(i for i in range(len(vectors)) if fab[i] != ref[i])
        print(json.dumps({"rule": "simulation_mismatch", "vector": vectors[bad],
                          "fabric": fab[bad], "circuit": ref[bad]}))
        return EXIT_UNSAT
    print(json.dumps({"ok": True, "gates": len(placement.cells), "vectors": len(vectors)}))
    return EXIT_OK


def cmd_inject(args) -> int:
    fabric = Fabric.from_json(Path(args.fabric).read_text())
    center = None
    if args.center:
        cx, cy = args.center.split(",")
        center = (int(cx), int(cy))
    kinds = tuple(args.kinds.split(",")) if args.kinds else DEFECT_KINDS
    cfg = InjectionConfig(sigma=args.sigma, center=center, seed=args.seed, kinds=kinds)
    edited, injected = inject(fabric, cfg)
    print(json.dumps({"injected": len(injected),
                      "by_kind": {k: sum(1 for d in injected if d.kind == k) for k in kinds}}))
    Path(args.output).write_text(json.dumps(edited.to_json(), indent=1) + "\n")
    return EXIT_OK


def cmd_reconfigure(args) -> int:
    placement = Placement.from_json(json.loads(Path(args.placement).read_text()))
    fabric = Fabric.from_json(Path(args.fabric).read_text())
    result = reconfigure(placement, fabric, budget_seconds=args.budget_seconds)
    print(json.dumps({
        "status": result.status,
        "attempts": len(result.attempts),
        "solver_seconds": round(result.solver_seconds, 4),
        "residual_conflicts": len(result.residual_conflicts),
    }))
    if args.log:
        Path(args.log).write_text(result.log_jsonl() + "\n")
    if result.status == REPAIRED:
        repaired = result.placement.with_fabric(fabric)
        Path(args.output).write_text(json.dumps(repaired.to_json(), indent=1) + "\n")
        return EXIT_OK
    return EXIT_BUDGET if result.status == BUDGET else EXIT_UNSAT


def cmd_render(args) -> int:
    placement = Placement.from_json(json.loads(Path(args.placement).read_text()))
    text = render_svg(placement) if args.output.endswith(".svg") else render_ascii(placement)
    Path(args.output).write_text(text)
    return EXIT_OK


def cmd_bench(args) -> int:
    suite = json.loads(Path(args.suite).read_text())
    base = Path(args.suite).parent
    fields = ["name", "inputs", "outputs", "cells", "x", "y", "vars", "clauses",
              "status", "solve_s", "sigma", "inject_seed", "defects", "conflicts",
              "reconfig_status", "reconfig_solver_s"]
    rows = []
    for run in suite["runs"]:
        circuit = _load_circuit(str(base / run["bench"]))
        nor_circuit = to_nor(sweep(carve_sequential(circuit)))
        n = len(nor_circuit.assignable_ids())
        if "x" in run and "y" in run:
            fabric = Fabric(run["x"], run["y"], run.get("r", 9))
        else:
            fabric = choose_fabric(n, run.get("r", 9))
        pins = perimeter_pins(nor_circuit, fabric)
        budget = SolveBudget(max_seconds=run.get("budget_seconds", args.budget_seconds))
        outcome = place(nor_circuit, fabric, pins, budget=budget, seed=args.seed)
        row = {
            "name": run.get("name", run["bench"]),
            "inputs": len(nor_circuit.inputs),
            "outputs": len(nor_circuit.outputs),
            "cells": n,
            "x": fabric.x,
            "y": fabric.y,
            "vars": outcome.num_vars,
            "clauses": outcome.num_clauses,
            "status": outcome.status,
            "solve_s": round(outcome.solve_result.stats.wall_time, 4) if outcome.solve_result else "",
        }
        if outcome.status == SAT and run.get("reconfig"):
            rc = run["reconfig"]
            cfg = InjectionConfig(sigma=rc["sigma"], seed=rc.get("seed", 0),
                                  center=tuple(rc["center"]) if "center" in rc else None,
                                  kinds=tuple(rc.get("kinds", DEFECT_KINDS)))
            defective, injected = inject(fabric, cfg)
            conflicts = find_conflicts(outcome.placement, defective)
            repair = reconfigure(outcome.placement, defective,
                                 budget_seconds=rc.get("budget_seconds", 60.0))
            row.update({
                "sigma": rc["sigma"],
                "inject_seed": rc.get("seed", 0),
                "defects": len(injected),
                "conflicts": len(conflicts),
                "reconfig_status": repair.status,
                "reconfig_solver_s": round(repair.solver_seconds, 4),
            })
        rows.append(row)
    out = args.output or "bench.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, restval="")
        writer.writeheader()
        writer.writerows(rows)
    print(json.dumps({"runs": len(rows), "csv": out}))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="cmolcad", description=__doc__)
    top.add_argument("--seed", type=int, default=0, help="seed for randomized stages")
    top.add_argument("--budget-seconds", type=float, default=None, help="global solver budget")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("nor", help="parse, carve, sweep and convert to NOR/NOT")
    p.add_argument("input")
    p.add_argument("-o", "--output", help=".json or .bench for the converted circuit")
    p.set_defaults(fn=cmd_nor)

    p = sub.add_parser("place", help="assign a NOR/NOT circuit to fabric cells")
    p.add_argument("input")
    p.add_argument("--fabric", help="fabric config JSON; default: auto near-square")
    p.add_argument("--pins", help="pin constraints JSON")
    p.add_argument("--perimeter-io", action="store_true",
                   help="pin inputs and output drivers to the perimeter of --fabric")
    p.add_argument("-o", "--output", help="placement JSON")
    p.add_argument("--emit-cnf", help="also write the DIMACS formula here")
    p.add_argument("--external-solver", help="shell command for an external DIMACS solver")
    p.set_defaults(fn=cmd_place)

    p = sub.add_parser("verify", help="validate a placement and check logic equivalence")
    p.add_argument("placement")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("inject", help="inject random defects under the Gaussian model")
    p.add_argument("fabric")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--center", help="x,y cluster center; default: random cell")
    p.add_argument("--kinds", help=f"comma list from {','.join(DEFECT_KINDS)}")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(fn=cmd_inject)

    p = sub.add_parser("reconfigure", help="repair a placement against fabric defects")
    p.add_argument("--placement", required=True)
    p.add_argument("--fabric", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--log", help="write region attempts as JSON lines")
    p.set_defaults(fn=cmd_reconfigure)

    p = sub.add_parser("render", help="draw a placement as SVG or ASCII")
    p.add_argument("placement")
    p.add_argument("-o", "--output", required=True, help=".svg or .txt")
    p.set_defaults(fn=cmd_render)

    p = sub.add_parser("bench", help="run an assignment/reconfiguration sweep, emit CSV")
    p.add_argument("suite")
    p.add_argument("-o", "--output", help="CSV path (default bench.csv)")
    p.set_defaults(fn=cmd_bench)
    return top


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (NetlistError, FabricError, PlacementError, ValueError, KeyError) as exc:
        return _fail(EXIT_INVALID, type(exc).__name__, str(exc))
    except FileNotFoundError as exc:
        return _fail(EXIT_INVALID, "FileNotFoundError", str(exc))
    except RuntimeError as exc:
        return _fail(EXIT_INVALID, "RuntimeError", str(exc))


if __name__ == "__main__":
    sys.exit(main())
