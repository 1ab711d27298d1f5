import json
import random

import pytest

from cmolcad.encoder import PinSet
from cmolcad.fabric import DefectSpec, Fabric
from cmolcad.netlist import Circuit, parse_bench
from cmolcad.placer import (Placement, PlacementError, choose_fabric, equivalence_vectors,
                            perimeter_cells, perimeter_pins, place, simulate_fabric, validate)
from cmolcad.solver import SAT, UNSAT

from helpers import brute_force_place, random_fabric, random_nor_circuit


def adder_pins(circuit, drivers=None):
    """The published adder restrictions on a 4x5 region."""
    idx = circuit.by_name()
    out_driver = {circuit.gates[o].name: circuit.gates[o].fanin[0] for o in circuit.outputs}
    region = frozenset((x, y) for x in range(3) for y in range(4))
    pins = PinSet()
    pins.must[idx["A"]] = frozenset({(0, 4), (1, 4), (2, 4)})
    pins.must[idx["B"]] = frozenset({(0, 4), (1, 4), (2, 4)})
    pins.must[idx["CIN"]] = frozenset({(3, 1)})
    pins.must[out_driver["COUT"]] = frozenset({(0, 1)})
    pins.must[out_driver["SUM"]] = frozenset({(0, 0), (1, 0), (2, 0)})
    for g in circuit.assignable_ids():
        if g not in pins.must:
            pins.must[g] = region
    return pins


def test_adder_places_under_published_pins(adder_nor):
    fab = Fabric(4, 5, 9)
    pins = adder_pins(adder_nor)
    out = place(adder_nor, fab, pins)
    assert out.status == SAT
    assert validate(out.placement).ok
    vecs = equivalence_vectors(adder_nor.input_names())
    assert simulate_fabric(out.placement, vecs) == [adder_nor.simulate(v) for v in vecs]


def test_single_not_on_1x2():
    c = Circuit()
    a = c.add_gate("INPUT", (), "a")
    g = c.add_gate("NOT", [a.id], "g")
    c.add_gate("OUTPUT", [g.id], "f")
    f = Fabric(2, 1, 2, domain_override={(0, 0): [(1, 0)], (1, 0): [(0, 0)]})
    out = place(c, f)
    assert out.status == SAT
    assert simulate_fabric(out.placement, [{"a": False}, {"a": True}]) == [[True], [False]]


def test_mutually_unreachable_pair_unsat():
    c = Circuit()
    a = c.add_gate("INPUT", (), "a")
    g = c.add_gate("NOT", [a.id], "g")
    c.add_gate("OUTPUT", [g.id], "f")
    f = Fabric(2, 1, 2, domain_override={(0, 0): [], (1, 0): []})
    assert brute_force_place(c, f) is None
    assert place(c, f).status == UNSAT


def test_place_rejects_unconverted_circuit():
    c = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(f)\nf = AND(a,b)\n")
    with pytest.raises(PlacementError, match="NOR/NOT"):
        place(c, Fabric(3, 3, 9))


def test_choose_fabric_near_square():
    f = choose_fabric(19)
    assert (f.x, f.y) == (5, 5)
    assert f.x * f.y >= 19


def test_perimeter_pins_cover_io(s27_nor):
    f = Fabric(5, 5, 9)
    pins = perimeter_pins(s27_nor, f)
    ring = perimeter_cells(f)
    assert len(ring) == 16
    pinned = set(pins.must)
    assert pinned == set(s27_nor.inputs) | set(s27_nor.output_driver_ids())
    assert all(cells == ring for cells in pins.must.values())


def test_auto_fabric_pipeline(s27_nor):
    out = place(s27_nor)
    assert out.status == SAT
    assert validate(out.placement).ok


def test_validate_reports_swap_corruption(s27_nor):
    out = place(s27_nor, Fabric(5, 5, 9), perimeter_pins(s27_nor, Fabric(5, 5, 9)))
    assert out.status == SAT
    p = out.placement
    # swapping two connected gates breaks domain membership on a tight fabric
    corrupted = dict(p.cells)
    g_ids = s27_nor.assignable_ids()
    rng = random.Random(0)
    found = None
    for _ in range(200):
        g1, g2 = rng.sample(g_ids, 2)
        trial = dict(corrupted)
        trial[g1], trial[g2] = trial[g2], trial[g1]
        rep = validate(Placement(trial, p.circuit, p.fabric, p.pins))
        if not rep.ok:
            found = rep
            break
    assert found is not None
    assert {v["rule"] for v in found.violations} <= {"edge_domain", "pin_must"}


def test_validate_flags_dead_cell():
    c = Circuit()
    c.add_gate("INPUT", (), "a")
    c.add_gate("OUTPUT", [0], "a")
    f = Fabric(2, 1, 9).apply_defect(DefectSpec("dead_cell", (0, 0)))
    rep = validate(Placement({0: (0, 0)}, c, f))
    assert [v["rule"] for v in rep.violations] == ["dead_cell"]


def test_validate_flags_collision_and_bounds():
    c = Circuit()
    a = c.add_gate("INPUT", (), "a")
    b = c.add_gate("INPUT", (), "b")
    g = c.add_gate("NOR", [a.id, b.id], "g")
    c.add_gate("OUTPUT", [g.id], "f")
    f = Fabric(3, 3, 9)
    rep = validate(Placement({a.id: (0, 0), b.id: (0, 0), g.id: (9, 9)}, c, f))
    rules = {v["rule"] for v in rep.violations}
    assert "collision" in rules and "out_of_bounds" in rules


def test_validate_stuck_closed_rules():
    c = Circuit()
    a = c.add_gate("INPUT", (), "a")
    g = c.add_gate("NOT", [a.id], "g")
    c.add_gate("OUTPUT", [g.id], "f")
    f = Fabric(3, 1, 9).apply_defect(DefectSpec("stuck_closed", (0, 0), b=(1, 0)))
    # input node at the sink
    rep = validate(Placement({a.id: (1, 0), g.id: (2, 0)}, c, f))
    assert any(v["rule"] == "stuck_closed_source" for v in rep.violations)
    # occupant without its fanin at the source
    rep = validate(Placement({a.id: (2, 0), g.id: (1, 0)}, c, f))
    assert any(v["rule"] == "stuck_closed_fanin" for v in rep.violations)
    # occupant whose fanin is at the source: clean
    rep = validate(Placement({a.id: (0, 0), g.id: (1, 0)}, c, f))
    assert rep.ok


def test_simulation_includes_forced_device_term():
    # g = NOT(a) at the sink of a forced device whose source hosts a
    c = Circuit()
    a = c.add_gate("INPUT", (), "a")
    g = c.add_gate("NOT", [a.id], "g")
    c.add_gate("OUTPUT", [g.id], "f")
    f = Fabric(3, 1, 9).apply_defect(DefectSpec("stuck_closed", (0, 0), b=(1, 0)))
    p = Placement({a.id: (0, 0), g.id: (1, 0)}, c, f)
    assert validate(p).ok
    assert simulate_fabric(p, [{"a": False}, {"a": True}]) == [[True], [False]]


def test_simulate_fabric_requires_total_placement(adder_nor):
    fab = Fabric(4, 5, 9)
    out = place(adder_nor, fab, adder_pins(adder_nor))
    partial = dict(out.placement.cells)
    partial.pop(sorted(partial)[0])
    with pytest.raises(PlacementError, match="unplaced"):
        simulate_fabric(Placement(partial, adder_nor, fab), [{}])


def test_placement_json_round_trip(adder_nor):
    fab = Fabric(4, 5, 9)
    out = place(adder_nor, fab, adder_pins(adder_nor))
    blob = json.dumps(out.placement.to_json())
    again = Placement.from_json(json.loads(blob))
    assert validate(again).ok
    assert again.to_json() == out.placement.to_json()


def test_place_matches_brute_force_on_small_instances():
    rng = random.Random(2)
    agree = 0
    for trial in range(120):
        rng.seed(10_000 + trial)
        c = random_nor_circuit(rng, rng.randint(1, 2), rng.randint(1, 3))
        f = random_fabric(rng, max_side=3)
        pins = None
        if rng.random() < 0.3 and c.assignable_ids():
            g = rng.choice(c.assignable_ids())
            cell = (rng.randrange(f.x), rng.randrange(f.y))
            pins = PinSet(must={g: frozenset({cell})})
        oracle = brute_force_place(c, f, pins)
        out = place(c, f, pins)
        assert (out.status == SAT) == (oracle is not None), trial
        if out.status == SAT:
            assert validate(out.placement, pins).ok
        agree += 1
    assert agree == 120
