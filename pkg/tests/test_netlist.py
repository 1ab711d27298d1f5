import random

import pytest
from hypothesis import given, settings, strategies as st

from cmolcad.netlist import (Circuit, NetlistError, carve_sequential, circuit_to_json,
                             emit_bench, parse_bench, parse_circuit_json, sweep)
from cmolcad.placer import equivalence_vectors

from helpers import random_circuit


def test_single_not():
    c = parse_bench("INPUT(a)\nOUTPUT(f)\nf = NOT(a)\n")
    assert len(c.inputs) == 1
    assert len(c.outputs) == 1
    assert [c.gates[g].kind for g in c.logic_gate_ids()] == ["NOT"]
    assert c.simulate({"a": False}) == [True]
    assert c.simulate({"a": True}) == [False]


def test_comments_and_blank_lines():
    c = parse_bench("# header\n\nINPUT(a)  # trailing\nOUTPUT(f)\nf = NOT(a)\n")
    assert len(c.gates) == 3


def test_xor_expansion_truth_table():
    c = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(f)\nf = XOR(a,b)\n")
    kinds = sorted(c.gates[g].kind for g in c.logic_gate_ids())
    assert kinds == ["AND", "AND", "NOT", "NOT", "OR"]
    table = [c.simulate({"a": bool(a), "b": bool(b)})[0] for a in (0, 1) for b in (0, 1)]
    assert table == [False, True, True, False]


def test_three_input_xor_parity():
    c = parse_bench("INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(f)\nf = XOR(a,b,c)\n")
    for v in equivalence_vectors(["a", "b", "c"]):
        assert c.simulate(v) == [(v["a"] + v["b"] + v["c"]) % 2 == 1]


def test_nand_expansion():
    c = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(f)\nf = NAND(a,b)\n")
    for v in equivalence_vectors(["a", "b"]):
        assert c.simulate(v) == [not (v["a"] and v["b"])]


def test_buff_collapses_to_alias():
    c = parse_bench("INPUT(a)\nOUTPUT(f)\nb = BUFF(a)\nf = NOT(b)\n")
    assert len(c.logic_gate_ids()) == 1
    assert c.simulate({"a": True}) == [False]


def test_single_input_nor_normalizes_to_not():
    c = parse_bench("INPUT(a)\nOUTPUT(f)\nf = NOR(a)\n")
    assert [c.gates[g].kind for g in c.logic_gate_ids()] == ["NOT"]


def test_parse_errors():
    with pytest.raises(NetlistError, match="undefined signal"):
        parse_bench("INPUT(a)\nOUTPUT(f)\nf = NOT(zz)\n")
    with pytest.raises(NetlistError, match="duplicate definition"):
        parse_bench("INPUT(a)\nOUTPUT(f)\nf = NOT(a)\nf = NOT(a)\n")
    with pytest.raises(NetlistError, match="unsupported opcode"):
        parse_bench("INPUT(a)\nOUTPUT(f)\nf = MAJ3(a,a,a)\n")
    with pytest.raises(NetlistError, match="cyclic"):
        parse_bench("INPUT(a)\nOUTPUT(f)\nf = NOT(g)\ng = NOT(f)\n")


def test_pi_fed_output():
    c = parse_bench("INPUT(a)\nOUTPUT(a)\n")
    assert c.simulate({"a": True}) == [True]
    assert c.assignable_ids() == c.inputs


def test_carve_identity_on_combinational():
    c = parse_bench("INPUT(a)\nOUTPUT(f)\nf = NOT(a)\n")
    carved = carve_sequential(c)
    assert len(carved.gates) == len(c.gates)
    assert carved.inputs == c.inputs and carved.outputs == c.outputs


def test_carve_smallest_loop():
    c = parse_bench("INPUT(a)\nOUTPUT(f)\nq = DFF(nq)\nnq = NOT(q)\nf = AND(a, q)\n")
    carved = carve_sequential(c)
    assert not carved.has_dff()
    assert len(carved.inputs) == 2
    assert len(carved.outputs) == 2
    carved.topo_order()  # acyclic


def test_carve_s27_io_counts(s27_bench):
    carved = carve_sequential(parse_bench(s27_bench))
    assert len(carved.inputs) == 7
    assert len(carved.outputs) == 4
    assert not carved.has_dff()


def test_sweep_removes_unreachable_gate():
    c = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(f)\nf = NOT(a)\ndead = AND(a,b)\n")
    swept = sweep(c)
    assert len(swept.logic_gate_ids()) == 1
    for v in equivalence_vectors(["a", "b"]):
        assert swept.simulate(v) == c.simulate(v)


def test_sweep_idempotent():
    rng = random.Random(11)
    c = random_circuit(rng, 4, 12)
    once = sweep(c)
    twice = sweep(once)
    assert {g.id for g in once.gates.values()} == {g.id for g in twice.gates.values()}


def test_sweep_equivalence_random_circuit():
    rng = random.Random(5)
    c = random_circuit(rng, 5, 30)
    # orphan a few gates by rerouting one output
    swept = sweep(c)
    for _ in range(1000):
        v = {name: rng.random() < 0.5 for name in c.input_names()}
        assert swept.simulate(v) == c.simulate(v)


def test_bench_round_trip_isomorphic(s27_bench):
    c = parse_bench(s27_bench)
    again = parse_bench(emit_bench(c))
    assert circuit_to_json(c) == circuit_to_json(again)
    assert emit_bench(c) == emit_bench(again)


def test_json_round_trip():
    c = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(f)\nf = NOR(a,b)\n")
    again = parse_circuit_json(circuit_to_json(c))
    assert circuit_to_json(again) == circuit_to_json(c)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_random_round_trip_preserves_simulation(seed):
    rng = random.Random(seed)
    c = random_circuit(rng, rng.randint(1, 5), rng.randint(1, 10))
    again = parse_circuit_json(circuit_to_json(c))
    for v in equivalence_vectors(c.input_names(), limit_exhaustive=5):
        assert again.simulate(v) == c.simulate(v)


def test_duplicate_fanin_deduped():
    c = parse_bench("INPUT(a)\nOUTPUT(f)\nf = AND(a,a)\n")
    for v in ({"a": True}, {"a": False}):
        assert c.simulate(v) == [v["a"]]
