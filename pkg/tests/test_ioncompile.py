import math

import numpy as np
import pytest

from colorqec import circuits as cx
from colorqec import densesim as ds
from colorqec import ioncompile as ic

PI = math.pi


def compiled(label, code):
    return ic.compile_circuit(cx.cardinal_prep(label, code))


@pytest.mark.parametrize("pop,size,ac", [("in_one", 3, 1), ("in_zero", 6, 2), ("full", 9, 3)])
def test_macro_sizes(pop, size, ac):
    ops = ic.decouple_macro(0, pop)
    assert len(ops) == size == len(ic.recouple_macro(0, pop))
    assert sum(o.kind == "AC" for o in ops) == ac
    assert sum(o.kind == "RES" for o in ops) == size - ac
    assert ic.TABLE_I[f"decouple-{pop}"][4] == size
    with pytest.raises(ic.CompileError):
        ic.decouple_macro(0, "half")


def test_in_one_macro_shape():
    a, b, c = ic.decouple_macro(3, "in_one")
    assert (a.kind, b.kind, c.kind) == ("RES", "AC", "RES")
    assert a.theta == c.theta == PI / 2 and b.theta == PI
    assert math.isclose(c.phi, a.phi - PI)


def test_encoding_counts(code3):
    assert ic.resource_count(compiled("one", code3)).as_tuple() == (3, 1, 38, 70, 112)
    assert ic.resource_count(compiled("zero", code3)).as_tuple() == (3, 0, 38, 70, 111)


@pytest.mark.parametrize("gate,want", [("X_L", (0, 1, 0, 0, 1)), ("Z_L", (0, 0, 7, 0, 7)),
                                       ("H_L", (0, 1, 7, 0, 8)), ("K_L", (0, 0, 7, 0, 7))])
def test_transversal_gate_counts(code3, gate, want):
    p = ic.compile_circuit(cx.transversal_gate(gate, code3))
    assert ic.resource_count(p).as_tuple() == want
    assert ic.check_against_table(gate, ic.resource_count(p)) == []


def test_counts_are_compositional(code3):
    zero = ic.resource_count(compiled("zero", code3))
    gates = {g: ic.resource_count(ic.compile_circuit(cx.transversal_gate(g, code3)))
             for g in ("X_L", "H_L", "K_L")}
    for label, seq in cx.CARDINAL_SEQUENCES.items():
        want = zero
        for g in seq:
            want = want + gates[g]
        assert ic.resource_count(compiled(label, code3)) == want
    long = ic.resource_count(ic.compile_circuit(cx.gate_repeat_circuit(code3, 10)))
    assert long.total == ic.resource_count(compiled("minus_y", code3)).total + 10


def test_columns_match_table_for_cardinals(code3):
    # the category columns agree with the tabulated rows for every cardinal state
    for label in ("plus_x", "minus_x", "plus_y", "minus_y"):
        got = ic.resource_count(compiled(label, code3)).as_tuple()
        assert got[:4] == ic.TABLE_I[label][:4]


def test_empty_program_counts():
    assert ic.count_ops([]).as_tuple() == (0, 0, 0, 0, 0)


def test_table_ii(code3):
    p = compiled("zero", code3)
    assert dict(zip(range(1, 8), (i + 1 for i in p.qubit_to_ion))) == ic.TABLE_II_MAP
    assert p.addressed_per_qubit() == ic.TABLE_II_PULSES
    assert compiled("one", code3).addressed_per_qubit() == ic.TABLE_II_PULSES


@pytest.mark.parametrize("label", [lab.value for lab in cx.LogicalLabel])
def test_noiseless_pulses_match_logical_simulation(code3, label):
    circ = cx.cardinal_prep(label, code3)
    a = ic.simulate_pulses(ic.compile_circuit(circ))
    b = cx.simulate_dense(circ)
    assert ds.uhlmann_fidelity(a, b) > 1 - 1e-9
    assert ds.uhlmann_fidelity(a, cx.ideal_logical_state(label, code3)) > 1 - 1e-9


def test_zero_eps_is_noiseless(code3):
    p = compiled("plus_y", code3)
    a = ic.simulate_pulses(p, ic.PulseNoise(eps=0.0))
    b = ic.simulate_pulses(p)
    assert np.allclose(a.data, b.data)


def _one_pulse(kind, n=3, ion=1):
    op = ic.NativeOp(kind, PI, 0.0, ion)
    return ic.PulseProgram(n, (op,), tuple(range(n)))


def _deviation(prog, eps):
    probe = ds.random_pure(prog.n, np.random.default_rng(5))
    a = ic.simulate_pulses(prog, ic.PulseNoise(eps=eps), state=probe)
    b = ic.simulate_pulses(prog, state=probe)
    return 1 - ds.uhlmann_fidelity(a, b)


def test_crosstalk_scaling():
    res, ac = _one_pulse("RES"), _one_pulse("AC")
    e = 0.01
    r_res = _deviation(res, 2 * e) / _deviation(res, e)
    r_ac = _deviation(ac, 2 * e) / _deviation(ac, e)
    assert abs(r_res - 4) < 0.05       # infidelity ~ (eps theta)^2
    assert abs(r_ac - 16) < 0.2        # infidelity ~ (eps^2 theta)^2
    assert _deviation(ac, 0.05) < _deviation(res, 0.05) / 100


def test_crosstalk_degrades_encoding(code3):
    p = compiled("zero", code3)
    ideal = cx.ideal_logical_state("zero", code3)
    f = ds.uhlmann_fidelity(ic.simulate_pulses(p, ic.PulseNoise(eps=0.05)), ideal)
    f_nomacro = ds.uhlmann_fidelity(
        ic.simulate_pulses(p, ic.PulseNoise(eps=0.05, crosstalk_in_macros=False)), ideal)
    assert f < 1 - 1e-4 and f_nomacro > f


def test_validator_rejects_bad_programs():
    dec = ic.NativeOp("DEC", ion=0, population="in_one")
    rec = ic.NativeOp("REC", ion=0, population="in_one")
    pulse = ic.NativeOp("RES", PI / 2, 0.0, 0)
    ms = ic.NativeOp("MS", PI / 2, 0.0)
    idm = (0, 1)
    ic.PulseProgram(2, (dec, ms, rec), idm).validate()
    bad = [
        (dec, pulse, rec),                                   # pulse on hidden ion
        (dec,),                                              # never recoupled
        (dec, dec, rec, rec),                                # decoupled twice
        (ic.NativeOp("DEC", ion=0, population="in_zero"), rec),  # class mismatch / wrong cover
        (ms, dec, rec),                                      # entangled ion with partial macro
        (rec,),
    ]
    for ops in bad:
        with pytest.raises(ic.CompileError):
            ic.PulseProgram(2, ops, idm).validate()


def test_native_op_checks():
    with pytest.raises(ic.CompileError):
        ic.NativeOp("RES", PI, 0.0)
    with pytest.raises(ic.CompileError):
        ic.NativeOp("MS", PI, 0.0, 1)
    with pytest.raises(ic.CompileError):
        ic.NativeOp("AC", float("nan"), 0.0, 1)
    with pytest.raises(ic.CompileError):
        ic.NativeOp("FOO")


def test_listing_format(code3):
    text = compiled("zero", code3).to_text()
    first = text.splitlines()[0]
    assert first.startswith("RES θ=1.570796 φ=0.000000 ion=")
    assert "DEC class=in_one ion=" in text
    full = compiled("zero", code3).to_text(expand_macros=True)
    assert len(full.splitlines()) > len(text.splitlines())


def test_custom_map(code3):
    circ = cx.cardinal_prep("zero", code3)
    p = ic.compile_circuit(circ, {q: q for q in range(1, 8)})
    assert ds.uhlmann_fidelity(ic.simulate_pulses(p), cx.simulate_dense(circ)) > 1 - 1e-9
    with pytest.raises(ic.CompileError):
        ic.compile_circuit(circ, {1: 1, 2: 1, 3: 3, 4: 4, 5: 5, 6: 6, 7: 7})


def test_check_against_table():
    assert ic.check_against_table("encode-one", ic.ResourceCount(3, 1, 38, 70)) == []
    assert ic.check_against_table("encode-one", ic.ResourceCount(3, 1, 38, 71)) != []
    # shifted rows compare totals only
    assert ic.check_against_table("H_L", ic.ResourceCount(0, 1, 7, 0)) == []


def test_pulse_depolarizing_reduces_fidelity(code3):
    p = compiled("zero", code3)
    out = ic.simulate_pulses(p, ic.PulseNoise(depolarizing=0.002))
    f = ds.uhlmann_fidelity(out, cx.ideal_logical_state("zero", code3))
    assert 0.3 < f < 0.99
