import time
import warnings

import numpy as np
import pytest

from colorqec import circuits as cx
from colorqec import qec
from colorqec.code import build_triangular_488, in_stabilizer_group
from colorqec.pauli import PauliString, parse
from colorqec.tableau import encoded_tableau


def sp(label, n=7):
    return PauliString.from_sparse(n, label)


def test_reference_patterns(code3):
    assert qec.ideal_syndrome(sp("X2"), code3).values == (-1, -1, 1, 1, 1, 1)
    assert qec.ideal_syndrome(sp("X2"), code3).logical_z == -1
    assert qec.ideal_syndrome(sp("Z5"), code3).values == (1, 1, 1, 1, -1, 1)
    s = qec.ideal_syndrome(sp("Y3"), code3)
    assert s.values == (-1,) * 6 and s.logical_z == -1


def test_table_d3(code3):
    t = qec.build_syndrome_table(code3)
    assert len(t) == 22 and t.labels[0] == "I"
    assert t.labels[1:8] == [f"X{i}" for i in range(1, 8)]
    assert t.labels[15:] == [f"Z{i}" for i in range(1, 8)]
    assert len(set(t.labels)) == 22
    keys = [s.values for s in t.syndromes[1:]]
    assert len(set(keys)) == 21
    rows = t.to_csv_rows()
    assert rows[0] == ["label", "Sz1", "Sz2", "Sz3", "Sx1", "Sx2", "Sx3", "ZL", "XL"]


def test_table_cap(code5):
    with pytest.raises(ValueError):
        qec.build_syndrome_table(code5, cap=100)
    assert len(qec.build_syndrome_table(code5)) == 1 + 51 + 1224


def test_css_separation(code3):
    for q in range(1, 8):
        sx = qec.ideal_syndrome(sp(f"X{q}"), code3).values
        sz = qec.ideal_syndrome(sp(f"Z{q}"), code3).values
        assert all(v == 1 for v in sx[3:]) and any(v == -1 for v in sx[:3])
        assert all(v == 1 for v in sz[:3]) and any(v == -1 for v in sz[3:])


def test_homomorphism(code3):
    rng = np.random.default_rng(0)
    for _ in range(200):
        a = PauliString(7, int(rng.integers(128)), int(rng.integers(128)))
        b = PauliString(7, int(rng.integers(128)), int(rng.integers(128)))
        sa, sb = qec.ideal_syndrome(a, code3), qec.ideal_syndrome(b, code3)
        sab = qec.ideal_syndrome(a * b, code3)
        assert sab.values == tuple(x * y for x, y in zip(sa.values, sb.values))


def test_double_errors(code3):
    assert qec.ideal_syndrome(sp("Z2Z5"), code3).values == qec.ideal_syndrome(sp("Z1"), code3).values
    assert qec.ideal_syndrome(sp("Z3Z5"), code3).values == qec.ideal_syndrome(sp("Z4"), code3).values
    c = qec.lookup_decode(qec.ideal_syndrome(sp("Z2Z5"), code3), code3)
    assert c == sp("Z1")
    assert c * sp("Z2Z5") == code3.logical_z * code3.stabilizers_z[2]
    assert qec.residual_class(sp("Z2Z5"), c, code3) == "Z_L"


def test_decoder_examples(code3):
    assert qec.lookup_decode(qec.ideal_syndrome(sp("Z5"), code3), code3) == sp("Z5")
    assert qec.lookup_decode(qec.ideal_syndrome(sp("I"), code3), code3) == PauliString(7)
    with pytest.raises(ValueError):
        qec.lookup_decode(qec.Syndrome((0.5,) * 6), code3)


def test_decoder_unmatched_syndrome():
    code = build_triangular_488(5)
    dec = qec.LookupDecoder(code, max_weight=1)
    with pytest.raises(qec.DecodingError):
        dec.decode(qec.ideal_syndrome(sp("X1X17", 17), code))


def test_decoder_tie_break(code5):
    dec = qec.LookupDecoder(code5)
    # weight-2 entries keep the first error in (weight, qubit, X<Y<Z) order
    seen = {}
    for e in qec.enumerate_errors(17, 2):
        seen.setdefault(qec.syndrome_bits(e, code5), e)
    assert all(dec.table[k] == v for k, v in seen.items())


def test_extended_search_warns(code3):
    with pytest.raises(ValueError):
        qec.LookupDecoder(code3, max_weight=2)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        dec = qec.LookupDecoder(code3, extended=True)
    assert dec.max_weight == 2 and any(issubclass(x.category, RuntimeWarning) for x in w)


def test_decode_sweeps(code3, code5):
    r3 = qec.decode_sweep(code3)
    assert r3.n_errors == r3.corrected == 21
    r5 = qec.decode_sweep(code5)
    assert r5.by_weight == {1: (51, 51), 2: (1224, 1224)}


def test_weight_two_fails_on_d3(code3):
    r = qec.decode_sweep(code3, max_weight=1, states=("zero",))
    assert not r.failures
    dec = qec.LookupDecoder(code3)
    e = sp("Z2Z5")
    assert qec.residual_class(e, dec.decode(qec.ideal_syndrome(e, code3)), code3) != "stabilizer"


def test_tableau_syndromes_match_oracle():
    code = build_triangular_488(7)
    rng = np.random.default_rng(3)
    errs = qec.random_errors(code.n, 300, 4, rng)
    vals = qec.tableau_syndromes(encoded_tableau(code, "zero"), errs, code)
    keys = qec.values_to_key(vals)
    assert keys == [qec.syndrome_bits(e, code) for e in errs]


def test_d11_batch_speed():
    code = build_triangular_488(11)
    errs = qec.random_errors(code.n, 10_000, 5, np.random.default_rng(0))
    t = time.perf_counter()
    vals = qec.tableau_syndromes(encoded_tableau(code, "zero"), errs, code)
    assert time.perf_counter() - t < 5.0
    assert vals.shape == (10_000, 70)


def test_sampling_statistics(rng):
    exact = qec.Syndrome((0.3, -0.8, 1.0, -1.0, 0.0, 0.5))
    s = qec.sample_syndrome(exact, 100_000, rng)
    assert np.max(np.abs(s.array - exact.array)) < 0.02
    assert s.values[2] == 1.0 and s.values[3] == -1.0
    ps = [(1 + qec.sample_syndrome(qec.Syndrome((0.0,)), 1000, rng).values[0]) / 2 for _ in range(2000)]
    assert abs(np.std(ps) - 0.0158) < 0.0016
    with pytest.raises(ValueError):
        qec.sample_syndrome(exact, 0, rng)


def test_sample_from_state(code3, rng):
    st = cx.ideal_logical_state("zero", code3)
    s = qec.sample_syndrome(st, 5, rng, code=code3)
    assert s.values == (1.0,) * 6


def test_trace_distance():
    a = qec.Syndrome((1, 1, 1, 1, 1, 1))
    b = qec.Syndrome((1, 1, -1, 1, 1, 1))
    assert qec.trace_distance(a, a) == 0
    assert qec.trace_distance(a, b) == 2 == qec.trace_distance(b, a)
    with pytest.raises(ValueError):
        qec.trace_distance(a, qec.Syndrome((1,)))


def test_classify(code3, rng):
    t = qec.build_syndrome_table(code3)
    assert qec.classify(qec.ideal_syndrome(sp("Z5"), code3), t) == "Z5"
    hits = sum(qec.classify(qec.sample_syndrome(t.row("Y3"), 1000, rng), t) == "Y3" for _ in range(200))
    assert hits == 200
    lab, dist, tied = qec.classify_detail(qec.Syndrome((0.0,) * 6), t)
    assert lab == "I" and tied


def test_mc_success(code3):
    refs = qec.build_syndrome_table(code3).scaled(0.5)
    rng = np.random.default_rng(11)
    assert qec.mc_success_rate("Y3", refs, 1000, 5000, rng) == 1.0
    low = qec.mc_success_rate("Y3", refs, 1, 5000, rng)
    assert low < 0.7
    assert qec.mc_success_rate("Y3", refs, 20, 5000, rng) >= 0.99


def test_mc_curve_reproducible(code3):
    refs = qec.build_syndrome_table(code3).scaled(0.5)
    a = qec.mc_curve("Y3", refs, [1, 5, 10], 1000, seed=4)
    b = qec.mc_curve("Y3", refs, [1, 5, 10], 1000, seed=4)
    c = qec.mc_curve("Y3", refs, [1, 5, 10], 1000, seed=4, workers=2)
    assert a == b == c
    assert all(p["wilson_low"] <= p["success_rate"] <= p["wilson_high"] for p in a)


def test_wilson():
    lo, hi = qec.wilson_interval(50, 100)
    assert lo < 0.5 < hi and abs((lo + hi) / 2 - 0.5) < 1e-12
    assert qec.wilson_interval(0, 0) == (0.0, 1.0)
    assert qec.wilson_interval(100, 100)[1] == 1.0


def test_injection_matches_ideal_syndrome(code3):
    st = cx.ideal_logical_state("zero", code3)
    for label in ("X2", "Z5", "Y3", "Z2Z5"):
        s = qec.stabilizer_expectations(qec.inject(st, sp(label)), code3)
        ideal = qec.ideal_syndrome(sp(label), code3)
        assert np.allclose(s.values, ideal.values)
        assert abs(s.logical_z - ideal.logical_z) < 1e-9
        assert abs(s.logical_x) < 1e-9


def test_coset_equivalence(code3):
    # errors differing by a stabilizer decode to corrections differing by a stabilizer
    dec = qec.LookupDecoder(code3)
    for q in range(1, 8):
        e = sp(f"X{q}")
        f = e * code3.stabilizers_x[0]
        ce = dec.decode(qec.ideal_syndrome(e, code3))
        cf = dec.decode(qec.ideal_syndrome(f, code3))
        assert in_stabilizer_group((ce * cf).unsigned(), code3, signed=False)
    assert parse("XXXXIII") == code3.stabilizers_x[0]
