import math

import numpy as np
import pytest

from colorqec import analysis as an
from colorqec import circuits as cx
from colorqec import densesim as ds
from colorqec import qec
from colorqec.pauli import PauliString, parse

LABELS = [lab.value for lab in cx.LogicalLabel]


def test_projector_terms(code3):
    terms = an.projector_terms(list(code3.generators) + [code3.logical_z])
    assert len(terms) == 128
    assert terms[0] == PauliString(7)
    assert len(set(terms)) == 128
    total = sum(t.to_matrix() for t in terms) / 128
    assert np.allclose(total, cx.target_projector("zero", code3))
    with pytest.raises(ValueError):
        an.projector_terms([parse("X"), parse("Z")])


@pytest.mark.parametrize("label", LABELS)
def test_fidelity_pauli_vs_dense(code3, label):
    rng = np.random.default_rng(hash(label) % 1000)
    for _ in range(5):
        rho = ds.random_mixed(7, rng)
        assert abs(an.fidelity_pauli(rho, label, code3) - an.fidelity_dense(rho, label, code3)) < 1e-9


def test_fidelity_examples(code3):
    zero = cx.ideal_logical_state("zero", code3)
    assert abs(an.fidelity_pauli(zero, "zero", code3) - 1) < 1e-9
    mm = ds.maximally_mixed(7)
    assert abs(an.fidelity_pauli(mm, "zero", code3) - 1 / 128) < 1e-12
    noisy = cx.simulate_dense(cx.encoding_circuit(code3), noise=cx.NoiseModel(0.01))
    assert abs(an.fidelity_pauli(noisy, "zero", code3) - an.fidelity_dense(noisy, "zero", code3)) < 1e-9


def test_code_space_overlap(code3):
    assert abs(an.code_space_overlap(cx.ideal_logical_state("plus_y", code3), code3) - 1) < 1e-9
    assert abs(an.code_space_overlap(ds.maximally_mixed(7), code3) - 2 / 128) < 1e-12
    err = qec.inject(cx.ideal_logical_state("zero", code3), PauliString.from_sparse(7, "X2"))
    assert abs(an.code_space_overlap(err, code3)) < 1e-12


def test_fidelity_factorizes(code3, rng):
    for _ in range(10):
        rho = ds.random_mixed(7, rng)
        f = an.fidelity_pauli(rho, "one", code3)
        assert abs(f - an.code_space_overlap(rho, code3) * an.fidelity_in_cs(rho, "one", code3)) < 1e-9


def test_witness(code3):
    assert an.witness_from_fidelity(0.25) == 0
    assert not an.is_entangled(an.witness_from_fidelity(0.25))
    w = an.witness_from_fidelity(0.327)
    assert abs(w + 0.077) < 1e-12 and an.is_entangled(w)
    for label in LABELS:
        st = cx.ideal_logical_state(label, code3)
        assert abs(an.witness_value(st, code3, label) + 0.75) < 1e-9
    assert abs(an.witness_value(cx.ideal_logical_state("one", code3), code3) + 0.75) < 1e-9


def test_bloch(code3):
    m = an.logical_bloch(cx.ideal_logical_state("zero", code3), code3)
    assert np.allclose(m.bloch, (0, 0, 1)) and abs(m.bloch_length - 1) < 1e-9
    assert abs(m.avg_stabilizer - 1) < 1e-9
    m = an.logical_bloch(cx.ideal_logical_state("minus_y", code3), code3)
    assert np.allclose(m.bloch, (0, -1, 0))
    m = an.logical_bloch(ds.maximally_mixed(7), code3)
    assert np.allclose(m.bloch, 0) and m.bloch_length == 0


def test_code_metrics_report(code3):
    rho = cx.simulate_dense(cx.cardinal_prep("plus_x", code3), noise=cx.NoiseModel(0.01))
    m = an.code_metrics(rho, code3, "plus_x")
    m.check()
    d = m.to_dict(circuit="plus_x", seed=0)
    assert d["provenance"]["seed"] == 0 and len(d["bloch"]) == 3
    assert 0 < m.fidelity < m.fidelity_in_cs <= 1


def test_topological_order(code3):
    one = cx.ideal_logical_state("one", code3)
    fids = an.two_qubit_mixedness(one)
    assert len(fids) == 21 and all(abs(f - 1) < 1e-9 for f in fids.values())
    assert abs(ds.expectation(one, parse("ZIIZIIZ")) + 1) < 1e-9
    plus = cx.ideal_logical_state("plus_x", code3)
    assert abs(ds.expectation(plus, parse("XIIXIIX")) - 1) < 1e-9


def test_fit_exponential():
    pts = [(k, 1.0 * math.exp(-k / 10)) for k in range(11)]
    fit = an.fit_exponential(pts)
    assert abs(fit.A - 1) < 1e-6 and abs(fit.B - 10) < 1e-6 and fit.r_squared > 1 - 1e-12
    A, B, r2 = fit
    assert B == fit.B
    const = an.fit_exponential([(k, 0.7) for k in range(5)])
    assert const.B == math.inf and const.loss_per_step == 0
    with pytest.raises(ValueError):
        an.fit_exponential([(0, 1.0), (1, -0.5), (2, 0.2)])
    with pytest.raises(ValueError):
        an.fit_exponential([(0, 1.0), (1, 0.5)])
    w = an.fit_exponential(pts, weights=[1] * 10 + [0])
    assert abs(w.B - 10) < 1e-6


def test_loss_algebra():
    b = -1 / math.log(1 - 0.038)
    assert abs(b - 25.8) < 0.05
    assert abs(an.ExpFit(1.0, b, 1.0).loss_per_step - 0.038) < 1e-12


def test_decay_series_noiseless(code3):
    rows = an.gate_repeat_series(code3, 4)
    assert [round(r["Y_L"]) for r in rows] == [-1, 1, -1, 1, -1]


def test_decay_fit_with_noise(code3):
    rows = an.gate_repeat_series(code3, 10, p=0.004)
    fit = an.decay_fit(rows)
    assert fit.r_squared >= 0.99 and 0 < fit.loss_per_step < 0.1


def test_bootstrap(rng):
    mean, std = an.bootstrap_errorbars({"s": [500, 500]}, lambda f: f["s"][0], 1000, rng)
    assert abs(std - math.sqrt(0.25 / 1000)) / math.sqrt(0.25 / 1000) < 0.1
    _, std0 = an.bootstrap_errorbars({"s": [1000, 0]}, lambda f: f["s"][0], 200, rng)
    assert std0 == 0
    _, big = an.bootstrap_errorbars({"s": [50000, 50000]}, lambda f: f["s"][0], 200, rng)
    assert big < std / 5
    m, s = an.bootstrap_errorbars({"a": [700, 300], "b": [400, 600]},
                                  lambda f: an.expectation_from_freqs(f["a"]) + an.expectation_from_freqs(f["b"]),
                                  300, rng)
    assert abs(m - 0.2) < 0.02
    with pytest.raises(ValueError):
        an.bootstrap_errorbars({"s": [1, 1]}, lambda f: 0, 50, rng)
    with pytest.raises(ValueError):
        an.bootstrap_errorbars({}, lambda f: 0, 100, rng)
    with pytest.raises(ValueError):
        an.bootstrap_errorbars({"s": [0, 0]}, lambda f: 0, 100, rng)


def test_calibration_constants():
    assert an.CALIBRATION["avg_stabilizer"] == 0.48
    assert an.CALIBRATION["encoded_fidelity_one"] == 0.327
    assert an.CALIBRATION["coherence_time_ms"] == 3.6
    assert an.CALIBRATION["loss_per_gate"] == 0.038
