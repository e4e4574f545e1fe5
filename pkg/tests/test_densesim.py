import math

import numpy as np
import pytest
from scipy.linalg import expm

from colorqec import densesim as ds
from colorqec.gates import Gate, GateError, ms_matrix
from colorqec.pauli import parse

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])


def collective(phi, k):
    s = math.cos(phi) * X + math.sin(phi) * Y
    tot = np.zeros((2 ** k, 2 ** k), dtype=complex)
    for j in range(k):
        ops = [np.eye(2)] * k
        ops[j] = s
        m = ops[0]
        for o in ops[1:]:
            m = np.kron(m, o)
        tot += m
    return tot


@pytest.mark.parametrize("k", [1, 2, 3, 4])
@pytest.mark.parametrize("theta,phi", [(math.pi / 2, 0.0), (0.37, 1.1), (-math.pi / 4, math.pi / 2)])
def test_ms_matches_expm(k, theta, phi):
    S = collective(phi, k)
    assert np.allclose(ms_matrix(theta, phi, k), expm(-1j * theta / 4 * S @ S), atol=1e-12)


def test_collective_rotation_matches_expm():
    S = collective(0.3, 3)
    st = ds.prepare_product("010")
    out = ds.apply_unitary(st, "U", [0, 1, 2], (0.8, 0.3))
    want = expm(-1j * 0.4 * S) @ st.data
    assert np.allclose(out.data, want)


def test_u_two_pi_sign():
    st = ds.random_pure(3, np.random.default_rng(0))
    out = ds.apply_unitary(st, "U", [0, 1, 2], (2 * math.pi, 0.0))
    assert np.allclose(out.data, -st.data)
    out = ds.apply_unitary(st, "U", [0, 1], (2 * math.pi, 0.0))
    assert np.allclose(out.data, st.data)
    assert np.allclose(ds.apply_unitary(st, "UZ", [1], (0.0,)).data, st.data)


def test_ms_on_plaquette():
    st = ds.prepare_product("1010101")
    out = ds.apply_unitary(st, "MS", [0, 1, 2, 3], (math.pi / 2, 0.0))
    amps = {i: a for i, a in enumerate(out.data) if abs(a) > 1e-12}
    a, b = ds.basis_index("1010101"), ds.basis_index("0101101")
    assert set(amps) == {a, b}
    assert abs(abs(amps[a]) - 1 / math.sqrt(2)) < 1e-12
    assert abs(abs(amps[b]) - 1 / math.sqrt(2)) < 1e-12
    rel = amps[b] / amps[a]
    assert abs(abs(rel.imag) - 1) < 1e-12  # relative phase +-i


def test_unitary_inverse_roundtrip(rng):
    st = ds.random_pure(4, rng)
    g = Gate("MS", (0, 2, 3), (0.7, 0.2))
    back = Gate("MS", (0, 2, 3), (-0.7, 0.2))
    assert np.allclose(ds.apply_gate(ds.apply_gate(st, g), back).data, st.data, atol=1e-12)
    rho = ds.random_mixed(3, rng)
    h = Gate("U", (0, 1), (1.3, 0.4))
    hb = Gate("U", (0, 1), (-1.3, 0.4))
    assert np.allclose(ds.apply_gate(ds.apply_gate(rho, h), hb).data, rho.data, atol=1e-12)


def test_bad_unitary_and_targets():
    st = ds.prepare_product("00")
    with pytest.raises(GateError):
        ds.apply_unitary(st, np.array([[1, 1], [0, 1]]), [0])
    with pytest.raises((ds.SimulationError, GateError)):
        ds.apply_unitary(st, "H", [2])
    with pytest.raises((ds.SimulationError, GateError)):
        ds.apply_unitary(st, "CNOT", [1, 1])


def test_prepare_and_norm():
    st = ds.prepare_product("1010101")
    assert st.n == 7 and abs(np.linalg.norm(st.data) - 1) < 1e-12
    assert st.data[ds.basis_index("1010101")] == 1
    assert ds.prepare_product("0000000").data[0] == 1


@pytest.mark.parametrize("ch", [ds.depolarizing(0.3), ds.bit_flip(0.2), ds.phase_flip(0.7)])
def test_kraus_completeness(ch):
    assert ds.kraus_completeness(ds.single_qubit_kraus(ch)) < 1e-12


def test_channels_preserve_trace_and_hermiticity(rng):
    for _ in range(10):
        rho = ds.random_mixed(3, rng)
        for ch in (ds.depolarizing(0.4), ds.bit_flip(0.1), ds.collective_dephasing(0.8)):
            out = ds.apply_channel(rho, ch, [0, 2])
            out.check()
            assert abs(np.trace(out.data) - 1) < 1e-12
            assert np.allclose(out.data, out.data.conj().T)


def test_depolarizing_limits(rng):
    rho = ds.random_mixed(2, rng)
    assert np.allclose(ds.apply_channel(rho, ds.depolarizing(0.0)).data, rho.data)
    out = ds.apply_channel(rho, ds.depolarizing(1.0), [1])
    red = ds.partial_trace(out, [1])
    assert np.allclose(red.data, np.eye(2) / 2)
    with pytest.raises(ds.SimulationError):
        ds.depolarizing(1.5)


def test_dephasing_analytic_factor():
    sigma = 0.9
    n = 3
    psi = ds.from_amplitudes({"000": 1, "011": 1, "111": 1}, n)
    out = ds.apply_channel(psi, ds.collective_dephasing(sigma))
    m = {"000": 3, "011": -1, "111": -3}
    for a in m:
        for b in m:
            want = psi.density()[ds.basis_index(a), ds.basis_index(b)] * math.exp(
                -sigma ** 2 * (m[a] - m[b]) ** 2 / 8)
            assert abs(out.data[ds.basis_index(a), ds.basis_index(b)] - want) < 1e-12


def test_dephasing_leaves_fixed_excitation_subspace_alone(code3):
    from colorqec.circuits import encoding_circuit, simulate_dense

    # after the first plaquette both components carry four |1>s
    psi = simulate_dense(encoding_circuit(code3, steps=1))
    out = ds.apply_channel(psi, ds.collective_dephasing(1.5))
    assert ds.uhlmann_fidelity(psi, out) > 1 - 1e-12


def test_crosstalk_channel_is_coherent():
    st = ds.prepare_product("000")
    out = ds.apply_channel(st, ds.addressed_crosstalk(0.05, math.pi, 0.0, neighbors=(0, 2)))
    assert out.is_pure
    p_flip = math.sin(0.05 * math.pi / 2) ** 2
    assert abs(abs(out.data[ds.basis_index("100")]) ** 2 - p_flip * (1 - p_flip)) < 1e-12


def test_expectation_examples(code3):
    from colorqec.circuits import ideal_logical_state

    zero = ideal_logical_state("zero", code3)
    one = ideal_logical_state("one", code3)
    assert abs(ds.expectation(zero, code3.logical_z) - 1) < 1e-12
    assert abs(ds.expectation(zero, code3.logical_x)) < 1e-12
    assert abs(ds.expectation(one, parse("ZIIZIIZ")) + 1) < 1e-12
    with pytest.raises(ds.SimulationError):
        ds.expectation(zero, parse("XII"))
    with pytest.raises(ds.SimulationError):
        ds.expectation(zero, parse("+iXIIIIII"))


def test_expectation_linear_and_multiplicative(rng):
    a, b = ds.random_mixed(2, rng), ds.random_mixed(2, rng)
    p = parse("XY")
    mix = ds.DenseState(0.3 * a.data + 0.7 * b.data, 2)
    assert abs(ds.expectation(mix, p) - 0.3 * ds.expectation(a, p) - 0.7 * ds.expectation(b, p)) < 1e-12
    u, v = ds.random_pure(1, rng), ds.random_pure(1, rng)
    uv = ds.DenseState(np.kron(u.data, v.data), 2)
    assert abs(ds.expectation(uv, parse("ZX")) - ds.expectation(u, parse("Z")) * ds.expectation(v, parse("X"))) < 1e-12


def test_partial_trace_examples(code3):
    from colorqec.circuits import ideal_logical_state

    one = ideal_logical_state("one", code3)
    red = ds.partial_trace(one, [1, 4])
    assert np.allclose(red.data, np.eye(4) / 4)
    three = ds.partial_trace(one, [0, 3, 6])
    diag = {format(i, "03b"): round(three.data[i, i].real, 12) for i in range(8)}
    assert {k for k, v in diag.items() if v} == {"111", "001", "010", "100"}
    assert all(abs(v - 0.25) < 1e-12 for v in diag.values() if v)
    assert np.allclose(three.data, np.diag(np.diag(three.data)))
    assert np.allclose(ds.partial_trace(one, range(7)).data, one.density())
    with pytest.raises((ds.SimulationError, ValueError)):
        ds.partial_trace(one, [0, 0])


def test_uhlmann(rng):
    rho = ds.random_mixed(2, rng)
    assert abs(ds.uhlmann_fidelity(rho, rho) - 1) < 1e-9
    assert ds.uhlmann_fidelity(ds.prepare_product("01"), ds.prepare_product("10")) == 0
    mm = ds.maximally_mixed(2)
    assert abs(ds.uhlmann_fidelity(mm, mm) - 1) < 1e-9
    psi = ds.random_pure(2, rng)
    assert abs(ds.uhlmann_fidelity(ds.DenseState(psi.density(), 2), rho)
               - ds.uhlmann_fidelity(psi, rho)) < 1e-9


def test_caps_and_validation():
    with pytest.raises(ds.SimulationError):
        ds.maximally_mixed(11)
    with pytest.raises(ds.SimulationError):
        ds.DenseState(np.array([1.0, 1.0]), 1)


def test_dump_state():
    rows = ds.dump_state(ds.from_amplitudes({"00": 1, "11": 1j}, 2))
    assert [r[0] for r in rows] == [0, 3]
    assert abs(rows[1][2] - 1 / math.sqrt(2)) < 1e-12
