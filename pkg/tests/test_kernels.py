import numpy as np
import pytest

from colorqec import kernels
from colorqec.code import build_triangular_488
from colorqec.pauli import PauliString
from colorqec.qec import random_errors
from colorqec.tableau import encoded_tableau, pack, pack_many

BACKENDS = kernels.backends()


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")
    assert "python" in BACKENDS


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")
@pytest.mark.parametrize("d", [3, 7, 11])
def test_backends_agree(d):
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    code = build_triangular_488(d)
    t = encoded_tableau(code, "plus")
    rng = np.random.default_rng(d)
    errs = random_errors(code.n, 200, 3, rng)
    GX, GZ, GR = pack_many(list(code.generators) + [code.logical_x], t.w)
    EX, EZ, _ = pack_many(errs, t.w)
    a = py.syndrome_batch(t.X.copy(), t.Z.copy(), t.R.copy(), t.n, GX, GZ, GR, EX, EZ)
    b = cy.syndrome_batch(t.X.copy(), t.Z.copy(), t.R.copy(), t.n, GX, GZ, GR, EX, EZ)
    assert np.array_equal(a, b)
    assert np.array_equal(py.peek_batch(t.X, t.Z, t.R, t.n, EX, EZ, np.zeros(len(errs), np.uint8)),
                          cy.peek_batch(t.X, t.Z, t.R, t.n, EX, EZ, np.zeros(len(errs), np.uint8)))
    assert np.array_equal(py.symplectic_matrix(t.X, t.Z, EX, EZ), cy.symplectic_matrix(t.X, t.Z, EX, EZ))
    # random measurements evolve the tableau identically
    bits = rng.integers(2, size=len(errs)).astype(np.uint8)
    t1, t2 = t.copy(), t.copy()
    r1 = py.measure_batch(t1.X, t1.Z, t1.R, t.n, EX, EZ, np.zeros(len(errs), np.uint8), bits)
    r2 = cy.measure_batch(t2.X, t2.Z, t2.R, t.n, EX, EZ, np.zeros(len(errs), np.uint8), bits)
    assert all(np.array_equal(u, v) for u, v in zip(r1, r2))
    assert np.array_equal(t1.X, t2.X) and np.array_equal(t1.R, t2.R)


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")
def test_rowmul_and_rotation_agree():
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    t = encoded_tableau(build_triangular_488(5), "zero")
    p = PauliString.from_support(17, [0, 3, 5], "Y")
    px, pz, pr = pack(p, t.w)
    for be in (py, cy):
        mask = be.anticommute_mask(t.X, t.Z, px, pz)
        assert mask.dtype == bool
    a, b = t.copy(), t.copy()
    mask = py.anticommute_mask(t.X, t.Z, px, pz).astype(np.uint8)
    py.mul_rows_by_pauli(a.X, a.Z, a.R, mask, px, pz, 1)
    cy.mul_rows_by_pauli(b.X, b.Z, b.R, mask, px, pz, 1)
    py.rowmul(a.X, a.Z, a.R, 20, 3)
    cy.rowmul(b.X, b.Z, b.R, 20, 3)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.Z, b.Z) and np.array_equal(a.R, b.R)


def test_pure_python_env_switch():
    import os
    import subprocess
    import sys

    out = subprocess.run([sys.executable, "-c", "import colorqec.kernels as k; print(k.BACKEND)"],
                         env={**os.environ, "COLORQEC_PURE_PYTHON": "1"}, capture_output=True, text=True)
    assert out.stdout.strip() == "python"
