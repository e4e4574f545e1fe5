"""Stabilizer tableau simulation (destabilizer/stabilizer rows, bit-packed).

The default state is |1...1> (all ions optically pumped to the S-level), with
stabilizers -Z_1 ... -Z_n.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .gates import Gate
from .pauli import WORD_BITS, PauliError, PauliString

_M64 = (1 << WORD_BITS) - 1


class TableauError(ValueError):
    pass


def n_words(n: int) -> int:
    return (n + WORD_BITS - 1) // WORD_BITS


def pack(p: PauliString, w: int):
    xs, zs = p.to_words(w)
    return np.array(xs, dtype=np.uint64), np.array(zs, dtype=np.uint64), p.phase


def pack_many(ps: Sequence[PauliString], w: int):
    m = len(ps)
    PX = np.zeros((m, w), dtype=np.uint64)
    PZ = np.zeros((m, w), dtype=np.uint64)
    PR = np.zeros(m, dtype=np.uint8)
    for i, p in enumerate(ps):
        xs, zs = p.to_words(w)
        PX[i] = xs
        PZ[i] = zs
        PR[i] = p.phase
    return PX, PZ, PR


def _unpack(x_words, z_words, phase, n) -> PauliString:
    x = z = 0
    for k in range(len(x_words)):
        x |= int(x_words[k]) << (WORD_BITS * k)
        z |= int(z_words[k]) << (WORD_BITS * k)
    return PauliString(n, x, z, int(phase))


def _quarter_turns(angle: float) -> int:
    k = angle / (math.pi / 2)
    r = round(k)
    if abs(k - r) > 1e-9:
        raise TableauError(f"angle {angle} is not a multiple of pi/2")
    return r % 4


class StabilizerTableau:
    def __init__(self, n: int):
        if n < 1:
            raise TableauError("need at least one qubit")
        self.n = n
        self.w = n_words(n)
        self.X = np.zeros((2 * n, self.w), dtype=np.uint64)
        self.Z = np.zeros((2 * n, self.w), dtype=np.uint64)
        self.R = np.zeros(2 * n, dtype=np.uint8)

    def copy(self) -> "StabilizerTableau":
        t = StabilizerTableau.__new__(StabilizerTableau)
        t.n, t.w = self.n, self.w
        t.X, t.Z, t.R = self.X.copy(), self.Z.copy(), self.R.copy()
        return t

    # ------------------------------------------------------------ helpers
    def _bit(self, q: int):
        if not 0 <= q < self.n:
            raise TableauError(f"qubit {q} out of range")
        return q // WORD_BITS, np.uint64(1 << (q % WORD_BITS))

    def _cols(self, q: int):
        k, m = self._bit(q)
        return k, m, (self.X[:, k] & m) != 0, (self.Z[:, k] & m) != 0

    def _flip(self, mask):
        self.R[mask] ^= 2

    def row(self, i: int) -> PauliString:
        return _unpack(self.X[i], self.Z[i], self.R[i], self.n)

    def stabilizers(self) -> list:
        return [self.row(self.n + i) for i in range(self.n)]

    def destabilizers(self) -> list:
        return [self.row(i) for i in range(self.n)]

    # ------------------------------------------------------------ gates
    def h(self, q: int):
        k, m, x, z = self._cols(q)
        self._flip(x & z)
        swap = x != z
        self.X[swap, k] ^= m
        self.Z[swap, k] ^= m

    def s(self, q: int):
        """Phase gate K = diag(1, i)."""
        k, m, x, z = self._cols(q)
        self._flip(x & z)
        self.Z[x, k] ^= m

    def sdg(self, q: int):
        k, m, x, z = self._cols(q)
        self._flip(x & ~z)
        self.Z[x, k] ^= m

    def x(self, q: int):
        _, _, x, z = self._cols(q)
        self._flip(z)

    def z(self, q: int):
        _, _, x, z = self._cols(q)
        self._flip(x)

    def y(self, q: int):
        _, _, x, z = self._cols(q)
        self._flip(x ^ z)

    def cnot(self, c: int, t: int):
        if c == t:
            raise TableauError("control equals target")
        kc, mc, xc, zc = self._cols(c)
        kt, mt, xt, zt = self._cols(t)
        self._flip(xc & zt & ~(xt ^ zc))
        self.X[xc, kt] ^= mt
        self.Z[zt, kc] ^= mc

    def apply_pauli(self, p: PauliString):
        self._check(p)
        px, pz, _ = pack(p, self.w)
        self._flip(kernels.anticommute_mask(self.X, self.Z, px, pz))

    def rotate(self, p: PauliString, angle: float):
        """Conjugate by exp(-i angle/2 P) for angle a multiple of pi/2."""
        self._check(p)
        if p.phase % 2:
            raise TableauError("rotation axis must be Hermitian")
        k = _quarter_turns(angle)
        if k == 0:
            return
        px, pz, pr = pack(p, self.w)
        anti = kernels.anticommute_mask(self.X, self.Z, px, pz)
        if k == 2:
            self._flip(anti)
            return
        # row -> row * exp(i angle P) = (+-i) row P on anticommuting rows
        extra = (1 if k == 1 else 3) + pr
        kernels.mul_rows_by_pauli(self.X, self.Z, self.R, anti.astype(np.uint8), px, pz, extra % 4)

    def apply_gate(self, gate: Gate):
        name, tg = gate.name, gate.targets
        simple = {"H": self.h, "K": self.s, "KDG": self.sdg, "X": self.x, "Y": self.y, "Z": self.z}
        if name in simple:
            for q in tg:
                simple[name](q)
        elif name == "CNOT":
            self.cnot(*tg)
        elif name == "UZ":
            for q in tg:
                self.rotate(PauliString.single(self.n, q, "Z"), gate.params[0])
        elif name in ("U", "R"):
            theta, phi = gate.params
            for q in tg:
                axis = self._sigma(q, phi)
                self.rotate(axis, theta)
        elif name == "MS":
            theta, phi = gate.params
            _quarter_turns(theta)
            for a in range(len(tg)):
                for b in range(a + 1, len(tg)):
                    pair = self._sigma(tg[a], phi).unsigned() * self._sigma(tg[b], phi).unsigned()
                    self.rotate(pair, theta)
        else:
            raise TableauError(f"gate {name} is not supported by the tableau simulator")

    def _sigma(self, q: int, phi: float) -> PauliString:
        j = _quarter_turns(phi)
        base = PauliString.single(self.n, q, "X" if j % 2 == 0 else "Y")
        return base if j < 2 else -base

    def apply_clifford(self, gate: str, targets: Iterable[int]):
        self.apply_gate(Gate(gate, tuple(targets)))

    # ------------------------------------------------------------ measurement
    def _check(self, p: PauliString):
        if p.n != self.n:
            raise PauliError(f"size mismatch: operator on {p.n}, tableau on {self.n}")

    def peek(self, p: PauliString) -> int:
        """Expectation of a Hermitian Pauli: +1, -1 or 0."""
        self._check(p)
        px, pz, pr = pack(p, self.w)
        return int(kernels.peek(self.X, self.Z, self.R, self.n, px, pz, pr))

    def peek_many(self, ps: Sequence[PauliString]) -> np.ndarray:
        PX, PZ, PR = pack_many(ps, self.w)
        return kernels.peek_batch(self.X, self.Z, self.R, self.n, PX, PZ, PR)

    def measure(self, p: PauliString, rng: np.random.Generator | None = None,
                forced: int | None = None):
        """Measure ``p``; returns (outcome +-1, deterministic).

        ``forced`` (+1/-1) fixes the outcome when it is random, which
        postselects onto that eigenspace.
        """
        self._check(p)
        if p.phase % 2:
            raise TableauError("can only measure Hermitian Paulis")
        if forced is not None:
            bit = 0 if forced == 1 else 1
        elif rng is not None:
            bit = int(rng.integers(2))
        else:
            bit = -1
        px, pz, pr = pack(p, self.w)
        if bit < 0:
            val = self.peek(p)
            if val == 0:
                raise TableauError("random outcome needs an rng or a forced value")
            return val, True
        b, det = kernels.measure(self.X, self.Z, self.R, self.n, px, pz, pr, bit)
        return (1 if b == 0 else -1), bool(det)

    def measure_many(self, ps: Sequence[PauliString], rng: np.random.Generator):
        PX, PZ, PR = pack_many(ps, self.w)
        bits = rng.integers(2, size=len(ps)).astype(np.uint8)
        b, det = kernels.measure_batch(self.X, self.Z, self.R, self.n, PX, PZ, PR, bits)
        return 1 - 2 * b.astype(np.int8), det.astype(bool)

    # ------------------------------------------------------------ checks
    def check_invariants(self):
        n = self.n
        S = kernels.symplectic_matrix(self.X, self.Z, self.X, self.Z)
        want = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        want[np.arange(n), n + np.arange(n)] = 1
        want[n + np.arange(n), np.arange(n)] = 1
        # destabilizers may anticommute with each other
        S[:n, :n] = 0
        if not np.array_equal(S, want):
            raise TableauError("tableau commutation structure broken")
        if np.any(self.R[n:] % 2):
            raise TableauError("stabilizer row with imaginary phase")


def new_tableau(n: int) -> StabilizerTableau:
    """|1...1>: destabilizers X_i, stabilizers -Z_i."""
    t = StabilizerTableau(n)
    for q in range(n):
        k, m = q // WORD_BITS, np.uint64(1 << (q % WORD_BITS))
        t.X[q, k] = m
        t.Z[n + q, k] = m
        t.R[n + q] = 2
    return t


def basis_tableau(bits: str) -> StabilizerTableau:
    n = len(bits)
    t = new_tableau(n)
    for q, b in enumerate(bits):
        if b == "0":
            t.x(q)
    return t


def encoded_tableau(code, logical: str = "zero") -> StabilizerTableau:
    """Ideal logical |0>, |1>, |+> or |-> by projecting a product state."""
    n = code.n
    t = basis_tableau("0" * n)
    if logical in ("plus", "minus"):
        for q in range(n):
            t.h(q)
        gens = code.stabilizers_z
    elif logical in ("zero", "one"):
        gens = code.stabilizers_x
    else:
        raise TableauError(f"unsupported logical state {logical!r}")
    for g in gens:
        t.measure(g, forced=1)
    if logical == "one":
        t.apply_pauli(code.logical_x)
    elif logical == "minus":
        t.apply_pauli(code.logical_z)
    return t


def run_circuit(t: StabilizerTableau, gates: Iterable[Gate]) -> StabilizerTableau:
    for g in gates:
        t.apply_gate(g)
    return t
