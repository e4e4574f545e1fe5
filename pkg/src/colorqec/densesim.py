"""Exact state-vector and density-matrix simulation for small registers.

Basis convention: qubit 1 (index 0) is the most significant bit of the basis
index; |0> is the D-level and |1> the S-level of the ion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .gates import Gate, GateError, full_matrix, single_qubit_matrix
from .gates import I2, X, Y, Z
from .pauli import PauliString

MAX_PURE_QUBITS = 14
MAX_MIXED_QUBITS = 10
TOL = 1e-9
DEPHASING_NODES = 64


class SimulationError(ValueError):
    pass


class DenseState:
    """Pure state (vector) or density matrix on ``n`` qubits."""

    def __init__(self, data: np.ndarray, n: int | None = None, cap: int | None = None,
                 check: bool = True):
        data = np.asarray(data, dtype=complex)
        dim = data.shape[0]
        if n is None:
            n = int(round(math.log2(dim)))
        if 2 ** n != dim:
            raise SimulationError("dimension is not a power of two")
        pure = data.ndim == 1
        limit = cap if cap is not None else (MAX_PURE_QUBITS if pure else MAX_MIXED_QUBITS)
        if n > limit:
            raise SimulationError(f"{n} qubits exceeds the dense cap of {limit}")
        self.n = n
        self.data = data
        self.cap = cap
        if check:
            self.check()

    @property
    def is_pure(self) -> bool:
        return self.data.ndim == 1

    def check(self, tol: float = TOL):
        if self.is_pure:
            nrm = np.vdot(self.data, self.data).real
            if abs(nrm - 1) > tol:
                raise SimulationError(f"state norm {nrm} != 1")
        else:
            r = self.data
            if np.abs(r - r.conj().T).max() > tol:
                raise SimulationError("density matrix not Hermitian")
            if abs(np.trace(r).real - 1) > tol:
                raise SimulationError("density matrix trace != 1")
            if np.linalg.eigvalsh(r).min() < -tol:
                raise SimulationError("density matrix not positive semidefinite")

    def copy(self) -> "DenseState":
        return DenseState(self.data.copy(), self.n, self.cap, check=False)

    def density(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return self.data

    def to_mixed(self) -> "DenseState":
        if not self.is_pure:
            return self
        return DenseState(self.density(), self.n, self.cap, check=False)

    def __repr__(self):
        kind = "pure" if self.is_pure else "mixed"
        return f"DenseState(n={self.n}, {kind})"


# ---------------------------------------------------------------- states

def prepare_product(bits: str | Sequence[int], cap: int | None = None) -> DenseState:
    if isinstance(bits, str):
        if set(bits) - {"0", "1"} or not bits:
            raise SimulationError(f"bad bit pattern {bits!r}")
        vals = [int(b) for b in bits]
    else:
        vals = [int(b) for b in bits]
        if any(b not in (0, 1) for b in vals):
            raise SimulationError("bits must be 0/1")
    n = len(vals)
    v = np.zeros(2 ** n, dtype=complex)
    v[int("".join(map(str, vals)), 2)] = 1.0
    return DenseState(v, n, cap)


def basis_index(bits: str) -> int:
    return int(bits, 2)


def from_amplitudes(amps: dict, n: int) -> DenseState:
    """Normalized superposition of bit-string keys."""
    v = np.zeros(2 ** n, dtype=complex)
    for k, a in amps.items():
        v[basis_index(k)] += a
    v /= np.linalg.norm(v)
    return DenseState(v, n)


def maximally_mixed(n: int) -> DenseState:
    return DenseState(np.eye(2 ** n, dtype=complex) / 2 ** n, n)


def random_pure(n: int, rng: np.random.Generator) -> DenseState:
    v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return DenseState(v / np.linalg.norm(v), n)


def random_mixed(n: int, rng: np.random.Generator, rank: int | None = None) -> DenseState:
    dim = 2 ** n
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    r = g @ g.conj().T
    r /= np.trace(r).real
    return DenseState((r + r.conj().T) / 2, n)


# ------------------------------------------------------------- unitaries

def _check_targets(n: int, targets: Sequence[int]):
    if not targets or len(set(targets)) != len(targets):
        raise SimulationError(f"bad targets {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise SimulationError(f"target {t} out of range for {n} qubits")


def _apply_left(data: np.ndarray, n: int, mat: np.ndarray, targets: Sequence[int], offset: int = 0):
    """Apply ``mat`` to tensor axes ``offset + targets`` of ``data``."""
    k = len(targets)
    axes = [offset + t for t in targets]
    t = np.tensordot(mat.reshape((2,) * (2 * k)), data, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(t, list(range(k)), axes)


def apply_matrix(state: DenseState, mat: np.ndarray, targets: Sequence[int]) -> DenseState:
    n = state.n
    _check_targets(n, targets)
    mat = np.asarray(mat, dtype=complex)
    if state.is_pure:
        t = _apply_left(state.data.reshape((2,) * n), n, mat, targets)
        return DenseState(t.reshape(-1), n, state.cap, check=False)
    t = state.data.reshape((2,) * (2 * n))
    t = _apply_left(t, n, mat, targets)
    t = _apply_left(t, n, mat.conj(), targets, offset=n)
    dim = 2 ** n
    return DenseState(t.reshape(dim, dim), n, state.cap, check=False)


def apply_gate(state: DenseState, gate: Gate) -> DenseState:
    single = single_qubit_matrix(gate)
    if single is not None:
        for t in gate.targets:
            state = apply_matrix(state, single, [t])
        return state
    return apply_matrix(state, full_matrix(gate), gate.targets)


def apply_unitary(state: DenseState, gate, targets: Sequence[int] | None = None,
                  params: Sequence[float] = ()) -> DenseState:
    """Apply a :class:`Gate`, a gate name, or an explicit unitary matrix."""
    if isinstance(gate, Gate):
        _check_targets(state.n, gate.targets)
        return apply_gate(state, gate)
    if targets is None:
        raise SimulationError("targets required")
    _check_targets(state.n, targets)
    if isinstance(gate, str):
        return apply_gate(state, Gate(gate, tuple(targets), tuple(params)))
    mat = np.asarray(gate, dtype=complex)
    if mat.shape != (2 ** len(targets),) * 2:
        raise GateError("matrix shape does not match targets")
    if np.abs(mat @ mat.conj().T - np.eye(mat.shape[0])).max() > TOL:
        raise GateError("matrix is not unitary")
    return apply_matrix(state, mat, targets)


# -------------------------------------------------------------- channels

@dataclass(frozen=True)
class NoiseChannel:
    """Noise process.  ``kind`` is one of depolarizing, bit_flip, phase_flip
    (parameter ``p``), collective_dephasing (angle spread ``sigma``) or
    addressed_crosstalk (``eps`` times a pulse ``theta``/``phi`` leaking onto
    ``neighbors``)."""

    kind: str
    p: float = 0.0
    sigma: float = 0.0
    eps: float = 0.0
    theta: float = 0.0
    phi: float = 0.0
    neighbors: tuple = ()

    def __post_init__(self):
        if self.kind not in ("depolarizing", "bit_flip", "phase_flip",
                             "collective_dephasing", "addressed_crosstalk"):
            raise SimulationError(f"unknown channel {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise SimulationError(f"probability {self.p} outside [0, 1]")
        if self.sigma < 0:
            raise SimulationError("dephasing spread must be non-negative")


def depolarizing(p: float) -> NoiseChannel:
    return NoiseChannel("depolarizing", p=p)


def bit_flip(p: float) -> NoiseChannel:
    return NoiseChannel("bit_flip", p=p)


def phase_flip(p: float) -> NoiseChannel:
    return NoiseChannel("phase_flip", p=p)


def collective_dephasing(sigma: float) -> NoiseChannel:
    return NoiseChannel("collective_dephasing", sigma=sigma)


def addressed_crosstalk(eps: float, theta: float, phi: float, neighbors=()) -> NoiseChannel:
    return NoiseChannel("addressed_crosstalk", eps=eps, theta=theta, phi=phi,
                        neighbors=tuple(neighbors))


def single_qubit_kraus(ch: NoiseChannel) -> list:
    p = ch.p
    if ch.kind == "depolarizing":
        # rho -> (1 - p) rho + p I/2
        return [math.sqrt(1 - 0.75 * p) * I2] + [math.sqrt(p / 4) * P for P in (X, Y, Z)]
    if ch.kind == "bit_flip":
        return [math.sqrt(1 - p) * I2, math.sqrt(p) * X]
    if ch.kind == "phase_flip":
        return [math.sqrt(1 - p) * I2, math.sqrt(p) * Z]
    raise SimulationError(f"{ch.kind} is not a single-qubit Kraus channel")


def dephasing_nodes(sigma: float, n_nodes: int = DEPHASING_NODES):
    """Gauss-Hermite nodes/weights for a N(0, sigma^2) rotation angle."""
    x, w = np.polynomial.hermite.hermgauss(n_nodes)
    return math.sqrt(2) * sigma * x, w / math.sqrt(math.pi)


def _zsum(n: int, targets: Sequence[int]) -> np.ndarray:
    idx = np.arange(2 ** n)
    m = np.zeros(2 ** n)
    for t in targets:
        m += 1 - 2 * ((idx >> (n - 1 - t)) & 1)
    return m


def apply_channel(state: DenseState, ch: NoiseChannel, targets: Sequence[int] | None = None) -> DenseState:
    # coherent crosstalk keeps pure states pure
    rho = state if ch.kind == "addressed_crosstalk" else state.to_mixed()
    n = state.n
    if targets is None:
        targets = list(range(n))
    _check_targets(n, targets)
    if ch.kind == "addressed_crosstalk":
        from .gates import rotation

        u = rotation(ch.eps * ch.theta, ch.phi)
        hit = ch.neighbors or targets
        for t in hit:
            rho = apply_matrix(rho, u, [t])
        return rho
    if ch.kind == "collective_dephasing":
        if ch.sigma == 0:
            return rho
        # rho_ab -> rho_ab * E[exp(-i phi (m_a - m_b) / 2)]
        m = _zsum(n, targets)
        diff = m[:, None] - m[None, :]
        nodes, weights = dephasing_nodes(ch.sigma)
        factor = np.zeros(diff.shape, dtype=complex)
        for phi, w in zip(nodes, weights):
            factor += w * np.exp(-0.5j * phi * diff)
        return DenseState(rho.data * factor, n, state.cap, check=False)
    kraus = single_qubit_kraus(ch)
    data = rho.data
    for t in targets:
        acc = np.zeros_like(data)
        for k in kraus:
            acc += apply_matrix(DenseState(data, n, state.cap, check=False), k, [t]).data
        data = acc
    return DenseState(data, n, state.cap, check=False)


def kraus_completeness(ops: Iterable[np.ndarray]) -> float:
    ops = list(ops)
    s = sum(k.conj().T @ k for k in ops)
    return float(np.abs(s - np.eye(s.shape[0])).max())


# ---------------------------------------------------------- observables

def pauli_masks(p: PauliString):
    """(x mask, z mask) in basis-index bit order (qubit 1 = MSB)."""
    n = p.n
    xm = zm = 0
    for q in range(n):
        bit = 1 << (n - 1 - q)
        if (p.x >> q) & 1:
            xm |= bit
        if (p.z >> q) & 1:
            zm |= bit
    return xm, zm


def _pauli_action(p: PauliString, n: int):
    xm, zm = pauli_masks(p)
    idx = np.arange(2 ** n, dtype=np.int64)
    n_y = (p.x & p.z).bit_count()
    par = np.bitwise_count(idx & zm) & 1
    coeff = (1j ** ((p.phase + n_y) % 4)) * (1 - 2 * par.astype(float))
    return idx, idx ^ xm, coeff


def apply_pauli(state: DenseState, p: PauliString) -> DenseState:
    if p.n != state.n:
        raise SimulationError("size mismatch")
    idx, flipped, coeff = _pauli_action(p, state.n)
    if state.is_pure:
        out = np.zeros_like(state.data)
        out[flipped] = coeff * state.data
        return DenseState(out, state.n, state.cap, check=False)
    mat = np.zeros_like(state.data)
    mat[flipped, :] = coeff[:, None] * state.data
    out = np.zeros_like(mat)
    out[:, flipped] = mat * coeff.conj()[None, :]
    return DenseState(out, state.n, state.cap, check=False)


def expectation_complex(state: DenseState, p: PauliString) -> complex:
    if p.n != state.n:
        raise SimulationError(f"size mismatch: operator on {p.n}, state on {state.n}")
    idx, flipped, coeff = _pauli_action(p, state.n)
    if state.is_pure:
        v = state.data
        return complex(np.sum(np.conj(v[flipped]) * coeff * v))
    return complex(np.sum(coeff * state.data[idx, flipped]))


def expectation(state: DenseState, p: PauliString) -> float:
    val = expectation_complex(state, p)
    if p.is_hermitian() and abs(val.imag) > TOL:
        raise SimulationError(f"non-real expectation {val} for Hermitian operator")
    if not p.is_hermitian():
        raise SimulationError("expectation requested for non-Hermitian operator")
    return float(val.real)


def partial_trace(state: DenseState, keep: Sequence[int]) -> DenseState:
    n = state.n
    keep = list(keep)
    _check_targets(n, keep)
    rest = [q for q in range(n) if q not in keep]
    k = len(keep)
    if state.is_pure:
        a = np.transpose(state.data.reshape((2,) * n), keep + rest).reshape(2 ** k, -1)
        red = a @ a.conj().T
    else:
        t = state.data.reshape((2,) * (2 * n))
        t = np.transpose(t, keep + rest + [n + q for q in keep] + [n + q for q in rest])
        t = t.reshape(2 ** k, 2 ** (n - k), 2 ** k, 2 ** (n - k))
        red = np.einsum("ajbj->ab", t)
    return DenseState(red, k, check=False)


def _sqrtm_psd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    # round-off eigenvalues of rank-deficient inputs would be amplified by sqrt
    w = np.where(w > 1e-13 * max(w.max(), 1e-300), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def uhlmann_fidelity(a: DenseState, b: DenseState) -> float:
    if not isinstance(a, DenseState) or not isinstance(b, DenseState):
        raise SimulationError("fidelity needs DenseState inputs")
    if a.n != b.n:
        raise SimulationError("dimension mismatch")
    if a.is_pure and b.is_pure:
        return float(abs(np.vdot(a.data, b.data)) ** 2)
    if a.is_pure:
        return float(np.vdot(a.data, b.density() @ a.data).real)
    if b.is_pure:
        return float(np.vdot(b.data, a.density() @ b.data).real)
    s = _sqrtm_psd(a.data)
    w = np.linalg.eigvalsh(s @ b.data @ s)
    w = np.where(w > 1e-13 * max(w.max(), 1e-300), w, 0.0)
    return float(np.clip(np.sum(np.sqrt(w)) ** 2, 0.0, 1.0))


def overlap_up_to_phase(a: DenseState, b: DenseState) -> float:
    return uhlmann_fidelity(a, b)


def dump_state(state: DenseState, threshold: float = 1e-12) -> list:
    """(index, real, imag) rows for entries above ``threshold``.

    For density matrices the index runs over the row-major flattening.
    """
    flat = state.data.reshape(-1)
    return [(int(i), float(a.real), float(a.imag)) for i, a in enumerate(flat) if abs(a) > threshold]
