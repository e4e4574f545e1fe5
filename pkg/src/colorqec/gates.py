"""Gate specifications shared by the dense and stabilizer simulators."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
K = np.array([[1, 0], [0, 1j]], dtype=complex)
KDG = K.conj().T

FIXED = {"I": I2, "X": X, "Y": Y, "Z": Z, "H": H, "K": K, "KDG": KDG}
# names with rotation parameters: U (collective), R (addressed), MS, UZ
PARAMETRIC = {"U": 2, "R": 2, "MS": 2, "UZ": 1}
KNOWN = set(FIXED) | set(PARAMETRIC) | {"CNOT", "MATRIX"}


class GateError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    """A gate acting on 0-based ``targets``.

    ``U(theta, phi)`` and ``R(theta, phi)`` rotate every target by
    exp(-i theta/2 sigma_phi) with sigma_phi = cos(phi) X + sin(phi) Y; ``R`` marks
    an addressed single-ion pulse.  ``MS(theta, phi)`` is
    exp(-i theta/4 (sum sigma_phi)^2) over the targets, ``UZ(theta)`` is
    exp(-i theta/2 Z) on each target.
    """

    name: str
    targets: tuple
    params: tuple = ()
    matrix: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.name not in KNOWN:
            raise GateError(f"unknown gate {self.name!r}")
        if len(set(self.targets)) != len(self.targets) or not self.targets:
            raise GateError(f"targets must be distinct and nonempty: {self.targets}")
        if self.name in PARAMETRIC and len(self.params) != PARAMETRIC[self.name]:
            raise GateError(f"{self.name} takes {PARAMETRIC[self.name]} parameter(s)")
        if self.name == "R" and len(self.targets) != 1:
            raise GateError("addressed rotation takes exactly one target")
        if self.name == "CNOT" and len(self.targets) != 2:
            raise GateError("CNOT takes (control, target)")
        if self.name == "MATRIX":
            m = np.asarray(self.matrix, dtype=complex)
            k = len(self.targets)
            if k > 3:
                raise GateError("explicit matrices limited to 3 qubits")
            if m.shape != (2 ** k, 2 ** k):
                raise GateError("matrix shape does not match targets")
            if np.abs(m @ m.conj().T - np.eye(2 ** k)).max() > 1e-9:
                raise GateError("matrix is not unitary")
            object.__setattr__(self, "matrix", m)

    def label(self) -> str:
        if self.params:
            return f"{self.name}({','.join(repr(float(p)) for p in self.params)})"
        return self.name

    def shifted(self, mapping) -> "Gate":
        return Gate(self.name, tuple(mapping[t] for t in self.targets), self.params, self.matrix)


def sigma_phi(phi: float) -> np.ndarray:
    return math.cos(phi) * X + math.sin(phi) * Y


def rotation(theta: float, phi: float) -> np.ndarray:
    return math.cos(theta / 2) * I2 - 1j * math.sin(theta / 2) * sigma_phi(phi)


def uz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


@lru_cache(maxsize=256)
def _ms_cached(theta: float, phi: float, k: int) -> np.ndarray:
    # eigenbasis of sigma_phi: column 0 has eigenvalue +1
    v = np.array([[1, 1], [np.exp(1j * phi), -np.exp(1j * phi)]], dtype=complex) / math.sqrt(2)
    vk = np.array([[1]], dtype=complex)
    m = np.zeros(1)
    for _ in range(k):
        vk = np.kron(vk, v)
        m = np.add.outer(m, np.array([1.0, -1.0])).ravel()
    diag = np.exp(-0.25j * theta * m ** 2)
    out = (vk * diag) @ vk.conj().T
    out.setflags(write=False)
    return out


def ms_matrix(theta: float, phi: float, k: int) -> np.ndarray:
    return _ms_cached(float(theta), float(phi), int(k))


def single_qubit_matrix(gate: Gate) -> np.ndarray | None:
    """2x2 matrix applied to every target, or None for multi-qubit gates."""
    if gate.name in FIXED:
        return FIXED[gate.name]
    if gate.name in ("U", "R"):
        return rotation(*gate.params)
    if gate.name == "UZ":
        return uz(gate.params[0])
    return None


def full_matrix(gate: Gate) -> np.ndarray:
    """Matrix on the gate's targets (first target most significant)."""
    k = len(gate.targets)
    single = single_qubit_matrix(gate)
    if single is not None:
        out = np.array([[1]], dtype=complex)
        for _ in range(k):
            out = np.kron(out, single)
        return out
    if gate.name == "MS":
        return ms_matrix(gate.params[0], gate.params[1], k)
    if gate.name == "CNOT":
        return np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    if gate.name == "MATRIX":
        return gate.matrix
    raise GateError(f"no matrix for {gate.name}")
