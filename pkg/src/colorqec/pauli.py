"""N-qubit Pauli operators in symplectic (x, z) form.

An operator is stored as ``i**phase * P_1 (x) P_2 (x) ... (x) P_n`` where each
``P_q`` is one of I, X, Y, Z (Y is the Hermitian Pauli matrix, not XZ).
Bit ``q`` of ``x``/``z`` (0-based) describes qubit ``q``; text uses 1-based
qubit labels with qubit 1 leftmost.

Phase convention: X*Z = -iY.
"""
from __future__ import annotations

from typing import Iterable, Sequence

WORD_BITS = 64
_SIGNS = {"": 0, "+": 0, "+i": 1, "i": 1, "-": 2, "-i": 3}
_SIGN_TEXT = {0: "+", 1: "+i", 2: "-", 3: "-i"}


class PauliError(ValueError):
    pass


def popcount(v: int) -> int:
    return v.bit_count()


def product_phase(ax: int, az: int, bx: int, bz: int) -> int:
    """Exponent k (mod 4) such that P_a * P_b = i**k * P_{a^b} site-wise."""
    a_x = ax & ~az
    a_y = ax & az
    a_z = az & ~ax
    b_x = bx & ~bz
    b_y = bx & bz
    b_z = bz & ~bx
    plus = (a_x & b_y) | (a_y & b_z) | (a_z & b_x)
    minus = (a_y & b_x) | (a_z & b_y) | (a_x & b_z)
    return (popcount(plus) - popcount(minus)) % 4


class PauliString:
    """Immutable Pauli operator with a phase in {+1, +i, -1, -i}."""

    __slots__ = ("n", "x", "z", "phase")

    def __init__(self, n: int, x: int = 0, z: int = 0, phase: int = 0):
        if n < 1:
            raise PauliError("need at least one qubit")
        full = (1 << n) - 1
        if x & ~full or z & ~full:
            raise PauliError("bits outside register")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "phase", phase % 4)

    def __setattr__(self, key, value):
        raise AttributeError("PauliString is immutable")

    def __reduce__(self):
        return (PauliString, (self.n, self.x, self.z, self.phase))

    # -- constructors ----------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n)

    @classmethod
    def from_support(cls, n: int, qubits: Iterable[int], kind: str) -> "PauliString":
        """Same single-qubit Pauli ``kind`` on each 0-based qubit in ``qubits``."""
        mask = 0
        for q in qubits:
            if not 0 <= q < n:
                raise PauliError(f"qubit {q} out of range")
            mask |= 1 << q
        kind = kind.upper()
        if kind == "X":
            return cls(n, mask, 0)
        if kind == "Z":
            return cls(n, 0, mask)
        if kind == "Y":
            return cls(n, mask, mask)
        raise PauliError(f"bad Pauli kind {kind!r}")

    @classmethod
    def single(cls, n: int, q: int, kind: str) -> "PauliString":
        return cls.from_support(n, [q], kind)

    @classmethod
    def from_sparse(cls, n: int, label: str) -> "PauliString":
        """Parse labels like ``"Z2Z5"`` or ``"Y3"`` (1-based qubits)."""
        import re

        if label in ("", "I", "trivial"):
            return cls(n)
        parts = re.findall(r"([IXYZ])(\d+)", label)
        if "".join(a + b for a, b in parts) != label:
            raise PauliError(f"bad sparse label {label!r}")
        p = cls(n)
        for kind, q in parts:
            if kind != "I":
                p = p * cls.single(n, int(q) - 1, kind)
        return p

    # -- views -----------------------------------------------------------
    @property
    def x_bits(self) -> list[int]:
        return [(self.x >> q) & 1 for q in range(self.n)]

    @property
    def z_bits(self) -> list[int]:
        return [(self.z >> q) & 1 for q in range(self.n)]

    def letter(self, q: int) -> str:
        return "IXZY"[((self.x >> q) & 1) | (((self.z >> q) & 1) << 1)]

    def letters(self) -> str:
        return "".join(self.letter(q) for q in range(self.n))

    @property
    def support(self) -> list[int]:
        v = self.x | self.z
        return [q for q in range(self.n) if (v >> q) & 1]

    def weight(self) -> int:
        return popcount(self.x | self.z)

    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    @property
    def sign(self) -> int:
        if self.phase % 2:
            raise PauliError("operator is not Hermitian")
        return 1 if self.phase == 0 else -1

    def unsigned(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, 0)

    def to_words(self, n_words: int | None = None):
        """Split x and z into little-endian ``WORD_BITS`` words."""
        if n_words is None:
            n_words = (self.n + WORD_BITS - 1) // WORD_BITS
        m = (1 << WORD_BITS) - 1
        xs = [(self.x >> (WORD_BITS * k)) & m for k in range(n_words)]
        zs = [(self.z >> (WORD_BITS * k)) & m for k in range(n_words)]
        return xs, zs

    def sparse_label(self) -> str:
        if self.weight() == 0:
            return "I"
        return "".join(f"{self.letter(q)}{q + 1}" for q in self.support)

    # -- algebra ---------------------------------------------------------
    def _check(self, other: "PauliString"):
        if not isinstance(other, PauliString):
            raise TypeError("expected PauliString")
        if other.n != self.n:
            raise PauliError(f"size mismatch: {self.n} vs {other.n}")

    def __mul__(self, other):
        if isinstance(other, complex) or isinstance(other, int):
            units = {1: 0, 1j: 1, -1: 2, -1j: 3}
            if other not in units:
                raise PauliError("can only scale by a unit")
            return PauliString(self.n, self.x, self.z, self.phase + units[other])
        self._check(other)
        k = product_phase(self.x, self.z, other.x, other.z)
        return PauliString(self.n, self.x ^ other.x, self.z ^ other.z,
                           self.phase + other.phase + k)

    __rmul__ = __mul__

    def __neg__(self):
        return PauliString(self.n, self.x, self.z, self.phase + 2)

    def dagger(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, -self.phase)

    def symplectic(self, other: "PauliString") -> int:
        self._check(other)
        return popcount((self.x & other.z) ^ (self.z & other.x)) & 1

    def commutes(self, other: "PauliString") -> bool:
        return self.symplectic(other) == 0

    def __eq__(self, other):
        if not isinstance(other, PauliString):
            return NotImplemented
        return (self.n, self.x, self.z, self.phase) == (other.n, other.x, other.z, other.phase)

    def __hash__(self):
        return hash((self.n, self.x, self.z, self.phase))

    def __str__(self):
        return _SIGN_TEXT[self.phase] + self.letters()

    def __repr__(self):
        return f"PauliString('{self}')"

    def to_matrix(self):
        import numpy as np

        mats = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]),
                "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1])}
        out = np.array([[1j ** self.phase]], dtype=complex)
        for q in range(self.n):
            out = np.kron(out, mats[self.letter(q)])
        return out


def parse(text: str, n: int | None = None) -> PauliString:
    """Parse ``[+|-|+i|-i]`` followed by letters IXYZ (qubit 1 first)."""
    s = text.strip()
    sign = ""
    for pre in ("+i", "-i", "+", "-"):
        if s.startswith(pre) and len(s) > len(pre):
            sign = pre
            break
    body = s[len(sign):]
    if not body:
        raise PauliError("empty Pauli string")
    bad = set(body) - set("IXYZ")
    if bad:
        raise PauliError(f"invalid character(s) {''.join(sorted(bad))!r} in {text!r}")
    if n is not None and len(body) != n:
        raise PauliError(f"length {len(body)} does not match register size {n}")
    x = z = 0
    for q, c in enumerate(body):
        if c in "XY":
            x |= 1 << q
        if c in "ZY":
            z |= 1 << q
    return PauliString(len(body), x, z, _SIGNS[sign])


def format_pauli(p: PauliString) -> str:
    return str(p)


def commutes(a: PauliString, b: PauliString) -> bool:
    return a.commutes(b)


def multiply(a: PauliString, b: PauliString) -> PauliString:
    return a * b


def weight(p: PauliString) -> int:
    return p.weight()


def product(ps: Sequence[PauliString], n: int | None = None) -> PauliString:
    if not ps:
        if n is None:
            raise PauliError("empty product needs n")
        return PauliString(n)
    out = ps[0]
    for p in ps[1:]:
        out = out * p
    return out
