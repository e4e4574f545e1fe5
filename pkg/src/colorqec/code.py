"""Triangular 4-8-8 color codes.

The lattice is built on its dual: a tetrakis square tiling whose vertices are
octagon centres (integer points, two colours by parity) and square centres
(half-integer points, third colour).  A qubit is a triangle of the dual, a
plaquette is a dual vertex, and each stabilizer pair acts on the triangles
touching that vertex.  The triangle region is bounded by a zigzag path along
the bottom, one along the left and an alternating staircase hypotenuse; each
dual boundary edge is closed off with a virtual vertex carrying the colour
that is missing on that boundary.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .pauli import PauliError, PauliString, popcount

COLORS = ("red", "green", "blue")
# dual-vertex class -> plaquette colour
_CLASS_COLOR = {"S": "red", "B": "blue", "A": "green"}
EXHAUSTIVE_MAX_N = 17

_H = Fraction(1, 2)

# d=3: canonical triangle key -> Steane label used throughout (0-based)
# 0 corner on red boundary, 1 red/blue edge, 2 centre, 3 red/green edge,
# 4 blue corner, 5 blue/green edge, 6 green corner.
_D3_ORDER = (
    frozenset({"S", "BA", "BB"}),
    frozenset({"S", "B", "BA"}),
    frozenset({"S", "A", "B"}),
    frozenset({"S", "A", "BB"}),
    frozenset({"B", "BA", "BS"}),
    frozenset({"A", "B", "BS"}),
    frozenset({"A", "BB", "BS"}),
)


class CodeError(ValueError):
    pass


@dataclass(frozen=True)
class Plaquette:
    color: str
    qubits: tuple  # 0-based, sorted


@dataclass(frozen=True)
class ColorCode:
    d: int
    n: int
    plaquettes: tuple
    stabilizers_x: tuple
    stabilizers_z: tuple
    logical_x: PauliString
    logical_z: PauliString
    # colour missing on a boundary -> qubits along that boundary
    boundaries: dict = field(default_factory=dict, compare=False)

    @property
    def generators(self) -> list:
        """Generators in syndrome order: all Z-type, then all X-type."""
        return list(self.stabilizers_z) + list(self.stabilizers_x)

    @property
    def n_plaquettes(self) -> int:
        return len(self.plaquettes)

    def generator_names(self) -> list:
        m = self.n_plaquettes
        return [f"Sz{i + 1}" for i in range(m)] + [f"Sx{i + 1}" for i in range(m)]

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "n": self.n,
            "plaquettes": [
                {"color": p.color, "qubits": [q + 1 for q in p.qubits]} for p in self.plaquettes
            ],
            "stabilizers_x": [str(s) for s in self.stabilizers_x],
            "stabilizers_z": [str(s) for s in self.stabilizers_z],
            "logical_x": str(self.logical_x),
            "logical_z": str(self.logical_z),
            "boundaries": {c: [q + 1 for q in qs] for c, qs in self.boundaries.items()},
        }

    def to_text(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


# ---------------------------------------------------------------- geometry

def _vclass(v) -> str:
    if isinstance(v, str):
        return v
    x, y = v
    if x.denominator == 2:
        return "S"
    return "A" if (int(x) + int(y)) % 2 == 0 else "B"


def _inside(pt, poly) -> bool:
    x, y = pt
    inside = False
    m = len(poly)
    for i in range(m):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % m]
        if (y1 > y) != (y2 > y):
            xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xi:
                inside = not inside
    return inside


def _dual_region(d: int):
    """Return the list of triangles (frozensets of dual vertices)."""
    k = (d - 1) // 2
    bottom = [(_H, _H)]
    for i in range(k):
        bottom.append((Fraction(i + 1), Fraction(i % 2)))
        if i < k - 1:
            bottom.append((i + 1 + _H, _H))
    left = [(_H, _H)]
    for i in range(k):
        left.append((Fraction(1 - i % 2), Fraction(i + 1)))
        if i < k - 1:
            left.append((_H, i + 1 + _H))
    b_end, l_end = bottom[-1], left[-1]
    stair = [b_end]
    cur = b_end
    step = "l" if k % 2 == 0 else "u"
    while cur != l_end:
        dx = l_end[0] - cur[0]
        dy = l_end[1] - cur[1]
        if (step == "u" and dy > 0) or dx == 0:
            cur = (cur[0], cur[1] + 1)
        else:
            cur = (cur[0] - 1, cur[1])
        stair.append(cur)
        step = "l" if step == "u" else "u"
    poly = bottom + stair[1:] + left[::-1][1:-1]
    lo = int(min(min(p) for p in poly)) - 1
    hi = int(max(max(p) for p in poly)) + 2
    tris = []
    for x in range(lo, hi):
        for y in range(lo, hi):
            c = (x + _H, y + _H)
            sq = [(Fraction(x), Fraction(y)), (Fraction(x + 1), Fraction(y)),
                  (Fraction(x + 1), Fraction(y + 1)), (Fraction(x), Fraction(y + 1))]
            for a, b in zip(sq, sq[1:] + sq[:1]):
                cen = ((c[0] + a[0] + b[0]) / 3, (c[1] + a[1] + b[1]) / 3)
                if _inside(cen, poly):
                    tris.append(frozenset([c, a, b]))
    for path, miss in ((bottom, "A"), (left, "B"), (stair, "S")):
        for a, b in zip(path, path[1:]):
            tris.append(frozenset([a, b, "B" + miss]))
    tris.append(frozenset([(_H, _H), "BA", "BB"]))
    tris.append(frozenset([b_end, "BA", "BS"]))
    tris.append(frozenset([l_end, "BB", "BS"]))
    return tris


_OUTWARD = {"BA": (0.0, -0.5), "BB": (-0.5, 0.0), "BS": (0.35355, 0.35355)}


def _position(tri):
    real = [(float(v[0]), float(v[1])) for v in tri if not isinstance(v, str)]
    cx = sum(p[0] for p in real) / len(real)
    cy = sum(p[1] for p in real) / len(real)
    for v in tri:
        if isinstance(v, str):
            cx += _OUTWARD[v][0]
            cy += _OUTWARD[v][1]
    return cx, cy


def _order_qubits(d: int, tris):
    if d == 3:
        key = {frozenset(_vclass(v) for v in t): t for t in tris}
        return [key[k] for k in _D3_ORDER]

    # rows parallel to the hypotenuse, starting at the right-angle corner
    def sort_key(t):
        x, y = _position(t)
        return (round(x + y, 6), round(y - x, 6))

    return sorted(tris, key=sort_key)


def build_triangular_488(d: int) -> ColorCode:
    """Build the distance-``d`` triangular 4-8-8 color code (d odd, >= 3)."""
    if not isinstance(d, int) or d < 3 or d % 2 == 0:
        raise CodeError(f"distance must be an odd integer >= 3, got {d!r}")
    tris = _order_qubits(d, _dual_region(d))
    n = len(tris)
    faces: dict = {}
    boundaries: dict = {}
    for q, t in enumerate(tris):
        for v in t:
            if isinstance(v, str):
                boundaries.setdefault(_CLASS_COLOR[v[1]], []).append(q)
            else:
                faces.setdefault(v, []).append(q)
    plaqs = sorted(
        (Plaquette(_CLASS_COLOR[_vclass(v)], tuple(sorted(qs))) for v, qs in faces.items()),
        key=lambda p: p.qubits,
    )
    sx = tuple(PauliString.from_support(n, p.qubits, "X") for p in plaqs)
    sz = tuple(PauliString.from_support(n, p.qubits, "Z") for p in plaqs)
    code = ColorCode(
        d=d, n=n, plaquettes=tuple(plaqs), stabilizers_x=sx, stabilizers_z=sz,
        logical_x=PauliString.from_support(n, range(n), "X"),
        logical_z=PauliString.from_support(n, range(n), "Z"),
        boundaries={c: tuple(sorted(v)) for c, v in sorted(boundaries.items())},
    )
    validate(code)
    return code


# ------------------------------------------------------------------- GF(2)

def _vec(p: PauliString) -> int:
    return p.x | (p.z << p.n)


def gf2_rank(rows: Iterable[int]) -> int:
    basis: dict = {}
    for v in rows:
        while v:
            top = v.bit_length() - 1
            if top in basis:
                v ^= basis[top]
            else:
                basis[top] = v
                break
    return len(basis)


class _Eliminator:
    """Incremental GF(2) basis remembering which generators built each row."""

    def __init__(self, gens):
        self.basis: dict = {}
        for i, g in enumerate(gens):
            v, combo = _vec(g), 1 << i
            while v:
                top = v.bit_length() - 1
                if top in self.basis:
                    bv, bc = self.basis[top]
                    v ^= bv
                    combo ^= bc
                else:
                    self.basis[top] = (v, combo)
                    break

    def decompose(self, p: PauliString):
        v, combo = _vec(p), 0
        while v:
            top = v.bit_length() - 1
            if top not in self.basis:
                return None
            bv, bc = self.basis[top]
            v ^= bv
            combo ^= bc
        return combo


_ELIM_CACHE: dict = {}


def _eliminator(code: ColorCode) -> _Eliminator:
    key = id(code)
    hit = _ELIM_CACHE.get(key)
    if hit is None or hit[0] is not code:
        hit = (code, _Eliminator(code.generators))
        _ELIM_CACHE[key] = hit
    return hit[1]


def stabilizer_decomposition(p: PauliString, code: ColorCode):
    """Indices of generators (syndrome order) whose product equals ``p`` up to
    phase, or None if ``p`` is not in the stabilizer group."""
    combo = _eliminator(code).decompose(p)
    if combo is None:
        return None
    return [i for i in range(2 * code.n_plaquettes) if (combo >> i) & 1]


def in_stabilizer_group(p: PauliString, code: ColorCode, signed: bool = True) -> bool:
    idx = stabilizer_decomposition(p, code)
    if idx is None:
        return False
    if not signed:
        return True
    gens = code.generators
    prod = PauliString(code.n)
    for i in idx:
        prod = prod * gens[i]
    return prod == p


def validate(code: ColorCode) -> None:
    gens = code.generators
    n = code.n
    if n != (code.d ** 2 + 2 * code.d - 1) // 2:
        raise CodeError(f"unexpected qubit count {n} for d={code.d}")
    xs = [_vec(g) for g in code.stabilizers_x]
    zs = [_vec(g) for g in code.stabilizers_z]
    for a, b in itertools.product(code.stabilizers_x, code.stabilizers_z):
        if popcount(a.x & b.z) & 1:
            raise CodeError("generators do not commute")
    if gf2_rank(xs) + gf2_rank(zs) != n - 1:
        raise CodeError("generators do not encode exactly one qubit")
    lx, lz = code.logical_x, code.logical_z
    if lx.commutes(lz):
        raise CodeError("logical X and Z commute")
    for g in gens:
        if not (g.commutes(lx) and g.commutes(lz)):
            raise CodeError("logical operator anticommutes with a generator")
    for p in code.plaquettes:
        if len(p.qubits) % 4:
            raise CodeError("plaquette weight not a multiple of 4")
    # adjacent plaquettes (sharing qubits) must differ in colour
    for a, b in itertools.combinations(code.plaquettes, 2):
        if a.color == b.color and set(a.qubits) & set(b.qubits):
            raise CodeError("adjacent plaquettes share a colour")


# ------------------------------------------------------- groups and logicals

def stabilizer_group(code: ColorCode, max_n: int = EXHAUSTIVE_MAX_N) -> set:
    if code.n > max_n:
        raise CodeError(f"stabilizer group enumeration capped at n <= {max_n}")
    gens = code.generators
    out = {PauliString(code.n)}
    for g in gens:
        out |= {g * s for s in out}
    return out


def logical_y(code: ColorCode) -> PauliString:
    """+i * X_L * Z_L."""
    return (code.logical_x * code.logical_z) * 1j


def _normalizer_check(l: PauliString, code: ColorCode):
    if l.n != code.n:
        raise PauliError("size mismatch")
    for g in code.generators:
        if not g.commutes(l):
            raise CodeError(f"{l} is not in the normalizer of the code")


def _boundary_rank(code: ColorCode, support: frozenset) -> int:
    order = ("blue", "green", "red")
    for i, c in enumerate(order):
        if c in code.boundaries and support <= set(code.boundaries[c]):
            return i
    return len(order)


def reduce_logical(l: PauliString, code: ColorCode,
                   exhaustive_max_n: int = EXHAUSTIVE_MAX_N) -> PauliString:
    """Minimal-weight element of the coset ``l * <stabilizers>``.

    Ties go to representatives lying along a single boundary (the boundary
    missing blue first), then to the lexicographically smallest support.
    Above ``exhaustive_max_n`` qubits a greedy descent is used instead.
    """
    _normalizer_check(l, code)
    gens = code.generators
    if code.n > exhaustive_max_n:
        return _greedy_reduce(l, gens)
    best = None
    best_key = None
    m = len(gens)
    cur = l
    # Gray-code walk over all generator subsets
    for i in range(1 << m):
        if i:
            bit = (i & -i).bit_length() - 1
            cur = cur * gens[bit]
        w = cur.weight()
        if best_key is not None and w > best_key[0]:
            continue
        sup = frozenset(cur.support)
        key = (w, _boundary_rank(code, sup), tuple(sorted(sup)))
        if best_key is None or key < best_key:
            best, best_key = cur, key
    return best


def _greedy_reduce(l: PauliString, gens) -> PauliString:
    cur = l
    improved = True
    while improved:
        improved = False
        for g in gens:
            cand = cur * g
            if cand.weight() < cur.weight():
                cur = cand
                improved = True
    return cur


def code_distance(code: ColorCode, max_weight: int | None = None) -> int:
    """Brute-force distance for small codes (CSS: X and Z sectors agree)."""
    n = code.n
    zs = [g.z for g in code.stabilizers_z]
    elim = _Eliminator(code.stabilizers_x)
    limit = max_weight or n
    for w in range(1, limit + 1):
        for sup in itertools.combinations(range(n), w):
            p = PauliString.from_support(n, sup, "X")
            if any(popcount(p.x & z) & 1 for z in zs):
                continue
            if elim.decompose(p) is None:
                return w
    raise CodeError("distance exceeds search limit")
