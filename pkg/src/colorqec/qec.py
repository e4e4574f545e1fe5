"""Error injection, syndromes, lookup decoding and trace-distance classification."""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import densesim as ds
from . import kernels
from .code import ColorCode, in_stabilizer_group, logical_y
from .pauli import PauliString, popcount
from .tableau import StabilizerTableau, encoded_tableau, pack_many

DEFAULT_TABLE_CAP = 2_000_000
MC_REFERENCE_MAGNITUDE = 0.5


class DecodingError(LookupError):
    pass


@dataclass(frozen=True)
class Syndrome:
    """Stabilizer expectations in the order Sz1..Szm, Sx1..Sxm."""

    values: tuple
    logical_z: float | None = None
    logical_x: float | None = None

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if any(abs(v) > 1 + 1e-12 for v in vals):
            raise ValueError("syndrome entries must lie in [-1, 1]")
        object.__setattr__(self, "values", vals)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.values)

    def is_ideal(self) -> bool:
        return all(v in (-1.0, 1.0) for v in self.values)

    def bits(self) -> int:
        """Integer key: bit i set where entry i is -1 (ideal syndromes only)."""
        if not self.is_ideal():
            raise ValueError("bit key needs an ideal syndrome")
        return sum(1 << i for i, v in enumerate(self.values) if v < 0)

    def scaled(self, magnitude: float) -> "Syndrome":
        return Syndrome(tuple(magnitude * v for v in self.values), self.logical_z, self.logical_x)


# ---------------------------------------------------------- ideal syndromes

def syndrome_bits(error: PauliString, code: ColorCode) -> int:
    if error.n != code.n:
        raise ValueError(f"size mismatch: error on {error.n}, code on {code.n}")
    key = 0
    for i, g in enumerate(code.generators):
        if not error.commutes(g):
            key |= 1 << i
    return key


def bits_to_syndrome(key: int, m: int) -> Syndrome:
    return Syndrome(tuple(-1.0 if (key >> i) & 1 else 1.0 for i in range(m)))


def ideal_syndrome(error: PauliString, code: ColorCode) -> Syndrome:
    key = syndrome_bits(error, code)
    s = bits_to_syndrome(key, 2 * code.n_plaquettes)
    lz = 1.0 if error.commutes(code.logical_z) else -1.0
    lx = 1.0 if error.commutes(code.logical_x) else -1.0
    return Syndrome(s.values, lz, lx)


def enumerate_errors(n: int, max_weight: int, min_weight: int = 0):
    """Pauli errors ordered by (weight, qubit indices, X<Y<Z)."""
    for w in range(min_weight, max_weight + 1):
        if w == 0:
            yield PauliString(n)
            continue
        for qs in itertools.combinations(range(n), w):
            for kinds in itertools.product("XYZ", repeat=w):
                x = z = 0
                for q, k in zip(qs, kinds):
                    if k in "XY":
                        x |= 1 << q
                    if k in "YZ":
                        z |= 1 << q
                yield PauliString(n, x, z)


def count_errors(n: int, max_weight: int, min_weight: int = 0) -> int:
    return sum(math.comb(n, w) * 3 ** w for w in range(min_weight, max_weight + 1))


# ------------------------------------------------------------ table

@dataclass
class SyndromeTable:
    labels: list
    syndromes: list
    errors: list
    names: list = field(default_factory=list)

    def __len__(self):
        return len(self.labels)

    def matrix(self) -> np.ndarray:
        return np.array([s.values for s in self.syndromes])

    def scaled(self, magnitude: float) -> "SyndromeTable":
        return SyndromeTable(list(self.labels), [s.scaled(magnitude) for s in self.syndromes],
                             list(self.errors), list(self.names))

    def row(self, label: str) -> Syndrome:
        return self.syndromes[self.labels.index(label)]

    def to_csv_rows(self) -> list:
        header = ["label"] + self.names + ["ZL", "XL"]
        rows = [header]
        for lab, s in zip(self.labels, self.syndromes):
            rows.append([lab] + [_fmt(v) for v in s.values] + [_fmt(s.logical_z), _fmt(s.logical_x)])
        return rows


def _fmt(v):
    if v is None:
        return ""
    if float(v).is_integer():
        return str(int(v))
    return f"{v:.6g}"


def build_syndrome_table(code: ColorCode, max_weight: int | None = None,
                         cap: int = 10_000) -> SyndromeTable:
    """Trivial row, then every error up to ``max_weight`` (default (d-1)/2)."""
    t = (code.d - 1) // 2 if max_weight is None else max_weight
    total = count_errors(code.n, t)
    if total > cap:
        raise ValueError(f"{total} table rows exceed the cap of {cap}")
    labels, syns, errs = [], [], []
    for w in range(0, t + 1):
        batch = list(enumerate_errors(code.n, w, w))
        if w == 1:
            # single-qubit rows grouped by Pauli type: X1..Xn, Y1..Yn, Z1..Zn
            batch.sort(key=lambda e: ("XYZ".index(e.letter(e.support[0])), e.support[0]))
        for e in batch:
            labels.append(e.sparse_label())
            syns.append(ideal_syndrome(e, code))
            errs.append(e)
    return SyndromeTable(labels, syns, errs, code.generator_names())


# ------------------------------------------------------------ decoding

class LookupDecoder:
    """Minimal-weight lookup decoder with deterministic tie-breaking."""

    def __init__(self, code: ColorCode, max_weight: int | None = None, extended: bool = False,
                 cap: int = DEFAULT_TABLE_CAP):
        t = (code.d - 1) // 2
        if max_weight is None:
            max_weight = code.d - 1 if extended else t
        if max_weight > t:
            if not extended:
                raise ValueError("search beyond (d-1)/2 needs extended=True")
            warnings.warn(f"decoding up to weight {max_weight} > {t}: corrections may apply a logical "
                          "operator", RuntimeWarning, stacklevel=2)
        total = count_errors(code.n, max_weight)
        if total > cap:
            raise ValueError(f"lookup table of {total} entries exceeds the cap of {cap}")
        self.code = code
        self.max_weight = max_weight
        self.table: dict = {}
        gx = [g.x for g in code.generators]
        gz = [g.z for g in code.generators]
        for e in enumerate_errors(code.n, max_weight):
            key = 0
            for i in range(len(gx)):
                if popcount((e.x & gz[i]) ^ (e.z & gx[i])) & 1:
                    key |= 1 << i
            if key not in self.table:
                self.table[key] = e

    def decode_bits(self, key: int) -> PauliString:
        try:
            return self.table[key]
        except KeyError:
            raise DecodingError(
                f"syndrome {key:#x} not produced by any error of weight <= {self.max_weight}") from None

    def decode(self, s: Syndrome) -> PauliString:
        return self.decode_bits(s.bits())


_DECODERS: dict = {}


def lookup_decode(s: Syndrome, code: ColorCode, max_weight: int | None = None,
                  extended: bool = False) -> PauliString:
    key = (id(code), max_weight, extended)
    dec = _DECODERS.get(key)
    if dec is None or dec.code is not code:
        dec = LookupDecoder(code, max_weight, extended)
        _DECODERS[key] = dec
    return dec.decode(s)


def residual_class(error: PauliString, correction: PauliString, code: ColorCode) -> str:
    """'stabilizer', 'X_L', 'Y_L', 'Z_L' or 'detectable' for the net operator."""
    r = (correction * error).unsigned()
    if syndrome_bits(r, code):
        return "detectable"
    if in_stabilizer_group(r, code, signed=False):
        return "stabilizer"
    for name, lop in (("X_L", code.logical_x), ("Z_L", code.logical_z), ("Y_L", logical_y(code))):
        if in_stabilizer_group((r * lop).unsigned(), code, signed=False):
            return name
    return "detectable"


# ------------------------------------------------------------ sampling

def stabilizer_expectations(state: ds.DenseState, code: ColorCode) -> Syndrome:
    vals = tuple(ds.expectation(state, g) for g in code.generators)
    return Syndrome(vals, ds.expectation(state, code.logical_z), ds.expectation(state, code.logical_x))


def sample_syndrome(source, n_cycles: int, rng: np.random.Generator, code: ColorCode | None = None) -> Syndrome:
    """Empirical stabilizer means from ``n_cycles`` +-1 draws per stabilizer.

    ``source`` is a :class:`Syndrome` of exact expectations or a DenseState
    (then ``code`` is required).
    """
    if n_cycles < 1:
        raise ValueError("n_cycles must be >= 1")
    if isinstance(source, ds.DenseState):
        if code is None:
            raise ValueError("code needed to evaluate stabilizers")
        source = stabilizer_expectations(source, code)
    p = np.clip((1 + source.array) / 2, 0.0, 1.0)
    k = rng.binomial(n_cycles, p)
    return Syndrome(tuple(2 * k / n_cycles - 1))


def trace_distance(ref: Syndrome, sample: Syndrome) -> float:
    a, b = ref.array, sample.array
    if a.shape != b.shape:
        raise ValueError("syndrome lengths differ")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def classify_detail(sample: Syndrome, table: SyndromeTable):
    """(label, distance, tied) for the nearest reference row."""
    if not len(table):
        raise ValueError("empty table")
    d = np.sqrt(((table.matrix() - sample.array[None, :]) ** 2).sum(axis=1))
    i = int(np.argmin(d))
    tied = bool(np.sum(np.isclose(d, d[i], rtol=0, atol=1e-12)) > 1)
    return table.labels[i], float(d[i]), tied


def classify(sample: Syndrome, table: SyndromeTable) -> str:
    return classify_detail(sample, table)[0]


def mc_success_rate(true_error: str, refs: SyndromeTable, n_cycles: int, n_samples: int,
                    rng: np.random.Generator, chunk: int = 20000) -> float:
    """Fraction of sampled syndromes of ``true_error`` classified correctly."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    ref = refs.matrix()
    truth = refs.labels.index(true_error)
    p = np.clip((1 + ref[truth]) / 2, 0, 1)
    hits = 0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        k = rng.binomial(n_cycles, p, size=(m, p.size))
        samp = 2 * k / n_cycles - 1
        d2 = ((samp[:, None, :] - ref[None, :, :]) ** 2).sum(axis=2)
        hits += int(np.sum(np.argmin(d2, axis=1) == truth))
        done += m
    return hits / n_samples


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054):
    if trials == 0:
        return 0.0, 1.0
    p = successes / trials
    den = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / den
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / den
    return max(0.0, centre - half), min(1.0, centre + half)


def _curve_point(args):
    true_error, refs, n_cycles, n_samples, seed = args
    rng = np.random.default_rng(seed)
    rate = mc_success_rate(true_error, refs, n_cycles, n_samples, rng)
    lo, hi = wilson_interval(round(rate * n_samples), n_samples)
    return {"n_cycles": n_cycles, "trials": n_samples, "success_rate": rate,
            "wilson_low": lo, "wilson_high": hi}


def mc_curve(true_error: str, refs: SyndromeTable, cycles: Sequence[int], n_samples: int,
             seed: int, workers: int = 1) -> list:
    """Success rate per cycle count; each point has its own RNG substream."""
    seeds = np.random.SeedSequence(seed).spawn(len(cycles))
    jobs = [(true_error, refs, int(c), n_samples, s) for c, s in zip(cycles, seeds)]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_curve_point, jobs))
    return [_curve_point(j) for j in jobs]


# ------------------------------------------------------------ tableau sweeps

def tableau_syndromes(t: StabilizerTableau, errors: Sequence[PauliString], code: ColorCode) -> np.ndarray:
    """Apply each error to ``t`` (restored afterwards) and read all generators."""
    GX, GZ, GR = pack_many(code.generators, t.w)
    EX, EZ, _ = pack_many(errors, t.w)
    return kernels.syndrome_batch(t.X, t.Z, t.R, t.n, GX, GZ, GR, EX, EZ)


def values_to_key(vals: np.ndarray) -> np.ndarray:
    """Integer syndrome keys (Python ints, so any number of generators works)."""
    packed = np.packbits(vals < 0, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


@dataclass
class SweepResult:
    n_errors: int = 0
    corrected: int = 0
    failures: list = field(default_factory=list)
    by_weight: dict = field(default_factory=dict)


def decode_sweep(code: ColorCode, max_weight: int | None = None,
                 states: Sequence[str] = ("zero", "plus")) -> SweepResult:
    """Inject every error up to ``max_weight``, extract its syndrome from the
    tableau of each encoded state, decode, and verify that the corrected state
    has every generator and the state's logical operator at +1."""
    t_max = (code.d - 1) // 2 if max_weight is None else max_weight
    dec = LookupDecoder(code, t_max)
    errors = list(enumerate_errors(code.n, t_max, 1))
    res = SweepResult(n_errors=len(errors))
    ok = np.ones(len(errors), dtype=bool)
    for st in states:
        tab = encoded_tableau(code, st)
        logical = code.logical_z if st in ("zero", "one") else code.logical_x
        sign = -1 if st in ("one", "minus") else 1
        keys = values_to_key(tableau_syndromes(tab, errors, code))
        corr = [dec.decode_bits(int(k)) for k in keys]
        resid = [c * e for c, e in zip(corr, errors)]
        checks = list(code.generators) + [logical if sign == 1 else -logical]
        GX, GZ, GR = pack_many(checks, tab.w)
        EX, EZ, _ = pack_many(resid, tab.w)
        after = kernels.syndrome_batch(tab.X, tab.Z, tab.R, tab.n, GX, GZ, GR, EX, EZ)
        ok &= np.all(after == 1, axis=1)
    for i, e in enumerate(errors):
        w = e.weight()
        tot, good = res.by_weight.get(w, (0, 0))
        member = in_stabilizer_group((dec.decode_bits(syndrome_bits(e, code)) * e).unsigned(),
                                     code, signed=False)
        passed = bool(ok[i]) and member
        res.by_weight[w] = (tot + 1, good + int(passed))
        if passed:
            res.corrected += 1
        else:
            res.failures.append(e.sparse_label())
    return res


def random_errors(n: int, count: int, max_weight: int, rng: np.random.Generator) -> list:
    """Uniform weight in 1..max_weight, uniform support and Pauli types."""
    out = []
    weights = rng.integers(1, max_weight + 1, size=count)
    for w in weights:
        qs = rng.choice(n, size=int(w), replace=False)
        kinds = rng.integers(1, 4, size=int(w))
        x = z = 0
        for q, k in zip(qs, kinds):
            if k & 1:
                x |= 1 << int(q)
            if k & 2:
                z |= 1 << int(q)
        out.append(PauliString(n, x, z))
    return out


def inject(state: ds.DenseState, error: PauliString) -> ds.DenseState:
    return ds.apply_pauli(state, error)
