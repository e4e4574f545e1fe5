"""Figures of merit for encoded states: stabilizer-expansion fidelity, code
space overlap, witness, logical Bloch vector, decay fits and bootstrap errors."""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from . import circuits as cx
from . import densesim as ds
from .code import ColorCode, logical_y, stabilizer_group
from .pauli import PauliString

# Experimental figures used only to tune noise models, never as computed output.
CALIBRATION = {
    "avg_stabilizer": 0.48,
    "encoded_fidelity_one": 0.327,
    "coherence_time_ms": 3.6,
    "loss_per_gate": 0.038,
    "two_qubit_mixed_overlap": 0.983,
}
WITNESS_THRESHOLD = 0.25


# ------------------------------------------------------------ expansions

def projector_terms(ops: Sequence[PauliString]) -> list:
    """Signed Paulis W with prod_k (1+O_k)/2 = 2^-len(ops) * sum W.

    The operators must commute pairwise; every subset product is kept
    (duplicates are not merged, so the list has 2^len(ops) entries).
    """
    if not ops:
        raise ValueError("need at least one operator")
    n = ops[0].n
    terms = [PauliString(n)]
    for o in ops:
        terms = terms + [t * o for t in terms]
    for t in terms:
        if t.phase % 2:
            raise ValueError("operators do not commute; expansion is not Hermitian")
    return terms


@lru_cache(maxsize=32)
def _target_terms(label: str, code: ColorCode) -> tuple:
    return tuple(projector_terms(list(code.generators) + [cx.logical_operator(label, code)]))


def _mean_expectation(rho: ds.DenseState, terms) -> float:
    return float(np.mean([ds.expectation(rho, w) for w in terms]))


def fidelity_pauli(rho: ds.DenseState, label, code: ColorCode) -> float:
    """tr(rho_t rho) from the 2^n signed Pauli expectations of rho_t."""
    label = cx.as_label(label).value
    return _mean_expectation(rho, _target_terms(label, code))


def fidelity_dense(rho: ds.DenseState, label, code: ColorCode) -> float:
    """Reference tr(rho_t rho) with the projector built as a matrix."""
    proj = cx.target_projector(label, code)
    return float(np.real(np.trace(proj @ rho.density())))


def code_space_overlap(rho: ds.DenseState, code: ColorCode) -> float:
    """tr(P_CS rho) as the mean expectation over the stabilizer group."""
    return _mean_expectation(rho, stabilizer_group(code))


def fidelity_in_cs(rho: ds.DenseState, label, code: ColorCode) -> float:
    p = code_space_overlap(rho, code)
    if p <= 1e-15:
        return 0.0
    return fidelity_pauli(rho, label, code) / p


def witness_value(rho: ds.DenseState, code: ColorCode, label="one") -> float:
    """<W> = 1/4 - F(rho, label); negative values certify entanglement."""
    return witness_from_fidelity(fidelity_pauli(rho, label, code))


def witness_from_fidelity(f: float) -> float:
    return WITNESS_THRESHOLD - f


def is_entangled(w: float) -> bool:
    return w < 0


# ------------------------------------------------------------ metrics

@dataclass
class CodeMetrics:
    bloch: tuple
    bloch_length: float
    avg_stabilizer: float
    fidelity: float | None = None
    p_cs: float | None = None
    fidelity_in_cs: float | None = None
    witness: float | None = None
    label: str | None = None

    def check(self, tol: float = 1e-9):
        if self.fidelity is not None and self.p_cs:
            if abs(self.fidelity - self.p_cs * self.fidelity_in_cs) > tol:
                raise ValueError("F != p_cs * F_cs")
        if self.bloch_length > 1 + 1e-6:
            raise ValueError(f"Bloch vector longer than 1: {self.bloch_length}")

    def to_dict(self, **provenance) -> dict:
        out = asdict(self)
        out["bloch"] = list(self.bloch)
        if provenance:
            out["provenance"] = provenance
        return out


def logical_bloch(rho: ds.DenseState, code: ColorCode) -> CodeMetrics:
    x = ds.expectation(rho, code.logical_x)
    y = ds.expectation(rho, logical_y(code))
    z = ds.expectation(rho, code.logical_z)
    gens = code.generators
    avg = float(np.mean([ds.expectation(rho, g) for g in gens]))
    return CodeMetrics((x, y, z), math.sqrt(x * x + y * y + z * z), avg)


def code_metrics(rho: ds.DenseState, code: ColorCode, label) -> CodeMetrics:
    m = logical_bloch(rho, code)
    m.label = cx.as_label(label).value
    m.fidelity = fidelity_pauli(rho, label, code)
    m.p_cs = code_space_overlap(rho, code)
    m.fidelity_in_cs = m.fidelity / m.p_cs if m.p_cs > 1e-15 else 0.0
    m.witness = witness_value(rho, code, label)
    return m


def two_qubit_mixedness(rho: ds.DenseState) -> dict:
    """Uhlmann fidelity of every two-qubit reduction with I/4 (1-based keys)."""
    mixed = ds.maximally_mixed(2)
    out = {}
    for a, b in itertools.combinations(range(rho.n), 2):
        out[(a + 1, b + 1)] = ds.uhlmann_fidelity(ds.partial_trace(rho, [a, b]), mixed)
    return out


# ------------------------------------------------------------ decay fits

@dataclass(frozen=True)
class ExpFit:
    A: float
    B: float
    r_squared: float

    @property
    def loss_per_step(self) -> float:
        return 0.0 if math.isinf(self.B) else 1.0 - math.exp(-1.0 / self.B)

    def __iter__(self):
        return iter((self.A, self.B, self.r_squared))


def fit_exponential(series, weights: Sequence[float] | None = None) -> ExpFit:
    """Fit value = A exp(-index / B) by weighted least squares on log(value).

    B is ``inf`` when the series shows no decay; r^2 is computed on the
    values themselves.
    """
    pts = list(series)
    if len(pts) < 3:
        raise ValueError("need at least 3 points")
    x = np.array([float(p[0]) for p in pts])
    y = np.array([float(p[1]) for p in pts])
    if np.any(y <= 0):
        raise ValueError("non-positive values: exponential fit undefined in log space")
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != x.shape or np.any(w < 0) or not np.any(w > 0):
        raise ValueError("bad weights")
    ly = np.log(y)
    W = w.sum()
    xm, ym = (w * x).sum() / W, (w * ly).sum() / W
    sxx = (w * (x - xm) ** 2).sum()
    if sxx == 0:
        raise ValueError("indices must not all coincide")
    slope = (w * (x - xm) * (ly - ym)).sum() / sxx
    A = math.exp(ym - slope * xm)
    B = math.inf if abs(slope) < 1e-12 else float(-1.0 / slope)
    pred = A * np.exp(slope * x)
    yw = (w * y).sum() / W
    ss_tot = (w * (y - yw) ** 2).sum()
    ss_res = (w * (y - pred) ** 2).sum()
    r2 = 1.0 if ss_tot <= 1e-30 * max(1.0, (w * y * y).sum()) else 1.0 - ss_res / ss_tot
    return ExpFit(A, B, float(r2))


def gate_repeat_series(code: ColorCode, n_gates: int = 10, p: float = 0.0, sigma: float = 0.0,
                       start="minus_y", gate: str = "X_L") -> list:
    """Metrics after preparing ``start`` and after each of ``n_gates`` gates.

    Noise: depolarizing ``p`` on every target of every physical gate, plus
    optional collective dephasing ``sigma``.
    """
    noise = cx.NoiseModel(p, sigma)
    rho = cx.simulate_dense(cx.cardinal_prep(start, code), noise=noise)
    step = cx.transversal_gate(gate, code)
    rows = []
    for k in range(n_gates + 1):
        if k:
            rho = cx.simulate_dense(step, rho, noise)
        m = logical_bloch(rho, code)
        rows.append({"n_gate": k, "X_L": m.bloch[0], "Y_L": m.bloch[1], "Z_L": m.bloch[2],
                     "L": m.bloch_length, "avg_stabilizer": m.avg_stabilizer})
    return rows


def decay_fit(rows: Sequence[dict], key: str = "Y_L") -> ExpFit:
    return fit_exponential([(r["n_gate"], abs(r[key])) for r in rows])


def loss_for_noise(code: ColorCode, p: float, n_gates: int = 10) -> float:
    return decay_fit(gate_repeat_series(code, n_gates, p)).loss_per_step


def calibrate_depolarizing(code: ColorCode, target_loss: float = CALIBRATION["loss_per_gate"],
                           n_gates: int = 10, p_max: float = 0.05, xtol: float = 1e-7) -> float:
    """Per-qubit depolarizing probability giving ``target_loss`` per gate."""
    from scipy.optimize import brentq

    f = lambda p: loss_for_noise(code, p, n_gates) - target_loss  # noqa: E731
    if f(0.0) > 0 or f(p_max) < 0:
        raise ValueError(f"target loss {target_loss} not bracketed in [0, {p_max}]")
    return float(brentq(f, 0.0, p_max, xtol=xtol))


# ------------------------------------------------------------ bootstrap

def bootstrap_errorbars(shot_counts: Mapping, quantity: Callable, n_boot: int,
                        rng: np.random.Generator):
    """Multinomial resampling of per-setting outcome tallies.

    ``shot_counts`` maps a setting name to its outcome counts; ``quantity``
    receives a dict of resampled outcome frequencies per setting and returns
    a float or array. Returns (mean, std) over replicates.
    """
    if n_boot < 100:
        raise ValueError("n_boot must be >= 100")
    if not shot_counts:
        raise ValueError("empty tallies")
    draws = {}
    for key, counts in shot_counts.items():
        c = np.asarray(counts, dtype=np.int64)
        N = int(c.sum())
        if N <= 0:
            raise ValueError(f"setting {key!r} has no shots")
        draws[key] = rng.multinomial(N, c / N, size=n_boot) / N
    vals = np.array([quantity({k: v[b] for k, v in draws.items()}) for b in range(n_boot)], dtype=float)
    return vals.mean(axis=0), vals.std(axis=0, ddof=1)


def expectation_from_freqs(freqs) -> float:
    """<O> from (p(+1), p(-1)) frequencies."""
    return float(freqs[0] - freqs[1])
