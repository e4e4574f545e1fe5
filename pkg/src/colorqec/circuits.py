"""Logical-level circuits: plaquette encoding, transversal gates, cardinal states."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from . import densesim as ds
from .code import ColorCode, logical_y
from .gates import Gate
from .pauli import PauliString
from .tableau import StabilizerTableau, basis_tableau, new_tableau

PI = math.pi
DEFAULT_INPUT = "1010101"
DEFAULT_ORDER = ("red", "blue", "green")


class CircuitError(ValueError):
    pass


class LogicalLabel(str, Enum):
    ZERO = "zero"
    ONE = "one"
    PLUS_X = "plus_x"
    MINUS_X = "minus_x"
    PLUS_Y = "plus_y"
    MINUS_Y = "minus_y"


_ALIASES = {"0": "zero", "1": "one", "+x": "plus_x", "-x": "minus_x",
            "+y": "plus_y", "-y": "minus_y", "+z": "zero", "-z": "one"}

# gate sequence after encoding, in application order
CARDINAL_SEQUENCES = {
    LogicalLabel.ZERO: (),
    LogicalLabel.ONE: ("X_L",),
    LogicalLabel.PLUS_X: ("H_L",),
    LogicalLabel.MINUS_X: ("X_L", "H_L"),
    LogicalLabel.PLUS_Y: ("H_L", "K_L"),
    LogicalLabel.MINUS_Y: ("H_L", "K_L", "X_L"),
}


def as_label(label) -> LogicalLabel:
    if isinstance(label, LogicalLabel):
        return label
    try:
        return LogicalLabel(_ALIASES.get(str(label), str(label)))
    except ValueError:
        raise CircuitError(f"unknown logical label {label!r}") from None


@dataclass(frozen=True)
class Op:
    gate: Gate
    origin: str


@dataclass(frozen=True)
class Circuit:
    """Ordered gates on ``n`` qubits, optionally starting from a basis state.

    ``prep`` is the bit pattern prepared from the optically pumped |1...1>
    register (None: start from whatever state the caller supplies).
    """

    n: int
    ops: tuple = ()
    prep: str | None = None

    def __post_init__(self):
        for op in self.ops:
            for t in op.gate.targets:
                if not 0 <= t < self.n:
                    raise CircuitError(f"target {t} out of range")
        if self.prep is not None and len(self.prep) != self.n:
            raise CircuitError("prep pattern length mismatch")

    def then(self, other: "Circuit") -> "Circuit":
        if other.n != self.n:
            raise CircuitError("qubit counts differ")
        if other.prep is not None:
            raise CircuitError("cannot append a circuit that re-prepares the register")
        return Circuit(self.n, self.ops + other.ops, self.prep)

    def gates(self) -> list:
        return [op.gate for op in self.ops]

    def origins(self) -> list:
        out = []
        for op in self.ops:
            if not out or out[-1] != op.origin:
                out.append(op.origin)
        return out

    def to_text(self) -> str:
        lines = []
        if self.prep is not None:
            lines.append(f"PREP({self.prep}) @ {','.join(str(q + 1) for q in range(self.n))} # prep")
        for op in self.ops:
            tg = ",".join(str(t + 1) for t in op.gate.targets)
            lines.append(f"{op.gate.label()} @ {tg} # {op.origin}")
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text: str, n: int) -> "Circuit":
        import re

        ops, prep = [], None
        for raw in text.strip().splitlines():
            body, _, origin = raw.partition("#")
            head, _, tg = body.partition("@")
            m = re.fullmatch(r"\s*([A-Z_]+)(?:\(([^)]*)\))?\s*", head)
            if not m:
                raise CircuitError(f"cannot parse line {raw!r}")
            name, params = m.group(1), m.group(2)
            if name == "PREP":
                prep = params
                continue
            targets = tuple(int(t) - 1 for t in tg.split(","))
            ps = tuple(float(p) for p in params.split(",")) if params else ()
            ops.append(Op(Gate(name, targets, ps), origin.strip()))
        return cls(n, tuple(ops), prep)


def _ops(gates: Iterable[Gate], origin: str) -> tuple:
    return tuple(Op(g, origin) for g in gates)


# ------------------------------------------------------------- encoding

def _plaquette(code: ColorCode, color: str):
    hits = [i for i, p in enumerate(code.plaquettes) if p.color == color]
    if len(hits) != 1:
        raise CircuitError(f"expected one {color} plaquette")
    return hits[0]


def compensation_qubit(code: ColorCode, plaq: int, later: Sequence[int]) -> int:
    """Lowest qubit of ``plaq`` that no later plaquette touches."""
    used = set()
    for j in later:
        used |= set(code.plaquettes[j].qubits)
    free = [q for q in code.plaquettes[plaq].qubits if q not in used]
    if not free:
        raise CircuitError("no free corner for phase compensation")
    others = set()
    for j, p in enumerate(code.plaquettes):
        if j != plaq:
            others |= set(p.qubits)
    corners = [q for q in free if q not in others]
    return (corners or free)[0]


@dataclass(frozen=True)
class EncodingPlan:
    order: tuple          # plaquette indices
    corners: tuple        # compensation qubit per step
    signs: tuple          # +1/-1 per step
    input_bits: str


_PLAN_CACHE: dict = {}


def _check_d3(code: ColorCode):
    if code.d != 3 or code.n != 7:
        raise CircuitError("the plaquette encoding circuit is defined for the d=3 code")


def encoding_plan(code: ColorCode, order=DEFAULT_ORDER, input_bits: str = DEFAULT_INPUT) -> EncodingPlan:
    """Resolve the compensation pulse signs by dense simulation."""
    _check_d3(code)
    key = (id(code), tuple(order), input_bits)
    if key in _PLAN_CACHE and _PLAN_CACHE[key][0] is code:
        return _PLAN_CACHE[key][1]
    if len(input_bits) != code.n or set(input_bits) - {"0", "1"}:
        raise CircuitError(f"input must be {code.n} bits")
    inp = PauliString(code.n, sum(1 << q for q, b in enumerate(input_bits) if b == "1"))
    # the input has to be a component of |0>_L: +1 for every Z generator and Z_L
    if any(not inp.commutes(g) for g in list(code.stabilizers_z) + [code.logical_z]):
        raise CircuitError(f"{input_bits} is not a component of |0>_L")
    if len(set(order)) != len(code.plaquettes):
        raise CircuitError("order must list every plaquette once")
    idx = tuple(_plaquette(code, c) for c in order)
    corners = tuple(compensation_qubit(code, p, idx[k + 1:]) for k, p in enumerate(idx))
    state = ds.prepare_product(input_bits)
    signs = []
    for k, p in enumerate(idx):
        state = ds.apply_gate(state, Gate("MS", code.plaquettes[p].qubits, (PI / 2, 0.0)))
        sx = code.stabilizers_x[p]
        best = None
        for s in (1, -1):
            trial = ds.apply_gate(state, Gate("UZ", (corners[k],), (s * PI / 2,)))
            val = ds.expectation(trial, sx)
            if best is None or val > best[0]:
                best = (val, s, trial)
        if best[0] < 1 - 1e-9:
            raise CircuitError(f"step {k + 1} cannot be phase-compensated")
        signs.append(best[1])
        state = best[2]
    plan = EncodingPlan(idx, corners, tuple(signs), input_bits)
    _PLAN_CACHE[key] = (code, plan)
    return plan


def encoding_circuit(code: ColorCode, order=DEFAULT_ORDER, input_bits: str = DEFAULT_INPUT,
                     steps: int | None = None) -> Circuit:
    """Prepare ``input_bits``, entangle each plaquette with MS(pi/2, 0), then
    apply the phase-compensation pulses.  ``steps`` truncates after that many
    plaquettes (keeping their compensation pulses)."""
    plan = encoding_plan(code, order, input_bits)
    k_max = len(plan.order) if steps is None else steps
    if not 0 <= k_max <= len(plan.order):
        raise CircuitError("bad step count")
    ops = []
    for k in range(k_max):
        q = code.plaquettes[plan.order[k]].qubits
        ops.append(Op(Gate("MS", q, (PI / 2, 0.0)), f"encoding-step-{k + 1}"))
    for k in range(k_max):
        ops.append(Op(Gate("UZ", (plan.corners[k],), (plan.signs[k] * PI / 2,)),
                      f"encoding-compensation-{k + 1}"))
    return Circuit(code.n, tuple(ops), input_bits)


# ---------------------------------------------------------- transversal

def _k_angle(code: ColorCode) -> float:
    # prod UZ(-pi/2) ~ prod K^dagger sends X_L to (-1)^n Y^n; Y_L = i (-i)^n Y^n
    yl = logical_y(code)
    dagger_image = PauliString.from_support(code.n, range(code.n), "Y") * ((-1) ** code.n)
    return -PI / 2 if dagger_image == yl else PI / 2


def transversal_gate(name: str, code: ColorCode) -> Circuit:
    n = code.n
    allq = tuple(range(n))
    if name == "X_L":
        gates = [Gate("U", allq, (PI, 0.0))]
    elif name == "Z_L":
        gates = [Gate("UZ", (q,), (PI,)) for q in allq]
    elif name == "Y_L":
        gates = transversal_gate("X_L", code).gates() + transversal_gate("Z_L", code).gates()
    elif name == "H_L":
        gates = [Gate("U", allq, (-PI / 2, PI / 2))] + [Gate("UZ", (q,), (PI,)) for q in allq]
    elif name == "K_L":
        ang = _k_angle(code)
        gates = [Gate("UZ", (q,), (ang,)) for q in allq]
    else:
        raise CircuitError(f"unknown logical gate {name!r}")
    return Circuit(n, _ops(gates, name))


def logical_sequence(names: Sequence[str], code: ColorCode) -> Circuit:
    out = Circuit(code.n)
    for nm in names:
        out = out.then(transversal_gate(nm, code))
    return out


def cardinal_prep(label, code: ColorCode, **enc) -> Circuit:
    label = as_label(label)
    return encoding_circuit(code, **enc).then(logical_sequence(CARDINAL_SEQUENCES[label], code))


def gate_repeat_circuit(code: ColorCode, n_gates: int, start="minus_y", gate: str = "X_L") -> Circuit:
    return cardinal_prep(start, code).then(logical_sequence([gate] * n_gates, code))


# ------------------------------------------------------------ references

def logical_operator(label, code: ColorCode) -> PauliString:
    """Signed logical Pauli whose +1 eigenstate is ``label``."""
    label = as_label(label)
    return {
        LogicalLabel.ZERO: code.logical_z,
        LogicalLabel.ONE: -code.logical_z,
        LogicalLabel.PLUS_X: code.logical_x,
        LogicalLabel.MINUS_X: -code.logical_x,
        LogicalLabel.PLUS_Y: logical_y(code),
        LogicalLabel.MINUS_Y: -logical_y(code),
    }[label]


def _projector(ops: Sequence[PauliString], n: int) -> np.ndarray:
    proj = np.eye(2 ** n, dtype=complex)
    for g in ops:
        m = np.zeros((2 ** n, 2 ** n), dtype=complex)
        idx, flipped, coeff = ds._pauli_action(g, n)
        m[flipped, idx] = coeff
        proj = proj @ (np.eye(2 ** n) + m) / 2
    return proj


def target_projector(label, code: ColorCode) -> np.ndarray:
    """Dense rho_t = 1/2 (1 + O_L) P_CS."""
    if code.n > 10:
        raise CircuitError("dense reference states need a small code")
    return _projector(list(code.generators) + [logical_operator(label, code)], code.n)


def ideal_logical_state(label, code: ColorCode) -> ds.DenseState:
    proj = target_projector(label, code)
    j = int(np.argmax(np.abs(np.diag(proj))))
    col = proj[:, j]
    return ds.DenseState(col / np.linalg.norm(col), code.n)


# ------------------------------------------------------------ simulation

@dataclass(frozen=True)
class NoiseModel:
    """Per-gate noise applied to each gate's targets after the gate."""

    depolarizing: float = 0.0
    dephasing_sigma: float = 0.0

    @property
    def is_noiseless(self) -> bool:
        return self.depolarizing == 0 and self.dephasing_sigma == 0


def initial_state(circuit: Circuit, state: ds.DenseState | None = None) -> ds.DenseState:
    if state is not None:
        return state
    return ds.prepare_product(circuit.prep if circuit.prep is not None else "1" * circuit.n)


def simulate_dense(circuit: Circuit, state: ds.DenseState | None = None,
                   noise: NoiseModel | None = None, observer=None) -> ds.DenseState:
    """Run ``circuit``; ``observer(op_index, op, state)`` is called after each op."""
    state = initial_state(circuit, state)
    noisy = noise is not None and not noise.is_noiseless
    if noisy:
        state = state.to_mixed()
    for i, op in enumerate(circuit.ops):
        state = ds.apply_gate(state, op.gate)
        if noisy:
            if noise.depolarizing:
                state = ds.apply_channel(state, ds.depolarizing(noise.depolarizing), op.gate.targets)
            if noise.dephasing_sigma:
                state = ds.apply_channel(state, ds.collective_dephasing(noise.dephasing_sigma),
                                         op.gate.targets)
        if observer is not None:
            observer(i, op, state)
    return state


def simulate_tableau(circuit: Circuit, tableau: StabilizerTableau | None = None) -> StabilizerTableau:
    if tableau is None:
        tableau = basis_tableau(circuit.prep) if circuit.prep else new_tableau(circuit.n)
    for op in circuit.ops:
        tableau.apply_gate(op.gate)
    return tableau
