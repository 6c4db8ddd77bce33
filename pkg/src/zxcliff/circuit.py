"""Gate-level Clifford circuits, their matrix semantics and the diagram translation.

Circuits are ordered gate lists over {S, V, Z, X, H, CNOT, TONC, SWAP} on a
fixed number of wires.  The circuit PROP is free: two circuits with the same
unitary are still different circuits.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from .diagram import B, H, X, Z, Diagram, DiagramBuilder
from .errors import CircuitSyntaxError, SemanticsSizeError
from .semantics import DEFAULT_QUBIT_BOUND

ONE_QUBIT_GATES = ("S", "V", "Z", "X", "H")
TWO_QUBIT_GATES = ("CNOT", "TONC", "SWAP")
GATE_ARITY = {**{g: 1 for g in ONE_QUBIT_GATES}, **{g: 2 for g in TWO_QUBIT_GATES}}

_OMEGA = np.exp(1j * np.pi / 4)

S_MAT = np.array([[1, 0], [0, 1j]], dtype=complex)
V_MAT = np.array([[_OMEGA, _OMEGA.conjugate()],
                  [_OMEGA.conjugate(), _OMEGA]], dtype=complex) / np.sqrt(2)
Z_MAT = S_MAT @ S_MAT
X_MAT = V_MAT @ V_MAT
CNOT_MAT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
                    dtype=complex)
SWAP_MAT = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]],
                    dtype=complex)
TONC_MAT = SWAP_MAT @ CNOT_MAT @ SWAP_MAT

GATE_MATRICES: Dict[str, np.ndarray] = {
    "S": S_MAT, "V": V_MAT, "Z": Z_MAT, "X": X_MAT,
    "H": _OMEGA.conjugate() * S_MAT @ V_MAT @ S_MAT,
    "CNOT": CNOT_MAT, "TONC": TONC_MAT, "SWAP": SWAP_MAT,
}


@dataclass(frozen=True)
class Gate:
    name: str
    wires: Tuple[int, ...]

    def __post_init__(self):
        if self.name not in GATE_ARITY:
            raise ValueError(f"unknown gate {self.name}")
        if len(self.wires) != GATE_ARITY[self.name]:
            raise ValueError(f"{self.name} takes {GATE_ARITY[self.name]} wires")
        if len(set(self.wires)) != len(self.wires):
            raise ValueError(f"{self.name} wires must be distinct")

    def __str__(self) -> str:
        return " ".join([self.name] + [str(w) for w in self.wires])


def gate(name: str, *wires: int) -> Gate:
    return Gate(name, tuple(wires))


@dataclass(frozen=True)
class Circuit:
    width: int
    gates: Tuple[Gate, ...]

    def __post_init__(self):
        if self.width < 0:
            raise ValueError("negative width")
        for g in self.gates:
            if any(w < 0 or w >= self.width for w in g.wires):
                raise ValueError(f"gate {g} off a {self.width}-wire circuit")

    def __len__(self) -> int:
        return len(self.gates)

    def then(self, other: "Circuit") -> "Circuit":
        if other.width != self.width:
            raise ValueError("width mismatch")
        return Circuit(self.width, self.gates + other.gates)


def circuit(width: int, *gates_: Gate) -> Circuit:
    return Circuit(width, tuple(gates_))


# -- matrix semantics ----------------------------------------------------------

def _embed(width: int, g: Gate) -> np.ndarray:
    """Gate matrix acting at its wires within a 2^width space (wire 0 = msb)."""
    m = GATE_MATRICES[g.name]
    dim = 2 ** width
    out = np.zeros((dim, dim), dtype=complex)
    wires = g.wires
    shifts = [width - 1 - w for w in wires]
    for col in range(dim):
        sub_in = 0
        for k, sh in enumerate(shifts):
            sub_in = (sub_in << 1) | ((col >> sh) & 1)
        for sub_out in range(m.shape[0]):
            amp = m[sub_out, sub_in]
            if amp == 0:
                continue
            row = col
            for k, sh in enumerate(shifts):
                bit = (sub_out >> (len(wires) - 1 - k)) & 1
                row = (row & ~(1 << sh)) | (bit << sh)
            out[row, col] += amp
    return out


def gate_matrix_product(c: Circuit, qubit_bound: int = DEFAULT_QUBIT_BOUND) -> np.ndarray:
    """Product of the embedded gate matrices, last gate leftmost."""
    if c.width > qubit_bound:
        raise SemanticsSizeError(f"width {c.width} exceeds bound {qubit_bound}")
    m = np.eye(2 ** c.width, dtype=complex)
    for g in c.gates:
        m = _embed(c.width, g) @ m
    return m


# -- translation to diagrams ----------------------------------------------------

_SPIDER_GATES = {"S": (Z, 1), "Z": (Z, 2), "V": (X, 1), "X": (X, 2)}


def translate(c: Circuit) -> Diagram:
    """The translation functor: one spider per 1-qubit gate, a Z(0)-X(0) edge
    per CNOT (Z end on the control), the colour-reversed pair for TONC, and a
    bare wire crossing for SWAP."""
    b = DiagramBuilder()
    ins = [b.add_vertex(B) for _ in range(c.width)]
    frontier = list(ins)

    def extend(wire: int, kind: str, phase: int) -> int:
        v = b.add_vertex(kind, phase)
        b.add_edge(frontier[wire], v)
        frontier[wire] = v
        return v

    for g in c.gates:
        if g.name in _SPIDER_GATES:
            kind, phase = _SPIDER_GATES[g.name]
            extend(g.wires[0], kind, phase)
        elif g.name == "H":
            extend(g.wires[0], H, 0)
        elif g.name == "CNOT":
            cv = extend(g.wires[0], Z, 0)
            tv = extend(g.wires[1], X, 0)
            b.add_edge(cv, tv)
        elif g.name == "TONC":
            cv = extend(g.wires[0], X, 0)
            tv = extend(g.wires[1], Z, 0)
            b.add_edge(cv, tv)
        elif g.name == "SWAP":
            a, t = g.wires
            frontier[a], frontier[t] = frontier[t], frontier[a]
        else:  # pragma: no cover
            raise AssertionError(g.name)

    outs = []
    for w in range(c.width):
        o = b.add_vertex(B)
        b.add_edge(frontier[w], o)
        outs.append(o)
    b.set_boundaries(ins, outs)
    return b.build()


def circuit_size(d: Diagram) -> int:
    """Number of non-trivial interior vertices: zero-phase degree-2 spiders do
    not count, every other interior vertex (including each CNOT leg and each
    H box) counts 1."""
    n = 0
    for v in d.interior():
        if d.is_spider(v) and d.phase(v) == 0 and d.degree(v) == 2:
            continue
        n += 1
    return n


# -- text format -----------------------------------------------------------------

def serialize_circuit(c: Circuit) -> str:
    lines = [f"qubits {c.width}"]
    lines.extend(str(g) for g in c.gates)
    return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> Circuit:
    width = None
    gates_: List[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if width is None:
            if parts[0] != "qubits" or len(parts) != 2:
                raise CircuitSyntaxError("expected 'qubits <n>'", lineno)
            try:
                width = int(parts[1])
            except ValueError:
                raise CircuitSyntaxError(f"bad qubit count {parts[1]!r}", lineno)
            if width < 1:
                raise CircuitSyntaxError("qubit count must be positive", lineno)
            continue
        name = parts[0]
        if name not in GATE_ARITY:
            raise CircuitSyntaxError(f"unknown gate {name!r}", lineno)
        if len(parts) - 1 != GATE_ARITY[name]:
            raise CircuitSyntaxError(
                f"{name} takes {GATE_ARITY[name]} wire(s), got {len(parts) - 1}", lineno)
        try:
            wires = tuple(int(p) for p in parts[1:])
        except ValueError:
            raise CircuitSyntaxError(f"bad wire index in {line!r}", lineno)
        if any(w < 0 or w >= width for w in wires):
            raise CircuitSyntaxError(f"wire out of range in {line!r}", lineno)
        if len(set(wires)) != len(wires):
            raise CircuitSyntaxError(f"repeated wire in {line!r}", lineno)
        gates_.append(Gate(name, wires))
    if width is None:
        raise CircuitSyntaxError("missing 'qubits <n>' header")
    return Circuit(width, tuple(gates_))


# -- random generation -------------------------------------------------------------

def random_clifford_circuit(width: int, depth: int, seed: int) -> Circuit:
    """One gate per layer: a fair coin picks single-qubit vs CNOT (width >= 2),
    then the gate and wires are uniform.  Deterministic in the seed."""
    if width < 1 or depth < 1:
        raise ValueError("width and depth must be >= 1")
    rng = random.Random(seed)
    gates_: List[Gate] = []
    for _ in range(depth):
        if width >= 2 and rng.random() < 0.5:
            c = rng.randrange(width)
            t = rng.randrange(width - 1)
            if t >= c:
                t += 1
            gates_.append(Gate("CNOT", (c, t)))
        else:
            name = ONE_QUBIT_GATES[rng.randrange(len(ONE_QUBIT_GATES))]
            gates_.append(Gate(name, (rng.randrange(width),)))
    return Circuit(width, tuple(gates_))
