"""Gate lists: construction, dense simulation, census and text export.

Wires are 0-based and wire 0 is the most significant tensor factor.  Gates
are stored in time order, so the circuit unitary is ``g[-1] @ ... @ g[0]``.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ResourceError, ValidationError

# largest control count expanded with the exponential-size Gray-code circuit
SMALL_MC_LIMIT = 6
SIM_QUBIT_CAP = 14

_S = np.diag([1, 1j])
_FIXED = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
    "S": _S,
    "SDG": _S.conj(),
}
SINGLE_QUBIT = {"H", "X", "Y", "Z", "S", "SDG", "RX", "RY", "RZ", "P"}
TWO_QUBIT = {"CNOT"}
MULTI = {"MCZ", "MCP"}
ALL_GATES = SINGLE_QUBIT | TWO_QUBIT | MULTI | {"GPHASE"}
_ANGLED = {"RX", "RY", "RZ", "P", "MCP", "GPHASE"}
_INVERSE_NAME = {"S": "SDG", "SDG": "S"}


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.name not in ALL_GATES:
            raise ValidationError(f"unknown gate {self.name}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if (self.name in _ANGLED) != (self.angle is not None):
            raise ValidationError(f"gate {self.name}: angle mismatch")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValidationError(f"gate {self.name}: repeated wire")

    def inverse(self) -> "Gate":
        if self.angle is not None:
            return Gate(self.name, self.qubits, -self.angle)
        return Gate(_INVERSE_NAME.get(self.name, self.name), self.qubits)

    def matrix(self) -> np.ndarray:
        """Local matrix on ``self.qubits`` (single-qubit gates only)."""
        if self.name in _FIXED:
            return _FIXED[self.name]
        a = self.angle
        if self.name == "RX":
            return np.array([[np.cos(a / 2), -1j * np.sin(a / 2)],
                             [-1j * np.sin(a / 2), np.cos(a / 2)]])
        if self.name == "RY":
            return np.array([[np.cos(a / 2), -np.sin(a / 2)],
                             [np.sin(a / 2), np.cos(a / 2)]], dtype=complex)
        if self.name == "RZ":
            return np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])
        if self.name == "P":
            return np.diag([1, np.exp(1j * a)])
        raise ValidationError(f"{self.name} has no single-qubit matrix")

    def to_text(self) -> str:
        parts = [self.name, *map(str, self.qubits)]
        if self.angle is not None:
            parts.append(repr(float(self.angle)))
        return " ".join(parts)


@dataclass
class GateList:
    """Ordered gates on ``n_qubits`` wires, optionally split into named regions."""

    n_qubits: int
    gates: list[Gate] = field(default_factory=list)
    regions: dict[str, tuple[int, int]] = field(default_factory=dict)

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def append(self, name, qubits=(), angle=None):
        self.gates.append(Gate(name, tuple(qubits), angle))

    def extend(self, other: Iterable[Gate]):
        self.gates.extend(other)

    def add_region(self, name: str, gates: Iterable[Gate]):
        start = len(self.gates)
        self.gates.extend(gates)
        self.regions[name] = (start, len(self.gates))

    def region(self, name: str) -> list[Gate]:
        a, b = self.regions[name]
        return self.gates[a:b]

    def inverse(self) -> "GateList":
        return GateList(self.n_qubits, [g.inverse() for g in reversed(self.gates)])

    def shifted(self, offset: int, n_qubits: int | None = None) -> "GateList":
        n = self.n_qubits + offset if n_qubits is None else n_qubits
        return GateList(n, [Gate(g.name, tuple(q + offset for q in g.qubits), g.angle)
                            for g in self.gates])

    def expanded(self, limit: int = SMALL_MC_LIMIT) -> "GateList":
        """Replace MCZ/MCP primitives with at most ``limit`` controls by CNOT + phase gates."""
        out = GateList(self.n_qubits)
        new_index = []
        for g in self.gates:
            new_index.append(len(out.gates))
            if g.name in MULTI and len(g.qubits) - 1 <= limit:
                theta = np.pi if g.name == "MCZ" else g.angle
                out.gates.extend(mc_phase_gates(g.qubits, theta))
            else:
                out.gates.append(g)
        new_index.append(len(out.gates))
        out.regions = {name: (new_index[a], new_index[b]) for name, (a, b) in self.regions.items()}
        return out

    def census(self) -> Counter:
        c = Counter()
        for g in self.gates:
            if g.name in TWO_QUBIT:
                c["cnot"] += 1
            elif g.name in SINGLE_QUBIT:
                c["single"] += 1
            elif g.name in MULTI:
                c["multi_controlled"] += 1
        return c

    def to_text(self) -> str:
        lines = [f"# n_qubits {self.n_qubits}"]
        for name, (a, b) in self.regions.items():
            lines.append(f"# region {name} {a} {b}")
        lines += [g.to_text() for g in self.gates]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GateList":
        n_qubits, gates, regions = None, [], {}
        for line in text.splitlines():
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "#":
                if parts[1:2] == ["n_qubits"]:
                    n_qubits = int(parts[2])
                elif parts[1:2] == ["region"]:
                    regions[parts[2]] = (int(parts[3]), int(parts[4]))
                continue
            name = parts[0]
            if name in _ANGLED:
                gates.append(Gate(name, tuple(map(int, parts[1:-1])), float(parts[-1])))
            else:
                gates.append(Gate(name, tuple(map(int, parts[1:]))))
        if n_qubits is None:
            n_qubits = 1 + max((max(g.qubits) for g in gates if g.qubits), default=0)
        return cls(n_qubits, gates, regions)

    def unitary(self) -> np.ndarray:
        dim = 2 ** self.n_qubits
        return apply_gates(self.gates, np.eye(dim, dtype=complex), self.n_qubits)


def apply_gates(gates: Sequence[Gate], states: np.ndarray, n_qubits: int) -> np.ndarray:
    """Apply gates in time order to the columns of ``states`` (shape ``(2**n, m)``)."""
    if n_qubits > SIM_QUBIT_CAP:
        raise ResourceError(f"{n_qubits} wires exceeds simulator cap {SIM_QUBIT_CAP}")
    m = states.shape[1]
    psi = np.array(states, dtype=complex).reshape((2,) * n_qubits + (m,))
    for g in gates:
        psi = _apply(g, psi)
    return psi.reshape(2 ** n_qubits, m)


def _apply(g: Gate, psi: np.ndarray) -> np.ndarray:
    if g.name == "GPHASE":
        return psi * np.exp(1j * g.angle)
    if g.name in SINGLE_QUBIT:
        q = g.qubits[0]
        psi = np.tensordot(g.matrix(), psi, axes=([1], [q]))
        return np.moveaxis(psi, 0, q)
    if g.name == "CNOT":
        c, t = g.qubits
        psi = psi.copy()
        idx1 = [slice(None)] * psi.ndim
        idx1[c] = 1
        sub = psi[tuple(idx1)]
        t_axis = t if t < c else t - 1
        psi[tuple(idx1)] = np.flip(sub, axis=t_axis)
        return psi
    # MCZ / MCP: phase on the all-ones subspace of the listed wires
    phase = -1.0 if g.name == "MCZ" else np.exp(1j * g.angle)
    psi = psi.copy()
    idx = [slice(None)] * psi.ndim
    for q in g.qubits:
        idx[q] = 1
    psi[tuple(idx)] *= phase
    return psi


def mc_phase_gates(qubits: Sequence[int], theta: float) -> list[Gate]:
    """CNOT + phase-gate circuit for ``diag(1, ..., 1, e^{i theta})`` on ``qubits``.

    Uses the phase-polynomial identity
    ``prod_j x_j = 2^{1-m} sum_{S != {}} (-1)^{|S|+1} parity_S(x)``
    with parities accumulated along Gray-code walks: ``2^m - 1`` phase gates
    and ``2^m - 2`` CNOTs for ``m`` wires.
    """
    m = len(qubits)
    if m == 0:
        raise ValidationError("multi-controlled phase needs at least one wire")
    if m == 1:
        return [Gate("P", (qubits[0],), float(theta))]
    scale = theta * 2.0 ** (1 - m)
    out: list[Gate] = []
    for j in range(m):
        acc = qubits[j]
        prev = 0
        for k in range(2 ** j):
            gray = k ^ (k >> 1)
            diff = gray ^ prev
            if diff:
                b = diff.bit_length() - 1
                out.append(Gate("CNOT", (qubits[b], acc)))
            size = bin(gray).count("1") + 1
            out.append(Gate("P", (acc,), scale * (1 if size % 2 else -1)))
            prev = gray
        if prev:
            b = prev.bit_length() - 1
            out.append(Gate("CNOT", (qubits[b], acc)))
    return out


def controlled_on_state(controls: Sequence[int], bits: Sequence[int]) -> list[Gate]:
    """X gates that map control pattern ``bits`` to all-ones (self-inverse layer)."""
    return [Gate("X", (q,)) for q, b in zip(controls, bits) if not b]
