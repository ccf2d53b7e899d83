"""LCU block encoding of a PauliSum.

``A = sum_i c_i P_i`` is encoded as ``(PREP^dag x I) SELECT (PREP x I)``:
PREP loads ``sqrt(|c_i| / ||A||_1)`` on a ``ceil(log2 k)``-qubit prep register
and SELECT applies the phase-absorbed word ``(c_i/|c_i|) P_i`` on branch ``|i>``.
The prep register occupies wires ``0..n_prep-1`` (most significant), the
system register the remaining wires.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuits import (SMALL_MC_LIMIT, Gate, GateList, controlled_on_state)
from .errors import ResourceError, ValidationError
from .pauli import DENSE_QUBIT_CAP, PauliSum, pauli_word_matrix


def n_prep_qubits(k: int) -> int:
    return 0 if k <= 1 else math.ceil(math.log2(k))


def _uniformly_controlled_ry(controls: Sequence[int], target: int,
                             angles: np.ndarray) -> list[Gate]:
    """Multiplexed R_y: angle ``angles[p]`` when the controls read ``p`` (first control = MSB)."""
    l = len(controls)
    if l == 0:
        return [Gate("RY", (target,), float(angles[0]))]
    size = 2 ** l
    gray = [i ^ (i >> 1) for i in range(size)]
    signs = np.array([[(-1) ** bin(p & g).count("1") for g in gray] for p in range(size)])
    thetas = signs.T @ angles / size
    out = []
    for i in range(size):
        out.append(Gate("RY", (target,), float(thetas[i])))
        diff = gray[i] ^ gray[(i + 1) % size]
        bit = diff.bit_length() - 1
        out.append(Gate("CNOT", (controls[l - 1 - bit], target)))
    return out


def prep_state(weights: Sequence[float]) -> tuple[np.ndarray, GateList]:
    """State-preparation unitary whose first column is ``sqrt(w_i / sum w)``.

    Built from a cascade of multiplexed R_y rotations, one level per prep
    qubit. Returns the dense unitary together with its gate list.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or len(w) == 0 or np.any(w < 0) or not np.any(w > 0):
        raise ValidationError("weights must be non-negative with at least one positive entry")
    n = n_prep_qubits(len(w))
    gl = GateList(n)
    if n == 0:
        return np.eye(1, dtype=complex), gl
    amps = np.zeros(2 ** n)
    amps[: len(w)] = np.sqrt(w / w.sum())
    for level in range(n):
        # subtree norms below each prefix of length `level`
        blocks = amps.reshape(2 ** level, 2, 2 ** (n - level - 1))
        norms = np.linalg.norm(blocks, axis=2)
        angles = 2 * np.arctan2(norms[:, 1], norms[:, 0])
        gl.extend(_uniformly_controlled_ry(list(range(level)), level, angles))
    return gl.unitary(), gl


def branch_phases(a: PauliSum) -> np.ndarray:
    c = a.coefficients
    return c / np.abs(c)


def select_unitary(a: PauliSum) -> np.ndarray:
    """Block-diagonal ``sum_i |i><i| x (c_i/|c_i|) P_i``; unused branches carry identity."""
    if len(a) == 0:
        raise ValidationError("empty PauliSum")
    n_p = n_prep_qubits(len(a))
    dim_s = 2 ** a.n_qubits
    out = np.zeros((2 ** n_p * dim_s,) * 2, dtype=complex)
    phases = branch_phases(a)
    for i in range(2 ** n_p):
        block = slice(i * dim_s, (i + 1) * dim_s)
        if i < len(a):
            out[block, block] = phases[i] * pauli_word_matrix(a.terms[i].word)
        else:
            out[block, block] = np.eye(dim_s)
    return out


def decompose_mc_pauli(phase_k: int, word: str, n_c: int) -> GateList:
    """Gates for ``|1..1><1..1| x (i^k P) + (rest) x I`` with ``n_c`` controls.

    Wires ``0..n_c-1`` are controls and ``n_c..`` carry ``word``. The word is
    rotated to a Z-string with {S^dag, H}, its parity is collected on a pivot
    by a CNOT chain, the controlled ``i^k Z`` acts on the pivot, then
    everything is undone. ``-Z = XZX`` gives k=2 and ``R_z(-+pi) = +-iZ``
    gives k=1,3.
    """
    if phase_k not in (0, 1, 2, 3):
        raise ValidationError("phase_k must be 0, 1, 2 or 3")
    if set(word) <= {"I"}:
        raise ValidationError("identity word: use a controlled phase instead")
    if n_c < 0:
        raise ValidationError("n_c must be non-negative")
    controls = list(range(n_c))
    sys = [n_c + j for j, c in enumerate(word) if c != "I"]
    gl = GateList(n_c + len(word))

    basis = []
    for j, c in enumerate(word):
        q = n_c + j
        if c == "X":
            basis.append(Gate("H", (q,)))
        elif c == "Y":
            basis += [Gate("SDG", (q,)), Gate("H", (q,))]
    ladder = [Gate("CNOT", (sys[j], sys[j + 1])) for j in range(len(sys) - 1)]
    pivot = sys[-1]

    core: list[Gate] = []
    mcz = [Gate("MCZ", tuple(controls) + (pivot,))] if n_c else [Gate("Z", (pivot,))]
    if phase_k == 0:
        core = mcz
    elif phase_k == 2:
        core = [Gate("X", (pivot,)), *mcz, Gate("X", (pivot,))]
    else:
        theta = -np.pi if phase_k == 1 else np.pi
        if n_c == 0:
            core = [Gate("RZ", (pivot,), theta)]
        else:
            mcx = [Gate("H", (pivot,)), Gate("MCZ", tuple(controls) + (pivot,)),
                   Gate("H", (pivot,))]
            core = [*mcx, Gate("RZ", (pivot,), -theta / 2), *mcx,
                    Gate("RZ", (pivot,), theta / 2)]

    gl.extend(basis)
    gl.extend(ladder)
    gl.extend(core)
    gl.extend(g.inverse() for g in reversed(ladder))
    gl.extend(g.inverse() for g in reversed(basis))
    return gl


def _phase_split(phase: complex) -> tuple[int, float]:
    """Split ``e^{i theta}`` into ``i^k`` and a residual angle in (-pi/4, pi/4]."""
    theta = float(np.angle(phase))
    k = int(np.round(theta / (np.pi / 2))) % 4
    residual = theta - k * np.pi / 2
    residual = (residual + np.pi) % (2 * np.pi) - np.pi
    if abs(residual) < 1e-15:
        residual = 0.0
    return k, residual


def _branch_gates(a: PauliSum, i: int) -> list[Gate]:
    """SELECT gates for branch ``i``: X layer, controlled phased word, residual phase, X layer."""
    n_p = n_prep_qubits(len(a))
    prep_wires = list(range(n_p))
    term = a.terms[i]
    phase = branch_phases(a)[i]
    bits = [(i >> (n_p - 1 - r)) & 1 for r in range(n_p)]
    flips = controlled_on_state(prep_wires, bits)
    k, residual = _phase_split(phase)
    body: list[Gate] = []
    if set(term.word) <= {"I"}:
        residual = float(np.angle(phase))
    else:
        body.extend(decompose_mc_pauli(k, term.word, n_p).gates)
    if residual:
        body.append(Gate("MCP", tuple(prep_wires), residual) if n_p
                    else Gate("GPHASE", (), residual))
    return flips + body + flips


def select_gates(a: PauliSum) -> GateList:
    """Gate-level SELECT over prep wires ``0..n_prep-1`` and system wires after them."""
    gl = GateList(n_prep_qubits(len(a)) + a.n_qubits)
    for i in range(len(a)):
        gl.extend(_branch_gates(a, i))
    return gl


@dataclass
class BlockEncoding:
    """An ``(one_norm, n_prep, 0)`` block encoding over prep x system wires."""

    n_sys: int
    n_prep: int
    one_norm: float
    unitary: np.ndarray
    realization: GateList | None = None
    source: PauliSum | None = None

    @classmethod
    def from_unitary(cls, unitary: np.ndarray, n_prep: int, one_norm: float = 1.0) -> "BlockEncoding":
        """Wrap an arbitrary unitary whose top-left block encodes ``A / one_norm``."""
        unitary = np.asarray(unitary, dtype=complex)
        total = int(round(math.log2(unitary.shape[0])))
        if unitary.shape != (2 ** total, 2 ** total) or total < n_prep:
            raise ValidationError("unitary dimension does not match the register sizes")
        return cls(n_sys=total - n_prep, n_prep=n_prep, one_norm=float(one_norm), unitary=unitary)

    @property
    def dim_sys(self) -> int:
        return 2 ** self.n_sys

    def block(self) -> np.ndarray:
        """Top-left block, i.e. ``A / one_norm``."""
        return self.unitary[: self.dim_sys, : self.dim_sys]

    def success_probability(self, psi: np.ndarray) -> float:
        """Probability of the all-zero prep outcome for system input ``psi``."""
        psi = np.asarray(psi, dtype=complex)
        out = self.unitary[:, : self.dim_sys] @ (psi / np.linalg.norm(psi))
        return float(np.linalg.norm(out[: self.dim_sys]) ** 2)


def block_encode(a: PauliSum, order: Sequence[int] | None = None,
                 realize: bool = False) -> BlockEncoding:
    """LCU block encoding of ``a``; ``order`` permutes the SELECT branches."""
    if len(a) == 0:
        raise ValidationError("cannot block encode an empty PauliSum")
    if a.n_qubits + n_prep_qubits(len(a)) > DENSE_QUBIT_CAP:
        raise ResourceError(f"encoding needs more than {DENSE_QUBIT_CAP} wires for a dense unitary")
    if order is not None:
        if sorted(order) != list(range(len(a))):
            raise ValidationError("order must be a permutation of the term indices")
        a = PauliSum([a.terms[i] for i in order], a.n_qubits)
    prep, prep_gl = prep_state(np.abs(a.coefficients))
    eye_s = np.eye(2 ** a.n_qubits)
    prep_full = np.kron(prep, eye_s)
    unitary = prep_full.conj().T @ select_unitary(a) @ prep_full
    n_p = n_prep_qubits(len(a))
    realization = None
    if realize:
        realization = encoding_circuit(a, prep_gl)
    return BlockEncoding(n_sys=a.n_qubits, n_prep=n_p, one_norm=a.one_norm(),
                         unitary=unitary, realization=realization, source=a)


def encoding_circuit(a: PauliSum, prep_gl: GateList | None = None) -> GateList:
    """Full PREP, SELECT, PREP^dag gate list with named regions."""
    if prep_gl is None:
        _, prep_gl = prep_state(np.abs(a.coefficients))
    n_p = n_prep_qubits(len(a))
    total = n_p + a.n_qubits
    gl = GateList(total)
    prep = GateList(total, list(prep_gl.gates))
    gl.add_region("prep", prep.gates)
    gl.add_region("select", select_gates(a).gates)
    gl.add_region("prep_dagger", prep.inverse().gates)
    return gl


@dataclass
class CountReport:
    """Gate census per circuit region plus the asymptotic scaling tags."""

    n_terms: int
    n_prep: int
    n_sys: int
    prep: dict = field(default_factory=dict)
    select: dict = field(default_factory=dict)
    prep_dagger: dict = field(default_factory=dict)
    per_term_select: list = field(default_factory=list)
    formulas: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n_terms": self.n_terms, "n_prep": self.n_prep, "n_sys": self.n_sys,
            "prep": self.prep, "select": self.select, "prep_dagger": self.prep_dagger,
            "per_term_select": self.per_term_select, "formulas": self.formulas,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


SCALING_FORMULAS = {
    "prep": "O(2^n_prep) = O(|A|)",
    "mc_z_small": "O(2^n_c) for n_c <= 6",
    "mc_z_large": "O(n_c^2) for n_c > 6",
    "mc_pauli": "O(n_c^2 + n_s)",
    "select": "O(|A| (ceil(log2 |A|)^2 + n_s))",
}


def _counts(gates) -> dict:
    c = GateList(0, list(gates)).census()
    return {"cnot": c["cnot"], "single": c["single"],
            "multi_controlled": c["multi_controlled"]}


def gate_counts(a: PauliSum, limit: int = SMALL_MC_LIMIT) -> CountReport:
    """Exact CNOT / single-qubit census of the emitted encoding circuit.

    Multi-controlled primitives with at most ``limit`` controls are expanded
    with the Gray-code construction; larger ones stay as primitives and are
    reported under ``multi_controlled``.
    """
    if len(a) == 0:
        raise ValidationError("empty PauliSum")
    gl = encoding_circuit(a).expanded(limit)
    per_term = []
    for i, term in enumerate(a.terms):
        branch = GateList(gl.n_qubits, _branch_gates(a, i)).expanded(limit)
        per_term.append({"word": term.word, **_counts(branch.gates)})
    return CountReport(
        n_terms=len(a), n_prep=n_prep_qubits(len(a)), n_sys=a.n_qubits,
        prep=_counts(gl.region("prep")), select=_counts(gl.region("select")),
        prep_dagger=_counts(gl.region("prep_dagger")),
        per_term_select=per_term, formulas=dict(SCALING_FORMULAS),
    )
