"""Pauli-word algebra and the two-site Anderson impurity model.

Qubits are labelled 1..n, qubit 1 being the most significant Kronecker
factor.  Under the Jordan-Wigner mapping used here the occupied state of a
mode is |1>, so the annihilation operator on one mode is ``|0><1|``.

The SIAM layout is: qubit 1 impurity spin-up, 2 bath spin-up, 3 impurity
spin-down, 4 bath spin-down.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable

import numpy as np

from .errors import ResourceError, ValidationError

DENSE_QUBIT_CAP = 12
ZERO_TOL = 1e-14

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliTerm:
    coefficient: complex
    word: str

    def __post_init__(self):
        if any(c not in PAULI_MATRICES for c in self.word):
            raise ValidationError(f"invalid Pauli word {self.word!r}")
        object.__setattr__(self, "coefficient", complex(self.coefficient))


class PauliSum:
    """Weighted sum of Pauli words on a fixed number of qubits.

    Construction normalizes the terms: duplicate words are merged by adding
    coefficients (first occurrence fixes the position) and coefficients with
    magnitude below 1e-14 are dropped.

    Parameters
    ----------
    terms : iterable of PauliTerm or (coefficient, word) pairs
    n_qubits : int
        Word length. Required when ``terms`` is empty.
    """

    __slots__ = ("_terms", "_n_qubits")

    def __init__(self, terms: Iterable = (), n_qubits: int | None = None):
        merged: dict[str, complex] = {}
        for t in terms:
            if not isinstance(t, PauliTerm):
                t = PauliTerm(*t)
            if n_qubits is None:
                n_qubits = len(t.word)
            if len(t.word) != n_qubits:
                raise ValidationError(
                    f"word {t.word!r} has length {len(t.word)}, expected {n_qubits}")
            merged[t.word] = merged.get(t.word, 0j) + t.coefficient
        if n_qubits is None or n_qubits < 1:
            raise ValidationError("n_qubits must be a positive integer")
        self._n_qubits = int(n_qubits)
        self._terms = tuple(PauliTerm(c, w) for w, c in merged.items()
                            if abs(c) >= ZERO_TOL)

    @classmethod
    def identity(cls, n_qubits: int, coefficient: complex = 1.0) -> "PauliSum":
        return cls([(coefficient, "I" * n_qubits)], n_qubits)

    @property
    def terms(self) -> tuple[PauliTerm, ...]:
        return self._terms

    @property
    def n_qubits(self) -> int:
        return self._n_qubits

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([t.coefficient for t in self._terms], dtype=complex)

    @property
    def words(self) -> list[str]:
        return [t.word for t in self._terms]

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __repr__(self):
        body = " + ".join(f"({t.coefficient:.6g}){t.word}" for t in self._terms)
        return f"PauliSum({body or '0'}, n_qubits={self._n_qubits})"

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return (self._n_qubits == other._n_qubits
                and dict((t.word, t.coefficient) for t in self._terms)
                == dict((t.word, t.coefficient) for t in other._terms))

    def __hash__(self):
        return hash((self._n_qubits, frozenset((t.word, t.coefficient) for t in self._terms)))

    def _check_compatible(self, other: "PauliSum"):
        if other.n_qubits != self.n_qubits:
            raise ValidationError("qubit counts differ")

    def __add__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        self._check_compatible(other)
        return PauliSum(self._terms + other._terms, self._n_qubits)

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, float, complex, np.number)):
            return NotImplemented
        return PauliSum([(scalar * t.coefficient, t.word) for t in self._terms],
                        self._n_qubits)

    __rmul__ = __mul__

    def dagger(self) -> "PauliSum":
        """Hermitian conjugate; Pauli words are Hermitian so only coefficients change."""
        return PauliSum([(t.coefficient.conjugate(), t.word) for t in self._terms],
                        self._n_qubits)

    def one_norm(self) -> float:
        return float(sum(abs(t.coefficient) for t in self._terms))

    def is_hermitian(self, tol: float = 0.0) -> bool:
        return all(abs(t.coefficient.imag) <= tol for t in self._terms)

    def to_text(self) -> str:
        lines = [f"# n_qubits {self._n_qubits}"]
        lines += [f"{t.coefficient.real!r} {t.coefficient.imag!r} {t.word}" for t in self._terms]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, n_qubits: int | None = None) -> "PauliSum":
        """Parse the ``<re> <im> <word>`` line format; ``#`` starts a comment."""
        terms = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "n_qubits" and n_qubits is None:
                    n_qubits = int(parts[1])
                continue
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValidationError(f"line {lineno}: expected '<re> <im> <word>'")
            try:
                coeff = complex(float(parts[0]), float(parts[1]))
            except ValueError as exc:
                raise ValidationError(f"line {lineno}: {exc}") from None
            terms.append((coeff, parts[2]))
        return cls(terms, n_qubits)


def pauli_word_matrix(word: str) -> np.ndarray:
    return reduce(np.kron, [PAULI_MATRICES[c] for c in word])


def dense_matrix(p: PauliSum, cap: int = DENSE_QUBIT_CAP) -> np.ndarray:
    """Dense 2^n x 2^n realization of a PauliSum."""
    if p.n_qubits > cap:
        raise ResourceError(f"{p.n_qubits} qubits exceeds dense cap {cap}")
    dim = 2 ** p.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for t in p.terms:
        out += t.coefficient * pauli_word_matrix(t.word)
    return out


def single_site_word(n: int, ops: dict[int, str]) -> str:
    """Word with the given 1-based ``{qubit: letter}`` entries, identity elsewhere."""
    return "".join(ops.get(q, "I") for q in range(1, n + 1))


@dataclass(frozen=True)
class SiamParams:
    U: float
    mu: float
    eps2: float
    V: float
    t: float = 1.0

    @classmethod
    def particle_hole(cls, U: float, V: float | None = None, t: float = 1.0) -> "SiamParams":
        """ph-symmetric point ``mu = U/2``, ``eps2 = 0``; ``V=None`` uses the analytic bath value."""
        if V is None:
            V = analytic_bath_V(U)
        return cls(U=U, mu=U / 2, eps2=0.0, V=V, t=t)


@dataclass(frozen=True)
class ComplexFrequency:
    omega: float
    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValidationError("delta must be positive")

    @property
    def z(self) -> complex:
        return complex(self.omega, self.delta)


def siam_hamiltonian(p: SiamParams) -> PauliSum:
    """Qubit Hamiltonian of the two-site SIAM (no constant offset)."""
    U, mu, e2, V = p.U, p.mu, p.eps2, p.V
    w = lambda ops: single_site_word(4, ops)
    terms = [
        (U / 4, w({1: "Z", 3: "Z"})),
        (mu / 2 - U / 4, w({1: "Z"})),
        (mu / 2 - U / 4, w({3: "Z"})),
        (-e2 / 2, w({2: "Z"})),
        (-e2 / 2, w({4: "Z"})),
        (V / 2, w({1: "X", 2: "X"})),
        (V / 2, w({1: "Y", 2: "Y"})),
        (V / 2, w({3: "X", 4: "X"})),
        (V / 2, w({3: "Y", 4: "Y"})),
    ]
    return PauliSum(terms, 4)


def shifted_operators(h: PauliSum, e0: float, z: ComplexFrequency) -> tuple[PauliSum, PauliSum]:
    """Electron and hole operators ``(z - [H-E0])^dag`` and ``(z + [H-E0])^dag``."""
    if not h.is_hermitian():
        raise ValidationError("Hamiltonian must have real coefficients")
    n = h.n_qubits
    zz = z.z
    b_e = PauliSum.identity(n, (zz + e0).conjugate()) - h
    c_h = PauliSum.identity(n, (zz - e0).conjugate()) + h
    return b_e, c_h


_ANNIHILATE = np.array([[0, 1], [0, 0]], dtype=complex)


def jw_ladder(i: int, n: int) -> np.ndarray:
    """Dense Jordan-Wigner annihilation operator for mode ``i`` (1-based) of ``n``."""
    if not 1 <= i <= n:
        raise ValidationError(f"site index {i} out of range 1..{n}")
    if n > DENSE_QUBIT_CAP:
        raise ResourceError(f"{n} qubits exceeds dense cap {DENSE_QUBIT_CAP}")
    factors = [PAULI_MATRICES["Z"]] * (i - 1) + [_ANNIHILATE] + [PAULI_MATRICES["I"]] * (n - i)
    return reduce(np.kron, factors)


@dataclass(frozen=True)
class GroundState:
    energy: float
    vector: np.ndarray
    degeneracy: int = 1


def _fix_phase(v: np.ndarray) -> np.ndarray:
    mags = np.abs(v)
    k = int(np.flatnonzero(mags >= mags.max() * (1 - 1e-10))[0])
    return v * (abs(v[k]) / v[k])


def exact_ground_state(h: PauliSum, degeneracy_tol: float = 1e-9) -> GroundState:
    """Lowest eigenpair of ``dense_matrix(h)``.

    Within a degenerate ground space the returned vector is the normalized
    projection of the lowest-index computational basis state with nonzero
    overlap. The global phase makes the smallest-index entry of maximal
    magnitude real positive.
    """
    if not h.is_hermitian():
        raise ValidationError("Hamiltonian must have real coefficients")
    mat = dense_matrix(h)
    evals, evecs = np.linalg.eigh(mat)
    e0 = float(evals[0])
    ground = evecs[:, np.abs(evals - e0) <= degeneracy_tol * max(1.0, abs(e0))]
    g = ground.shape[1]
    if g == 1:
        vec = ground[:, 0]
    else:
        # projector rows of the ground space, one per basis state
        overlaps = ground @ ground.conj().T
        norms = np.linalg.norm(overlaps, axis=0)
        k = int(np.flatnonzero(norms > 1e-8)[0])
        vec = overlaps[:, k] / norms[k]
    vec = _fix_phase(vec)
    return GroundState(energy=e0, vector=vec / np.linalg.norm(vec), degeneracy=g)


def analytic_bath_V(U: float) -> float:
    """Self-consistent two-site DMFT bath coupling, ``sqrt(1-(U/6)^2)`` below U=6."""
    if U < 0:
        raise ValidationError("U must be non-negative")
    if U >= 6:
        return 0.0
    return math.sqrt(1 - (U / 6) ** 2)


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a @ b - b @ a, 2))


def random_pauli_sum(rng: np.random.Generator, n_qubits: int, n_terms: int,
                     complex_coefficients: bool = True) -> PauliSum:
    """Random PauliSum with distinct words (used by tests and demos)."""
    if n_qubits < 1 or n_terms < 1:
        raise ValidationError("need at least one qubit and one term")
    n_terms = min(n_terms, 4 ** n_qubits)
    words: list[str] = []
    seen = set()
    while len(words) < n_terms:
        w = "".join(rng.choice(list("IXYZ"), size=n_qubits))
        if w not in seen:
            seen.add(w)
            words.append(w)
    coeffs = rng.normal(size=n_terms)
    if complex_coefficients:
        coeffs = coeffs + 1j * rng.normal(size=n_terms)
    return PauliSum(list(zip(coeffs, words)), n_qubits)

