"""Odd-degree QSVT assembly and matrix inversion by block extraction.

Wire layout of a QSVT circuit: wire 0 is the QSP qubit, then the prep
register, then the system register (most significant first).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import chebyshev as cheb

from .circuits import Gate, GateList, apply_gates
from .errors import SingularValueWarning, ValidationError
from .lcu import BlockEncoding, block_encode
from .pauli import PauliSum, dense_matrix
from .qsp import DEFAULT_EPS, PhaseVector, inverse_phases, inverse_poly, to_qsvt_phases

MODES = ("ideal", "circuit")


@dataclass(frozen=True)
class ProjectorPhase:
    """``e^{-i phi Z}`` on the QSP qubit, flipped when the prep register is all-zero.

    On the QSP ``|0>`` branch this acts as ``exp(i phi (2 Pi - I))`` with
    ``Pi`` the all-zero prep projector.
    """

    angle: float
    n_prep: int

    def gates(self) -> list[Gate]:
        prep = list(range(1, self.n_prep + 1))
        flip = [Gate("X", (q,)) for q in prep]
        if prep:
            cx = flip + [Gate("H", (0,)), Gate("MCZ", (*prep, 0)), Gate("H", (0,))] + flip
        else:
            cx = [Gate("X", (0,))]
        return cx + [Gate("RZ", (0,), 2 * self.angle)] + cx

    def matrix(self) -> np.ndarray:
        return GateList(self.n_prep + 1, self.gates()).unitary()

    def diagonal(self) -> np.ndarray:
        """Diagonal of :meth:`matrix` (it is diagonal by construction)."""
        d = 2 ** self.n_prep
        zero = np.zeros(d, dtype=bool)
        zero[0] = True
        up = np.where(zero, np.exp(1j * self.angle), np.exp(-1j * self.angle))
        return np.concatenate([up, up.conj()])


@dataclass
class QsvtCircuit:
    """``H . Pi(phi'_0) B Pi(phi'_1) B^dag ... Pi(phi'_{d-1}) B . H`` for odd ``d``."""

    encoding: BlockEncoding
    phases: PhaseVector

    @property
    def degree(self) -> int:
        return self.phases.degree

    @property
    def n_qubits(self) -> int:
        return 1 + self.encoding.n_prep + self.encoding.n_sys

    def _dense_apply(self, states: np.ndarray) -> np.ndarray:
        """Apply the operator to columns ``states`` using dense factors."""
        b = self.encoding.unitary
        dim = b.shape[0]
        m = states.shape[1]
        psi = states.reshape(2, dim, m)
        diag_cache = {}

        def proj(phi):
            if phi not in diag_cache:
                dg = ProjectorPhase(phi, self.encoding.n_prep).diagonal()
                # broadcast the prep-only diagonal over the system register
                diag_cache[phi] = np.repeat(dg.reshape(2, -1), self.encoding.dim_sys, axis=1)
            return diag_cache[phi]

        psi = _hadamard0(psi)
        angles = self.phases.angles
        bd = b.conj().T
        for k in range(self.degree - 1, -1, -1):
            factor = b if (self.degree - 1 - k) % 2 == 0 else bd
            psi = np.einsum("ij,sjm->sim", factor, psi)
            psi = psi * proj(float(angles[k]))[:, :, None]
        psi = _hadamard0(psi)
        return psi.reshape(2 * dim, m)

    def gate_list(self) -> GateList:
        """Gate-level circuit; requires a realized encoding."""
        enc = self.encoding
        if enc.realization is None:
            raise ValidationError("encoding has no gate-level realization")
        fwd = enc.realization.shifted(1, self.n_qubits)
        bwd = fwd.inverse()
        gl = GateList(self.n_qubits)
        gl.append("H", (0,))
        for k in range(self.degree - 1, -1, -1):
            gl.extend((fwd if (self.degree - 1 - k) % 2 == 0 else bwd).gates)
            gl.extend(ProjectorPhase(float(self.phases.angles[k]), enc.n_prep).gates())
        gl.append("H", (0,))
        return gl

    def apply(self, states: np.ndarray, backend: str = "dense") -> np.ndarray:
        if backend == "dense":
            return self._dense_apply(np.asarray(states, dtype=complex))
        if backend == "gates":
            return apply_gates(self.gate_list().gates, states, self.n_qubits)
        raise ValidationError(f"unknown backend {backend!r}")

    @cached_property
    def unitary(self) -> np.ndarray:
        dim = 2 ** self.n_qubits
        return self.apply(np.eye(dim, dtype=complex))


def _hadamard0(psi: np.ndarray) -> np.ndarray:
    return np.stack([psi[0] + psi[1], psi[0] - psi[1]]) / math.sqrt(2)


def build_qsvt(encoding: BlockEncoding, phases: PhaseVector) -> QsvtCircuit:
    """Assemble the odd-degree QSVT operator (the full unitary is built lazily)."""
    if phases.convention != "qsvt":
        raise ValidationError("build_qsvt needs QSVT-convention phases")
    if phases.degree % 2 == 0:
        raise ValidationError("only odd-degree QSVT sequences are supported")
    return QsvtCircuit(encoding, phases)


def extract_block(c: QsvtCircuit, backend: str = "dense") -> np.ndarray:
    """Post-selected block: QSP qubit and prep register all-zero on both sides."""
    ds = c.encoding.dim_sys
    states = np.zeros((2 ** c.n_qubits, ds), dtype=complex)
    states[:ds, :ds] = np.eye(ds)
    return c.apply(states, backend)[:ds, :]


def singular_transform(block: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """``W p(S) V^dag`` for ``block = W S V^dag`` and Chebyshev series ``p``."""
    w, s, vh = np.linalg.svd(block)
    return (w * cheb.chebval(s, coeffs)) @ vh


# ---------------------------------------------------------------------------
# inversion

@dataclass
class InverseResult:
    """Approximate inverse plus its bookkeeping.

    ``matrix = scale * block`` with ``scale = C / one_norm``.
    """

    matrix: np.ndarray
    scale: float
    one_norm: float
    sigma_min: float
    kappa: float
    degree: int
    mode: str
    poly_error: float
    phase_residual: float = float("nan")
    warning: SingularValueWarning | None = None


def apply_inverse(m: PauliSum, kappa: float, eps: float = DEFAULT_EPS, mode: str = "ideal",
                  phases: PhaseVector | None = None, backend: str = "dense") -> InverseResult:
    """Approximate ``dense(m)^{-1}`` by QSVT on the block encoding of ``m^dag``.

    In ``ideal`` mode the odd polynomial is applied exactly to the singular
    values of the encoded block; ``circuit`` mode simulates the phase
    sequence.  Singular values below ``1/kappa`` produce a warning attached to
    the result rather than an exception.
    """
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}")
    adj = m.dagger()
    enc = block_encode(adj, realize=(backend == "gates"))
    blk = enc.block()
    sigma_min = float(np.linalg.svd(blk, compute_uv=False).min())
    resid = float("nan")
    if mode == "ideal":
        poly = inverse_poly(kappa, eps)
        out = singular_transform(blk, poly.cheb_coeffs)
        c_norm, degree, poly_err = poly.norm_constant, poly.degree, poly.achieved_eps
    else:
        if phases is None:
            phases = inverse_phases(float(kappa), float(eps))
        c_norm, degree, poly_err = phases.norm_constant, phases.degree, float("nan")
        if not math.isfinite(c_norm):
            poly = inverse_poly(kappa, eps)
            c_norm, poly_err = poly.norm_constant, poly.achieved_eps
        resid = phases.residual
        if phases.convention == "qsp":
            phases = to_qsvt_phases(phases)
        out = extract_block(build_qsvt(enc, phases), backend)
    warn = None
    if sigma_min < 1.0 / kappa:
        warn = SingularValueWarning(
            f"normalized singular value {sigma_min:.4g} below 1/kappa = {1 / kappa:.4g}")
    scale = c_norm / enc.one_norm
    return InverseResult(matrix=scale * out, scale=scale, one_norm=enc.one_norm,
                         sigma_min=sigma_min, kappa=float(kappa), degree=degree, mode=mode,
                         poly_error=poly_err, phase_residual=resid, warning=warn)


# ---------------------------------------------------------------------------
# singular-value floor

@dataclass
class SingularReport:
    sigma_min_true: float
    sigma_min_bound: float
    l_value: float
    frobenius: float
    one_norm: float
    recommended_kappa: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def singular_floor(m, one_norm: float | None = None) -> SingularReport:
    """Determinant/Frobenius lower bound on the smallest singular value.

    ``l = |det M| ((n-1)/|M|_F^2)^{(n-1)/2}`` and the bound is
    ``|det M| ((n-1)/(|M|_F^2 - l^2))^{(n-1)/2}``.  ``recommended_kappa`` is
    ``one_norm / bound`` (the 1-norm defaults to the PauliSum 1-norm when ``m``
    is a PauliSum, else to 1).
    """
    if isinstance(m, PauliSum):
        if one_norm is None:
            one_norm = m.one_norm()
        m = dense_matrix(m)
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError("singular_floor needs a square matrix")
    one_norm = 1.0 if one_norm is None else float(one_norm)
    n = m.shape[0]
    sign, logdet = np.linalg.slogdet(m)
    if sign == 0 or not np.isfinite(logdet):
        raise ValidationError("matrix is singular; the bound is undefined")
    fro2 = float(np.sum(np.abs(m) ** 2))
    if n == 1:
        l_val = bound = math.exp(logdet)
    else:
        k = (n - 1) / 2
        l_val = math.exp(logdet + k * (math.log(n - 1) - math.log(fro2)))
        gap = fro2 - l_val ** 2
        bound = math.exp(logdet + k * (math.log(n - 1) - math.log(gap))) if gap > 0 else 0.0
    true = float(np.linalg.svd(m, compute_uv=False).min())
    rec = one_norm / bound if bound > 0 else math.inf
    return SingularReport(true, bound, l_val, math.sqrt(fro2), one_norm, rec)


def frequency_record(omega: float | None, delta: float | None, result: InverseResult,
                     report: SingularReport | None = None,
                     oracle: np.ndarray | None = None) -> dict:
    """JSON-ready per-frequency summary of an inversion."""
    bound = None
    if report is not None:
        bound = report.sigma_min_bound / report.one_norm
    err = None if oracle is None else float(np.max(np.abs(result.matrix - oracle)))
    return {"omega": None if omega is None else float(omega),
            "delta": None if delta is None else float(delta), "sigma_min_true": result.sigma_min,
            "sigma_min_bound": bound, "kappa": result.kappa, "degree": result.degree,
            "mode": result.mode, "max_inverse_error_if_oracle": err}


def records_to_json(records: list[dict], header: dict | None = None) -> str:
    return json.dumps({"config": header or {}, "results": records}, indent=2)
