"""Green's functions, spectral functions, self-energies and the two-site DMFT loop."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, ValidationError
from .pauli import (ComplexFrequency, GroundState, PauliSum, SiamParams, dense_matrix,
                    exact_ground_state, jw_ladder, shifted_operators, siam_hamiltonian)
from .qsp import DEFAULT_EPS, inverse_phases, inverse_poly
from .qsvt import InverseResult, apply_inverse

SOLVER_KINDS = ("classical", "ideal", "circuit")
DEFAULT_OMEGAS = (-10.0, 10.0, 401)
DEFAULT_DELTA = 0.1
IMPURITY_SITES = {"up": 1, "down": 3}


@dataclass(frozen=True)
class Solver:
    """How the shifted operators are inverted.

    ``classical`` uses direct dense inversion; ``ideal`` and ``circuit`` go
    through :func:`apply_inverse` with the given ``kappa`` and ``eps``.
    """

    kind: str = "classical"
    kappa: float = 50.0
    eps: float = DEFAULT_EPS
    backend: str = "dense"

    def __post_init__(self):
        if self.kind not in SOLVER_KINDS:
            raise ValidationError(f"solver kind must be one of {SOLVER_KINDS}")
        if not self.kappa >= 1:
            raise ValidationError("kappa must be >= 1")

    def prepare(self):
        """Build (and cache) the polynomial and phases before any parallel work."""
        if self.kind != "classical":
            inverse_poly(self.kappa, self.eps)
        if self.kind == "circuit":
            inverse_phases(float(self.kappa), float(self.eps))
        return self

    @property
    def tag(self) -> str:
        return "classical" if self.kind == "classical" else f"qsvt-{self.kind}"

    def invert(self, m: PauliSum) -> InverseResult:
        if self.kind != "classical":
            return apply_inverse(m, self.kappa, self.eps, mode=self.kind, backend=self.backend)
        mat = dense_matrix(m)
        norm = m.one_norm()
        sig = float(np.linalg.svd(mat / norm, compute_uv=False).min())
        return InverseResult(matrix=np.linalg.inv(mat), scale=1.0, one_norm=norm, sigma_min=sig,
                             kappa=math.inf, degree=0, mode="classical", poly_error=0.0)


CLASSICAL = Solver("classical")


@dataclass
class GreensResult:
    z: ComplexFrequency
    G: np.ndarray
    sigma_min_e: float
    sigma_min_h: float
    solver: str
    warnings: list = field(default_factory=list)

    @property
    def A_omega(self) -> float:
        return spectral_function(self)

    @property
    def sigma_min(self) -> float:
        return min(self.sigma_min_e, self.sigma_min_h)


@lru_cache(maxsize=8)
def _ladders(n: int) -> tuple[np.ndarray, ...]:
    return tuple(jw_ladder(i, n) for i in range(1, n + 1))


def greens_matrix(h: PauliSum, gs: GroundState, z: ComplexFrequency,
                  solver: Solver = CLASSICAL) -> GreensResult:
    """``G_ij = <a_i T a_j^dag> + <a_j^dag W a_i>`` with T, W from ``solver``.

    ``T`` inverts ``z - (H - E0)`` and ``W`` inverts ``z + (H - E0)``; the
    solver receives these operators and block-encodes their adjoints.
    """
    n = h.n_qubits
    b_e, c_h = shifted_operators(h, gs.energy, z)
    t_res = solver.invert(b_e.dagger())
    w_res = solver.invert(c_h.dagger())
    psi = gs.vector
    ladders = _ladders(n)
    added = np.stack([a.conj().T @ psi for a in ladders], axis=1)      # a_j^dag |psi>
    removed = np.stack([a @ psi for a in ladders], axis=1)             # a_i |psi>
    g_e = added.conj().T @ t_res.matrix @ added
    g_h = (removed.conj().T @ w_res.matrix @ removed).T
    warns = [r.warning for r in (t_res, w_res) if r.warning is not None]
    return GreensResult(z, g_e + g_h, t_res.sigma_min, w_res.sigma_min, solver.tag, warns)


def spectral_function(g) -> float:
    """``-(1/pi) Tr Im G``; accepts a GreensResult or a bare matrix."""
    mat = g.G if isinstance(g, GreensResult) else np.asarray(g)
    return float(-np.trace(mat).imag / math.pi)


def impurity_greens(g: GreensResult, spin: str = "up") -> complex:
    """Impurity element of G (qubit 1 for spin up, qubit 3 for spin down)."""
    if g.G.shape != (4, 4):
        raise ValidationError("impurity_greens expects the 4-qubit SIAM layout")
    k = IMPURITY_SITES[spin] - 1
    return complex(g.G[k, k])


def noninteracting_greens(z: complex, p: SiamParams) -> complex:
    return 1.0 / (z + p.mu - abs(p.V) ** 2 / z)


def self_energy(g_imp: complex, z, p: SiamParams) -> complex:
    """Dyson self-energy ``1/G0(z) - 1/G(z)`` with ``G0 = 1/(z + mu - V^2/z)``."""
    zc = z.z if isinstance(z, ComplexFrequency) else complex(z)
    if g_imp == 0:
        raise ValidationError("impurity Green's function vanishes; self-energy undefined")
    return (zc + p.mu - abs(p.V) ** 2 / zc) - 1.0 / g_imp


def quasiparticle_weight(sigma_at_idelta: complex, delta: float) -> float:
    """``1 / (1 - Im Sigma(i delta) / delta)``."""
    if not delta > 0:
        raise ValidationError("delta must be positive")
    denom = 1.0 - complex(sigma_at_idelta).imag / delta
    if denom == 0:
        raise ValidationError("Im Sigma equals delta; quasiparticle weight diverges")
    return 1.0 / denom


# ---------------------------------------------------------------------------
# DMFT

@dataclass
class DmftState:
    U: float
    V: float
    iterations: int
    z_qp: float
    sigma_imp: complex
    converged: bool
    zeta: float
    trajectory: list = field(default_factory=list)


def dmft_step(U: float, V: float, solver: Solver = CLASSICAL,
              delta: float = DEFAULT_DELTA) -> tuple[float, complex, float]:
    """One self-consistency update; returns ``(V_new, Sigma(i delta), z_qp)``."""
    p = SiamParams.particle_hole(U, V)
    h = siam_hamiltonian(p)
    gs = exact_ground_state(h)
    z = ComplexFrequency(0.0, delta)
    g = greens_matrix(h, gs, z, solver)
    sig = self_energy(impurity_greens(g), z, p)
    zqp = quasiparticle_weight(sig, delta)
    return math.sqrt(max(zqp, 0.0)), sig, zqp


def dmft_loop(U: float, zeta: float = 1e-3, v_init: float = 0.5, solver: Solver = CLASSICAL,
              delta: float = DEFAULT_DELTA, max_iter: int = 500) -> DmftState:
    """Iterate ``V <- sqrt(z_qp(V))`` until ``|V_new - V| <= zeta``.

    Raises
    ------
    ConvergenceError
        After ``max_iter`` updates; ``trajectory`` holds the V sequence.
    """
    if not zeta > 0 or not v_init > 0:
        raise ValidationError("zeta and v_init must be positive")
    v = float(v_init)
    traj = [v]
    for it in range(1, max_iter + 1):
        v_new, sig, zqp = dmft_step(U, v, solver, delta)
        traj.append(v_new)
        if abs(v_new - v) <= zeta:
            return DmftState(U, v_new, it, zqp, sig, True, zeta, traj)
        v = v_new
    raise ConvergenceError(f"DMFT did not converge in {max_iter} iterations",
                           residual=abs(traj[-1] - traj[-2]), trajectory=traj)


# ---------------------------------------------------------------------------
# Bethe lattice

def bethe_dos(omega, sigma, p: SiamParams, interpretation: str = "real"):
    """Interacting Bethe-lattice DOS ``rho0(omega + mu - Sigma(omega))``.

    ``interpretation="real"`` evaluates the semicircle at the real part of the
    shifted argument (zero outside the band); ``"complex"`` takes the real
    part of the principal complex square root.
    """
    t = p.t
    if not t > 0:
        raise ValidationError("hopping t must be positive")
    x = np.asarray(omega) + p.mu - np.asarray(sigma)
    if interpretation == "real":
        xr = np.real(x)
        out = np.sqrt(np.clip(4 * t * t - xr ** 2, 0.0, None)) / (2 * math.pi * t * t)
    elif interpretation == "complex":
        out = np.real(np.sqrt((4 * t * t - x ** 2).astype(complex))) / (2 * math.pi * t * t)
    else:
        raise ValidationError("interpretation must be 'real' or 'complex'")
    return float(out) if np.ndim(out) == 0 else out


def semicircle(x, t: float = 1.0):
    x = np.asarray(x, dtype=float)
    return np.sqrt(np.clip(4 * t * t - x ** 2, 0.0, None)) / (2 * math.pi * t * t)


# ---------------------------------------------------------------------------
# scans

def omega_grid(lo: float = DEFAULT_OMEGAS[0], hi: float = DEFAULT_OMEGAS[1],
               n: int = DEFAULT_OMEGAS[2]) -> np.ndarray:
    return np.linspace(lo, hi, int(n))


def _pmap(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


@dataclass
class SpectralScan:
    omega: np.ndarray
    A_true: np.ndarray
    A_qsvt: np.ndarray
    sigma_min_e: np.ndarray
    sigma_min_h: np.ndarray
    kappa: float
    flagged: np.ndarray

    @property
    def abs_err(self) -> np.ndarray:
        return np.abs(self.A_qsvt - self.A_true)

    @property
    def sigma_min(self) -> np.ndarray:
        return np.minimum(self.sigma_min_e, self.sigma_min_h)

    def to_csv(self, header: str = "") -> str:
        buf = io.StringIO()
        if header:
            buf.write("".join(f"# {ln}\n" for ln in header.splitlines()))
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["omega", "A_true", "A_qsvt", "abs_err", "sigma_min_e", "sigma_min_h",
                     "kappa_line"])
        kl = 1.0 / self.kappa if math.isfinite(self.kappa) else 0.0
        for row in zip(self.omega, self.A_true, self.A_qsvt, self.abs_err, self.sigma_min_e,
                       self.sigma_min_h):
            wr.writerow([repr(float(v)) for v in row] + [repr(kl)])
        return buf.getvalue()


def spectral_scan(p: SiamParams, omegas=None, delta: float = DEFAULT_DELTA,
                  solver: Solver = CLASSICAL, threads: int = 1) -> SpectralScan:
    """A(omega) from the classical oracle and from ``solver`` over a frequency grid."""
    omegas = omega_grid() if omegas is None else np.asarray(omegas, dtype=float)
    h = siam_hamiltonian(p)
    gs = exact_ground_state(h)
    solver.prepare()

    def one(w):
        z = ComplexFrequency(float(w), delta)
        ref = greens_matrix(h, gs, z, CLASSICAL)
        got = ref if solver.kind == "classical" else greens_matrix(h, gs, z, solver)
        return ref.A_omega, got.A_omega, ref.sigma_min_e, ref.sigma_min_h, bool(got.warnings)

    rows = _pmap(one, omegas, threads)
    cols = list(zip(*rows)) if rows else [()] * 5
    return SpectralScan(omegas, np.array(cols[0]), np.array(cols[1]), np.array(cols[2]),
                        np.array(cols[3]),
                        solver.kappa if solver.kind != "classical" else math.inf,
                        np.array(cols[4], dtype=bool))


def spin_self_energies(h: PauliSum, gs: GroundState, p: SiamParams, z: ComplexFrequency,
                       solver: Solver = CLASSICAL) -> tuple[complex, complex]:
    g = greens_matrix(h, gs, z, solver)
    return (self_energy(impurity_greens(g, "up"), z, p),
            self_energy(impurity_greens(g, "down"), z, p))


def lattice_dos(omegas, sig_up, sig_dn, p: SiamParams, interpretation: str = "real",
                combine: str = "dos"):
    """Combine per-spin self-energies into one DOS.

    ``combine="dos"`` averages the two per-spin densities; ``"sigma"``
    evaluates the density at the spin-averaged self-energy.
    """
    if combine == "dos":
        return 0.5 * (bethe_dos(omegas, sig_up, p, interpretation)
                      + bethe_dos(omegas, sig_dn, p, interpretation))
    if combine == "sigma":
        return bethe_dos(omegas, 0.5 * (np.asarray(sig_up) + np.asarray(sig_dn)), p, interpretation)
    raise ValidationError("combine must be 'dos' or 'sigma'")


@dataclass
class MottCurve:
    U: float
    V: float
    omega: np.ndarray
    rho_true: np.ndarray
    rho_qsvt: np.ndarray
    sigma_true: np.ndarray
    sigma_qsvt: np.ndarray

    @property
    def abs_err(self) -> np.ndarray:
        return np.abs(self.rho_qsvt - self.rho_true)


def mott_scan(pairs, solver: Solver = CLASSICAL, omegas=None, delta: float = DEFAULT_DELTA,
              interpretation: str = "real", combine: str = "dos",
              threads: int = 1) -> list[MottCurve]:
    """Bethe-lattice DOS for each ``(U, V)`` pair, oracle and ``solver`` side by side.

    ``sigma_true`` / ``sigma_qsvt`` have shape ``(n_omega, 2)`` (spin up, down).
    """
    omegas = omega_grid() if omegas is None else np.asarray(omegas, dtype=float)
    curves = []
    solver.prepare()
    for U, V in pairs:
        p = SiamParams.particle_hole(float(U), float(V))
        h = siam_hamiltonian(p)
        gs = exact_ground_state(h)

        def one(w):
            z = ComplexFrequency(float(w), delta)
            ref = spin_self_energies(h, gs, p, z, CLASSICAL)
            got = ref if solver.kind == "classical" else spin_self_energies(h, gs, p, z, solver)
            return ref, got

        rows = _pmap(one, omegas, threads)
        s_true = np.array([r[0] for r in rows])
        s_got = np.array([r[1] for r in rows])
        rho_t = lattice_dos(omegas, s_true[:, 0], s_true[:, 1], p, interpretation, combine)
        rho_q = lattice_dos(omegas, s_got[:, 0], s_got[:, 1], p, interpretation, combine)
        curves.append(MottCurve(float(U), float(V), omegas, rho_t, rho_q, s_true, s_got))
    return curves


def mott_csv(curves: list[MottCurve], header: str = "") -> str:
    buf = io.StringIO()
    if header:
        buf.write("".join(f"# {ln}\n" for ln in header.splitlines()))
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["omega", "rho_true", "rho_qsvt", "abs_err", "U", "V"])
    for c in curves:
        for row in zip(c.omega, c.rho_true, c.rho_qsvt, c.abs_err):
            wr.writerow([repr(float(v)) for v in row] + [repr(c.U), repr(c.V)])
    return buf.getvalue()
