"""Single-qubit signal processing: odd 1/x polynomials, phase factors, responses.

Conventions
-----------
The QSP sequence for phases ``phi_0..phi_d`` is::

    U(a) = e^{i phi_0 Z} prod_{k=1..d} W(a) e^{i phi_k Z},   W(a) = R_x(2 arccos a)

and the realized polynomial is ``P(a) = <0|U(a)|0>``.  Only ``Re P`` is
matched against real odd targets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.optimize import least_squares

from .errors import ConvergenceError, ResourceError, ValidationError

DEFAULT_MAX_DEGREE = 512       # phase-finding cap
POLY_MAX_DEGREE = 4095         # polynomial-construction cap
NORM_MARGIN = 1e-3
DEFAULT_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class OddPolynomial:
    """Odd Chebyshev series ``p`` with ``p(x) ~ 1/(C x)`` on ``[1/kappa, 1]``.

    Attributes
    ----------
    kappa : float
    target_eps : float
        Requested bound on ``max |p(x) - 1/(C x)|`` over ``[1/kappa, 1]``.
    degree : int
    cheb_coeffs : ndarray
        Full Chebyshev coefficient vector of length ``degree + 1``; even
        entries are exactly zero.
    norm_constant : float
        The constant ``C``.
    achieved_eps : float
        Measured value of the bound above on a dense grid.
    """

    kappa: float
    target_eps: float
    degree: int
    cheb_coeffs: np.ndarray
    norm_constant: float
    achieved_eps: float = float("nan")

    def __call__(self, x):
        return cheb.chebval(np.asarray(x, dtype=float), self.cheb_coeffs)

    @property
    def odd_coeffs(self) -> np.ndarray:
        """Coefficients of ``T_1, T_3, ..., T_d``."""
        return self.cheb_coeffs[1::2]

    def sup_norm(self, n: int = 10_001) -> float:
        return float(np.max(np.abs(self(_sup_grid(n, self.degree)))))


@dataclass(frozen=True, eq=False)
class PhaseVector:
    """Phase angles tagged with their convention (``"qsp"`` or ``"qsvt"``)."""

    convention: str
    angles: np.ndarray
    kappa: float = float("nan")
    norm_constant: float = float("nan")
    residual: float = float("nan")

    def __post_init__(self):
        if self.convention not in ("qsp", "qsvt"):
            raise ValidationError(f"unknown phase convention {self.convention!r}")
        angles = np.array(self.angles, dtype=float).ravel()
        angles.setflags(write=False)
        object.__setattr__(self, "angles", angles)
        if self.convention == "qsp" and len(angles) < 1:
            raise ValidationError("QSP phases need at least one angle")

    @property
    def degree(self) -> int:
        return len(self.angles) - 1 if self.convention == "qsp" else len(self.angles)

    def __eq__(self, other):
        return (isinstance(other, PhaseVector) and self.convention == other.convention
                and np.array_equal(self.angles, other.angles))

    def to_text(self) -> str:
        head = (f"degree {self.degree} convention {self.convention} "
                f"kappa {float(self.kappa)!r} C {float(self.norm_constant)!r}")
        return "\n".join([head, *(repr(float(a)) for a in self.angles)]) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PhaseVector":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if not lines:
            raise ValidationError("empty phase file")
        head = lines[0].split()
        try:
            meta = dict(zip(head[::2], head[1::2]))
            degree = int(meta["degree"])
            conv = meta["convention"]
            kappa = float(meta.get("kappa", "nan"))
            c = float(meta.get("C", "nan"))
            angles = [float(x) for x in lines[1:]]
        except (KeyError, ValueError) as exc:
            raise ValidationError(f"malformed phase file: {exc}") from None
        pv = cls(conv, angles, kappa=kappa, norm_constant=c)
        if pv.degree != degree:
            raise ValidationError(f"header degree {degree} but {len(angles)} angles for {conv}")
        return pv


# ---------------------------------------------------------------------------
# polynomial construction

def _sup_grid(n: int, degree: int) -> np.ndarray:
    """Uniform grid on [-1, 1] refined with Chebyshev points for high degree."""
    m = max(16 * degree, 64)
    t = np.cos(np.pi * (np.arange(m) + 0.5) / m)
    return np.concatenate([np.linspace(-1.0, 1.0, n), t])


def _domain_grid(kappa: float, degree: int) -> np.ndarray:
    lo = 1.0 / kappa
    m = max(16 * degree, 64)
    t = np.cos(np.pi * (np.arange(m) + 0.5) / m)
    return np.concatenate([np.linspace(lo, 1.0, 10_001), lo + (1 - lo) * (t + 1) / 2])


def _fit_inverse(kappa: float, degree: int) -> tuple[np.ndarray, float, float]:
    """Least-squares odd fit of 1/x; returns (coeffs, C, sup error of p - 1/(C x))."""
    n_pts = max(4000, 8 * degree)
    t = np.cos(np.pi * (np.arange(n_pts) + 0.5) / n_pts)
    x = 1.0 / kappa + (1.0 - 1.0 / kappa) * (t + 1) / 2
    orders = np.arange(1, degree + 1, 2)
    basis = np.cos(np.outer(np.arccos(x), orders))
    c_odd, *_ = np.linalg.lstsq(basis, 1.0 / x, rcond=None)
    coeffs = np.zeros(degree + 1)
    coeffs[1::2] = c_odd
    c_norm = float(np.max(np.abs(cheb.chebval(_sup_grid(10_001, degree), coeffs)))) * (1 + NORM_MARGIN)
    coeffs /= c_norm
    xd = _domain_grid(kappa, degree)
    err = float(np.max(np.abs(cheb.chebval(xd, coeffs) - 1.0 / (c_norm * xd))))
    return coeffs, c_norm, err


@lru_cache(maxsize=64)
def _inverse_poly_cached(kappa: float, target_eps: float, max_degree: int):
    tried = {}

    def attempt(d):
        if d not in tried:
            tried[d] = _fit_inverse(kappa, d)
        return tried[d]

    lo, d = None, 1
    while True:
        if attempt(d)[2] <= target_eps:
            break
        lo = d
        if d >= max_degree:
            best = min(tried.values(), key=lambda r: r[2])[2]
            raise ConvergenceError(
                f"1/x approximation for kappa={kappa} did not reach eps={target_eps} "
                f"below degree {max_degree} (best {best:.3g})", residual=best)
        d = min(2 * d + 1, max_degree if max_degree % 2 else max_degree - 1)
    hi = d
    # bisection over odd degrees between the last failure and first success
    while lo is not None and hi - lo > 2:
        mid = (lo + hi) // 2
        mid += 1 - mid % 2
        if mid >= hi:
            mid = hi - 2
        if mid <= lo:
            break
        if attempt(mid)[2] <= target_eps:
            hi = mid
        else:
            lo = mid
    return hi, *attempt(hi)


def inverse_poly(kappa: float, target_eps: float = DEFAULT_EPS,
                 max_degree: int = POLY_MAX_DEGREE) -> OddPolynomial:
    """Smallest-degree odd polynomial approximating ``1/(C x)`` on ``[1/kappa, 1]``.

    The fit is a least-squares odd Chebyshev series on Chebyshev-distributed
    points; ``C`` is the grid maximum of the raw fit times ``1 + 1e-3`` so
    that ``|p| <= 1`` on ``[-1, 1]``.  The degree is found by doubling then
    bisection.

    Raises
    ------
    ValidationError
        If ``kappa < 1`` or ``target_eps`` is not in ``(0, 1)``.
    ConvergenceError
        If ``max_degree`` is reached first; ``residual`` carries the best error.
    """
    if not kappa >= 1:
        raise ValidationError("kappa must be >= 1")
    if not 0 < target_eps < 1:
        raise ValidationError("target_eps must lie in (0, 1)")
    d, coeffs, c_norm, err = _inverse_poly_cached(float(kappa), float(target_eps), int(max_degree))
    coeffs = coeffs.copy()
    coeffs.setflags(write=False)
    return OddPolynomial(float(kappa), float(target_eps), d, coeffs, c_norm, err)


def closed_form_inverse(kappa: float, eps: float) -> np.ndarray:
    """Chebyshev coefficients of the classical ``(1 - (1 - x^2)^b) / x`` construction.

    An independent (non-fitted, far from optimal) approximation of ``1/x``,
    used as a cross-check for :func:`inverse_poly`.
    """
    b = int(math.ceil(kappa ** 2 * math.log(kappa / eps)))
    big_d = int(math.ceil(math.sqrt(b * math.log(4 * b / eps))))
    # tail[j] = sum_{i > j} binom(2b, b+i) / 4^b, evaluated in log space
    i = np.arange(0, b + 1)
    logw = (math.lgamma(2 * b + 1) - np.array([math.lgamma(b + k + 1) + math.lgamma(b - k + 1) for k in i])
            - 2 * b * math.log(2))
    w = np.exp(logw)
    tail = np.cumsum(w[::-1])[::-1]          # tail[j] = sum_{i >= j} w[i]
    coeffs = np.zeros(2 * big_d + 2)
    for j in range(big_d + 1):
        coeffs[2 * j + 1] = 4 * (-1) ** j * tail[j + 1] if j + 1 <= b else 0.0
    return coeffs


# ---------------------------------------------------------------------------
# QSP response

def _check_signal(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if np.any(np.abs(a) > 1 + 1e-12):
        raise ValidationError("signal value must lie in [-1, 1]")
    return np.clip(a, -1.0, 1.0)


def _angles(phases) -> np.ndarray:
    if isinstance(phases, PhaseVector):
        if phases.convention != "qsp":
            raise ValidationError("expected QSP-convention phases")
        return phases.angles
    return np.asarray(phases, dtype=float)


def qsp_unitary(phases, a):
    """QSP unitary ``U_phi(a)``; ``a`` may be a scalar or an array.

    Returns an array of shape ``a.shape + (2, 2)``.
    """
    phi = _angles(phases)
    a = _check_signal(a)
    flat = a.reshape(-1)
    s = np.sqrt(1 - flat ** 2)
    w = np.empty((flat.size, 2, 2), dtype=complex)
    w[:, 0, 0] = w[:, 1, 1] = flat
    w[:, 0, 1] = w[:, 1, 0] = 1j * s
    u = np.zeros((flat.size, 2, 2), dtype=complex)
    u[:, 0, 0] = np.exp(1j * phi[0])
    u[:, 1, 1] = np.exp(-1j * phi[0])
    for p in phi[1:]:
        u = u @ w
        u[:, :, 0] *= np.exp(1j * p)
        u[:, :, 1] *= np.exp(-1j * p)
    return u.reshape(a.shape + (2, 2))


def _response_and_jacobian(phi: np.ndarray, x: np.ndarray, jac: bool = True):
    """Re P(x) and d Re P / d phi via prefix / suffix products."""
    d = len(phi) - 1
    n = len(x)
    s = np.sqrt(1 - x ** 2)
    e = np.stack([np.exp(1j * phi), np.exp(-1j * phi)], axis=1)      # (d+1, 2)
    # left[k] = <0| e0 W e1 ... W ek   (row vectors)
    left = np.empty((d + 1, n, 2), dtype=complex)
    v = np.zeros((n, 2), dtype=complex)
    v[:, 0] = e[0, 0]
    left[0] = v
    for k in range(1, d + 1):
        v = np.stack([v[:, 0] * x + v[:, 1] * 1j * s, v[:, 0] * 1j * s + v[:, 1] * x], axis=1)
        v = v * e[k]
        left[k] = v
    p = left[d, :, 0]
    if not jac:
        return p.real, None
    # right[k] = W e_{k+1} ... W e_d |0>
    right = np.empty((d + 1, n, 2), dtype=complex)
    u = np.zeros((n, 2), dtype=complex)
    u[:, 0] = 1.0
    right[d] = u
    for k in range(d - 1, -1, -1):
        u = u * e[k + 1]
        u = np.stack([x * u[:, 0] + 1j * s * u[:, 1], 1j * s * u[:, 0] + x * u[:, 1]], axis=1)
        right[k] = u
    # d/dphi_k inserts iZ right after e_k
    j = np.real(1j * (left[:, :, 0] * right[:, :, 0] - left[:, :, 1] * right[:, :, 1]))
    return p.real, j.T


def _nodes(m: int) -> np.ndarray:
    """Positive Chebyshev nodes of T_{2m}."""
    return np.cos((2 * np.arange(1, m + 1) - 1) * np.pi / (4 * m))


def verification_nodes(n: int) -> np.ndarray:
    """Chebyshev-Gauss nodes on [-1, 1] used to score phases."""
    return np.cos(np.pi * (np.arange(n) + 0.5) / n)


def phase_residual(phases, target_coeffs: np.ndarray, n_nodes: int | None = None) -> float:
    """``max |Re P(a) - p(a)|`` over Chebyshev nodes, using :func:`qsp_unitary` only."""
    phi = _angles(phases)
    n = n_nodes or max(500, 2 * len(phi))
    x = verification_nodes(n)
    resp = qsp_unitary(phi, x)[:, 0, 0].real
    return float(np.max(np.abs(resp - cheb.chebval(x, target_coeffs))))


def find_phases(poly, tol: float = 1e-10, max_degree: int = DEFAULT_MAX_DEGREE,
                max_nfev: int = 4000) -> PhaseVector:
    """QSP phases whose ``Re P`` matches a real odd polynomial.

    Symmetric phases ``(r, reversed(r))`` are optimized by Levenberg-Marquardt
    on the ``(d+1)/2`` positive Chebyshev nodes, starting from
    ``(pi/4, 0, ..., 0, pi/4)``.  The result is scored independently on at
    least 500 nodes through :func:`qsp_unitary`.

    Parameters
    ----------
    poly : OddPolynomial or array_like
        Target; an array is read as a Chebyshev coefficient vector.
    tol : float
        Acceptance threshold on the verification residual.

    Raises
    ------
    ValidationError
        Even degree or sup norm above 1.
    ResourceError
        Degree above ``max_degree``.
    ConvergenceError
        Verification residual above ``tol``.
    """
    if isinstance(poly, OddPolynomial):
        coeffs, kappa, c_norm = np.asarray(poly.cheb_coeffs), poly.kappa, poly.norm_constant
    else:
        coeffs, kappa, c_norm = np.asarray(poly, dtype=float), float("nan"), float("nan")
    d = len(coeffs) - 1
    if d % 2 == 0 or np.any(coeffs[0::2] != 0):
        raise ValidationError("target must be an odd polynomial")
    if d > max_degree:
        raise ResourceError(f"degree {d} exceeds the phase-finding cap {max_degree}")
    sup = float(np.max(np.abs(cheb.chebval(_sup_grid(10_001, d), coeffs))))
    if sup > 1:
        raise ValidationError(f"target sup norm {sup:.6g} exceeds 1; not realizable")

    m = (d + 1) // 2
    x = _nodes(m)
    target = cheb.chebval(x, coeffs)

    def full(r):
        return np.concatenate([r, r[::-1]])

    def fun(r):
        return _response_and_jacobian(full(r), x, jac=False)[0] - target

    def jac(r):
        j = _response_and_jacobian(full(r), x)[1]
        return j[:, :m] + j[:, ::-1][:, :m]

    r0 = np.zeros(m)
    r0[0] = np.pi / 4
    sol = least_squares(fun, r0, jac=jac, method="lm", xtol=1e-15, ftol=1e-15,
                        gtol=1e-15, max_nfev=max_nfev)
    phi = full(sol.x)
    resid = phase_residual(phi, coeffs)
    if not resid <= tol:
        raise ConvergenceError(f"phase finding stopped at residual {resid:.3g} (tol {tol:.3g})",
                               residual=resid)
    return PhaseVector("qsp", phi, kappa=kappa, norm_constant=c_norm, residual=resid)


@lru_cache(maxsize=16)
def inverse_phases(kappa: float, eps: float = DEFAULT_EPS, tol: float = 1e-9,
                   max_degree: int = DEFAULT_MAX_DEGREE) -> PhaseVector:
    """Cached ``find_phases(inverse_poly(kappa, eps))``."""
    return find_phases(inverse_poly(kappa, eps), tol=tol, max_degree=max_degree)


def to_qsvt_phases(phases: PhaseVector) -> PhaseVector:
    """Convert QSP phases (length d+1) to the odd-degree QSVT sequence (length d)."""
    if phases.convention != "qsp":
        raise ValidationError("expected QSP-convention phases")
    d = phases.degree
    if d % 2 == 0:
        raise ValidationError("only odd-degree QSVT sequences are supported")
    phi = phases.angles
    out = np.empty(d)
    out[0] = phi[0] + phi[d] + (d - 1) * np.pi / 2
    out[1:] = phi[1:d] - np.pi / 2
    return PhaseVector("qsvt", out, kappa=phases.kappa, norm_constant=phases.norm_constant,
                       residual=phases.residual)


def scan_response(phases, grid) -> tuple[np.ndarray, np.ndarray]:
    """``(a, P(a))`` over ``grid`` with the point ``a = 0`` removed."""
    grid = np.asarray(grid, dtype=float).ravel()
    grid = grid[grid != 0]
    return grid, qsp_unitary(phases, grid)[:, 0, 0]
