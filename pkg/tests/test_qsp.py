import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import chebyshev as cheb

from qsvt_greens.errors import ConvergenceError, ResourceError, ValidationError
from qsvt_greens.qsp import (PhaseVector, closed_form_inverse, find_phases, inverse_poly,
                             phase_residual, qsp_unitary, scan_response, to_qsvt_phases)


def zero_phase_oracle(d, a):
    """Direct 2x2 product with plain numpy, independent of qsp_unitary."""
    out = []
    for x in a:
        s = np.sqrt(1 - x * x)
        w = np.array([[x, 1j * s], [1j * s, x]])
        out.append(np.linalg.matrix_power(w, d)[0, 0])
    return np.array(out)


@pytest.fixture(scope="module")
def kappa4():
    poly = inverse_poly(4, 1e-6)
    return poly, find_phases(poly, tol=1e-8)


# -- inverse_poly -------------------------------------------------------------

def test_kappa_one_is_linear():
    p = inverse_poly(1, 1e-3)
    assert p.degree == 1
    assert p.norm_constant * p(1.0) == pytest.approx(1, abs=2e-3)


@pytest.mark.parametrize("kappa,eps", [(2, 1e-12), (4, 1e-6), (4, 1e-12), (10, 1e-12)])
def test_poly_invariants(kappa, eps):
    p = inverse_poly(kappa, eps)
    assert p.degree % 2 == 1 and len(p.cheb_coeffs) == p.degree + 1
    assert np.all(p.cheb_coeffs[0::2] == 0)
    assert p.sup_norm() <= 1
    x = np.linspace(1 / kappa, 1, 20_001)
    assert np.max(np.abs(p.norm_constant * p(x) - 1 / x)) <= p.norm_constant * eps * kappa


def test_poly_parity_on_random_grid():
    p = inverse_poly(8, 1e-10)
    x = np.random.default_rng(0).uniform(-1, 1, 1000)
    assert np.array_equal(p(-x), -p(x))


def test_degree_monotone_and_log_scaling():
    degs = [inverse_poly(k, 1e-12).degree for k in (2, 4, 8, 16)]
    assert degs == sorted(degs)
    # d = O(kappa log(kappa / eps)): the ratio stays bounded
    ratios = [d / (k * np.log(k / 1e-12)) for d, k in zip(degs, (2, 4, 8, 16))]
    assert max(ratios) < 2


def test_kappa10_degree_scale():
    # degree is reported; it must sit on the kappa log(kappa/eps) scale
    d = inverse_poly(10, 1e-12).degree
    assert 150 <= d <= 600


def test_fit_tracks_closed_form_oracle():
    kappa, eps = 3, 1e-4
    ref = closed_form_inverse(kappa, eps)
    p = inverse_poly(kappa, 1e-8)
    x = np.linspace(1 / kappa, 1, 5001)
    assert np.max(np.abs(cheb.chebval(x, ref) - 1 / x)) <= 2 * eps * kappa
    assert np.max(np.abs(p.norm_constant * p(x) - cheb.chebval(x, ref))) <= 3 * eps * kappa


def test_poly_errors():
    with pytest.raises(ValidationError):
        inverse_poly(0.5, 1e-3)
    with pytest.raises(ValidationError):
        inverse_poly(4, 0)
    with pytest.raises(ConvergenceError) as info:
        inverse_poly(50, 1e-12, max_degree=101)
    assert info.value.residual > 1e-12


# -- qsp_unitary ----------------------------------------------------------------

def test_degree_zero_identity():
    u = qsp_unitary(PhaseVector("qsp", [0.0]), 0.37)
    assert np.allclose(u, np.eye(2)) and u[0, 0] == 1


@pytest.mark.parametrize("d", [1, 2, 3, 6, 11])
def test_zero_phases_give_chebyshev(d):
    a = np.linspace(-1, 1, 41)
    p = qsp_unitary(np.zeros(d + 1), a)[:, 0, 0]
    assert np.allclose(p, zero_phase_oracle(d, a), atol=1e-13)
    assert np.allclose(p.real, cheb.chebval(a, [0] * d + [1]), atol=1e-13)


@settings(max_examples=50, deadline=None)
@given(phi=st.lists(st.floats(-np.pi, np.pi), min_size=1, max_size=20), a=st.floats(-1, 1))
def test_qsp_unitarity(phi, a):
    u = qsp_unitary(phi, a)
    assert np.max(np.abs(u.conj().T @ u - np.eye(2))) <= 1e-13


def test_signal_range_checked():
    with pytest.raises(ValidationError):
        qsp_unitary([0, 0], 1.5)
    with pytest.raises(ValidationError):
        qsp_unitary(PhaseVector("qsvt", [0.0]), 0.5)


# -- find_phases ----------------------------------------------------------------

def test_identity_target():
    pv = find_phases([0.0, 1.0], tol=1e-12)
    a = np.linspace(-1, 1, 101)
    assert np.max(np.abs(qsp_unitary(pv, a)[:, 0, 0].real - a)) <= 1e-12


def test_t3_target():
    pv = find_phases([0, 0, 0, 1.0], tol=1e-10)
    assert pv.residual <= 1e-10
    a = np.linspace(-1, 1, 101)
    ref = zero_phase_oracle(3, a).real
    assert np.max(np.abs(qsp_unitary(pv, a)[:, 0, 0].real - ref)) <= 1e-10


def test_kappa4_inverse_phases(kappa4):
    poly, pv = kappa4
    assert pv.convention == "qsp" and pv.degree == poly.degree
    assert phase_residual(pv, poly.cheb_coeffs, n_nodes=1000) <= 1e-8


def test_phase_finding_deterministic(kappa4):
    poly, pv = kappa4
    again = find_phases(poly, tol=1e-8)
    assert np.array_equal(again.angles, pv.angles)


def test_unrealizable_targets_rejected():
    with pytest.raises(ValidationError):
        find_phases([0, 1.2])
    with pytest.raises(ValidationError):
        find_phases([0.1, 0.5])
    with pytest.raises(ValidationError):
        find_phases([0, 0, 1.0])


def test_phase_degree_cap():
    with pytest.raises(ResourceError):
        find_phases(inverse_poly(4, 1e-6), max_degree=11)


# -- conversion -----------------------------------------------------------------

def test_qsvt_conversion_examples():
    assert to_qsvt_phases(PhaseVector("qsp", [0, 0])).angles.tolist() == [0.0]
    q = to_qsvt_phases(PhaseVector("qsp", [np.pi / 4, 0, 0, np.pi / 4]))
    assert np.allclose(q.angles, [np.pi / 4 + np.pi / 4 + np.pi, -np.pi / 2, -np.pi / 2])
    assert q.convention == "qsvt" and q.degree == 3


def test_qsvt_conversion_rejects_even_degree():
    with pytest.raises(ValidationError):
        to_qsvt_phases(PhaseVector("qsp", [0, 0, 0]))
    with pytest.raises(ValidationError):
        to_qsvt_phases(PhaseVector("qsvt", [0.0]))


# -- scans and files --------------------------------------------------------------

def test_scan_t2():
    grid = np.linspace(-1, 1, 21)
    a, p = scan_response(PhaseVector("qsp", [0, 0, 0]), grid)
    assert 0 not in a and len(a) == 20
    assert np.allclose(p, 2 * a ** 2 - 1, atol=1e-13)


def test_scan_inverse_contract_and_symmetry(kappa4):
    poly, pv = kappa4
    c = poly.norm_constant
    a, p = scan_response(pv, np.linspace(1 / 4, 1, 2001))
    assert np.max(np.abs(c * p.real - 1 / a)) <= c * 4 * 1e-6
    a, p = scan_response(pv, np.linspace(-1, 1, 2001))
    assert np.max(np.abs(p.real + p.real[::-1])) <= 1e-8


def test_phase_file_round_trip(kappa4):
    _, pv = kappa4
    back = PhaseVector.from_text("# comment\n" + pv.to_text())
    assert back == pv and back.norm_constant == pv.norm_constant and back.kappa == 4.0


def test_phase_file_errors():
    with pytest.raises(ValidationError):
        PhaseVector.from_text("degree 3 convention qsp\n0\n0\n")
    with pytest.raises(ValidationError):
        PhaseVector.from_text("")
    with pytest.raises(ValidationError):
        PhaseVector.from_text("degree 1 convention xyz\n0\n0\n")
