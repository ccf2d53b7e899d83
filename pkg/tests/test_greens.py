import math

import numpy as np
import pytest
from scipy.integrate import quad

from qsvt_greens.errors import ConvergenceError, ValidationError
from qsvt_greens.greens import (CLASSICAL, Solver, bethe_dos, dmft_loop, dmft_step,
                                greens_matrix, impurity_greens, mott_csv, mott_scan,
                                noninteracting_greens, omega_grid, quasiparticle_weight,
                                self_energy, semicircle, spectral_function, spectral_scan)
from qsvt_greens.pauli import (ComplexFrequency, SiamParams, analytic_bath_V, dense_matrix,
                               exact_ground_state, jw_ladder, siam_hamiltonian)

PAIRS = [(2, 0.943), (4, 0.745), (5.99, 0.058), (8, 0)]


def lehmann(h, gs, z):
    """Independent spectral-decomposition oracle for G_ij(z)."""
    e, v = np.linalg.eigh(dense_matrix(h))
    psi = gs.vector
    n = h.n_qubits
    a = [jw_ladder(i, n) for i in range(1, n + 1)]
    g = np.zeros((n, n), dtype=complex)
    for k in range(len(e)):
        nk = v[:, k]
        w = e[k] - gs.energy
        for i in range(n):
            for j in range(n):
                g[i, j] += (np.vdot(psi, a[i] @ nk) * np.vdot(nk, a[j].conj().T @ psi)) / (z - w)
                g[i, j] += (np.vdot(psi, a[j].conj().T @ nk) * np.vdot(nk, a[i] @ psi)) / (z + w)
    return g


def siam(U, V):
    p = SiamParams.particle_hole(U, V)
    h = siam_hamiltonian(p)
    return p, h, exact_ground_state(h)


# -- Green's matrix -----------------------------------------------------------------

@pytest.mark.parametrize("U,V", PAIRS + [(0, 1.0), (3.0, 0.3)])
def test_classical_matches_lehmann(U, V):
    p, h, gs = siam(U, V)
    for w in (-3.1, -0.4, 0.0, 1.7, 5.2):
        z = ComplexFrequency(w, 0.1)
        g = greens_matrix(h, gs, z).G
        assert g.shape == (4, 4)
        assert np.max(np.abs(g - lehmann(h, gs, z.z))) <= 1e-12


def test_lehmann_for_asymmetric_parameters():
    p = SiamParams(U=3.0, mu=1.1, eps2=0.4, V=0.6)
    h = siam_hamiltonian(p)
    gs = exact_ground_state(h)
    z = ComplexFrequency(0.8, 0.05)
    assert np.max(np.abs(greens_matrix(h, gs, z).G - lehmann(h, gs, z.z))) <= 1e-12


@pytest.mark.parametrize("U,V", PAIRS[:3])
def test_symmetries(U, V):
    _, h, gs = siam(U, V)
    for w in np.linspace(-6, 6, 13):
        g = greens_matrix(h, gs, ComplexFrequency(w, 0.1))
        assert np.max(np.abs(g.G - g.G.T)) <= 1e-10
        assert abs(impurity_greens(g, "up") - impurity_greens(g, "down")) <= 1e-10


def test_atomic_limit_poles_at_lehmann_energies():
    _, h, gs = siam(8, 0)
    e = np.linalg.eigvalsh(dense_matrix(h))
    excit = np.unique(np.round(e - gs.energy, 10))
    omegas = np.linspace(-10, 10, 2001)
    a = np.array([greens_matrix(h, gs, ComplexFrequency(w, 0.1)).A_omega for w in omegas])
    peaks = omegas[1:-1][(a[1:-1] > a[:-2]) & (a[1:-1] > a[2:])]
    allowed = np.concatenate([excit, -excit])
    assert len(peaks) > 0
    assert all(np.min(np.abs(allowed - w)) <= 0.011 for w in peaks)


def test_ideal_solver_matches_classical_u4():
    _, h, gs = siam(4, 0.745)
    sol = Solver("ideal", kappa=50).prepare()
    for w in np.linspace(-10, 10, 41):
        z = ComplexFrequency(w, 0.1)
        got = greens_matrix(h, gs, z, sol)
        assert not got.warnings
        assert np.max(np.abs(got.G - greens_matrix(h, gs, z).G)) <= 1e-10
        assert got.solver == "qsvt-ideal"


# -- spectral function ---------------------------------------------------------------

def test_spectral_function_examples():
    assert spectral_function(-1j * np.eye(16)) == pytest.approx(16 / math.pi)
    assert spectral_function(np.ones((3, 3))) == 0


def test_spectral_positive_on_grid():
    for U, V in PAIRS:
        scan = spectral_scan(SiamParams.particle_hole(U, V), omega_grid(-10, 10, 201))
        assert np.min(scan.A_true) >= -1e-10
        assert np.all(scan.abs_err == 0)


def test_scan_csv_columns():
    scan = spectral_scan(SiamParams.particle_hole(4, 0.745), [-1.0, 0.5])
    lines = scan.to_csv(header="run a\nrun b").splitlines()
    assert lines[:2] == ["# run a", "# run b"]
    assert lines[2] == "omega,A_true,A_qsvt,abs_err,sigma_min_e,sigma_min_h,kappa_line"
    assert len(lines) == 5 and lines[3].startswith("-1.0,")


# -- impurity and self-energy -------------------------------------------------------------

def test_atomic_self_energy_closed_form():
    # ground-state ensemble of the decoupled impurity: half-filled, two poles at +-U/2
    U = 8.0
    p = SiamParams.particle_hole(U, 0)
    for w in np.linspace(-7, 7, 29):
        z = complex(w, 0.1)
        g = 0.5 / (z + U / 2) + 0.5 / (z - U / 2)
        assert abs(self_energy(g, z, p) - (U / 2 + U * U / (4 * z))) <= 1e-12


def test_atomic_limit_impurity_poles():
    _, h, gs = siam(8, 0)
    # the chosen ground state |0010> has the down impurity level filled, so adding an up
    # electron costs +U/2 and removing the down one gives a pole at -U/2
    for w, spin in ((4.0, "up"), (-4.0, "down")):
        g = greens_matrix(h, gs, ComplexFrequency(w, 1e-3))
        peak = -impurity_greens(g, spin).imag
        assert peak > 100


def test_noninteracting_limit():
    p, h, gs = siam(0, 0.7)
    for w in (-2.0, 0.3, 1.1):
        z = ComplexFrequency(w, 0.1)
        g = impurity_greens(greens_matrix(h, gs, z))
        assert abs(g - noninteracting_greens(z.z, p)) <= 1e-12
        assert abs(self_energy(g, z, p)) <= 1e-11


def test_self_energy_spin_shared():
    p, h, gs = siam(4, 0.745)
    z = ComplexFrequency(0.0, 0.1)
    g = greens_matrix(h, gs, z)
    s_up = self_energy(impurity_greens(g, "up"), z, p)
    s_dn = self_energy(impurity_greens(g, "down"), z, p)
    assert abs(s_up - s_dn) <= 1e-10


def test_self_energy_pole_error():
    with pytest.raises(ValidationError):
        self_energy(0j, 0.1j, SiamParams.particle_hole(2, 1))


def test_impurity_layout_checked():
    h = siam_hamiltonian(SiamParams.particle_hole(2, 1))
    from qsvt_greens.pauli import PauliSum
    small = PauliSum([(1, "ZZ")])
    g = greens_matrix(small, exact_ground_state(small), ComplexFrequency(0, 0.1))
    with pytest.raises(ValidationError):
        impurity_greens(g)
    assert h.n_qubits == 4


@pytest.mark.parametrize("im,expect", [(0.0, 1.0), (-0.1, 0.5), (-0.3, 0.25)])
def test_quasiparticle_weight(im, expect):
    assert quasiparticle_weight(complex(0.2, im), 0.1) == pytest.approx(expect)


def test_quasiparticle_weight_errors():
    with pytest.raises(ValidationError):
        quasiparticle_weight(0.1j, 0.1)
    with pytest.raises(ValidationError):
        quasiparticle_weight(0j, 0.0)


# -- DMFT -----------------------------------------------------------------------------------

@pytest.mark.parametrize("U", [1.0, 2.0, 4.0, 5.9])
def test_dmft_fixed_point_matches_closed_form(U):
    # tight stopping threshold and a small broadening; see the decisions ledger
    st = dmft_loop(U, zeta=1e-9, v_init=0.5, delta=1e-3, max_iter=2000)
    assert st.converged and st.V >= 0 and 0 <= st.z_qp <= 1 + 1e-9
    assert abs(st.V - analytic_bath_V(U)) <= 1e-3


def test_dmft_u4_default_threshold():
    st = dmft_loop(4.0, zeta=1e-3, v_init=0.5, delta=1e-3)
    assert abs(st.V - 0.745) <= 2e-3
    assert st.trajectory[0] == 0.5 and st.trajectory[-1] == st.V


def test_dmft_u2():
    st = dmft_loop(2.0, zeta=1e-3, v_init=0.5, delta=1e-3)
    assert round(st.V, 3) == pytest.approx(0.943, abs=1e-3)


@pytest.mark.parametrize("U", [6.5, 8.0])
def test_dmft_insulating_side_goes_to_zero(U):
    # the small residual V is a finite-broadening artifact (it scales with delta)
    st = dmft_loop(U, zeta=1e-8, v_init=0.1, delta=1e-3, max_iter=2000)
    assert st.converged and st.V <= 1e-3


def test_dmft_step_is_pure():
    assert dmft_step(4.0, 0.6) == dmft_step(4.0, 0.6)


def test_dmft_nonconvergence_report():
    with pytest.raises(ConvergenceError) as info:
        dmft_loop(8.0, zeta=1e-12, v_init=0.5, max_iter=3)
    assert len(info.value.trajectory) == 4 and info.value.residual > 0


def test_dmft_validation():
    with pytest.raises(ValidationError):
        dmft_loop(2.0, zeta=0)
    with pytest.raises(ValidationError):
        dmft_loop(2.0, v_init=-1)


# -- Bethe lattice ------------------------------------------------------------------------------

def test_bethe_examples():
    p = SiamParams.particle_hole(0, 1.0)
    assert bethe_dos(0.0, 0.0, p) == pytest.approx(1 / math.pi)
    assert bethe_dos(2.0, 0.0, p) == 0 and bethe_dos(-2.0, 0.0, p) == 0
    assert bethe_dos(3.0, 0.0, p) == 0
    assert bethe_dos(0.0, 0.0, p, "complex") == pytest.approx(1 / math.pi)
    with pytest.raises(ValidationError):
        bethe_dos(0.0, 0.0, p, "imaginary")


def test_semicircle_normalized():
    val, _ = quad(semicircle, -2, 2, epsabs=1e-12, epsrel=1e-12)
    assert abs(val - 1) <= 1e-6


def test_mott_noninteracting_row_is_semicircle():
    omegas = omega_grid(-3, 3, 61)
    (curve,) = mott_scan([(0.0, 1.0)], omegas=omegas)
    inside = np.abs(omegas) < 1.95
    assert np.max(np.abs(curve.rho_true - semicircle(omegas))[inside]) <= 1e-12
    # the square root amplifies rounding at the band edges
    assert np.max(np.abs(curve.rho_true - semicircle(omegas))) <= 1e-7
    assert np.all(curve.abs_err == 0)


def test_mott_atomic_bands_and_csv():
    omegas = omega_grid(-8, 8, 161)
    (curve,) = mott_scan([(8.0, 0.0)], omegas=omegas)
    # Hubbard bands centred at +-U/2, gap around zero
    assert curve.rho_true[np.argmin(np.abs(omegas))] == 0
    assert curve.rho_true[np.argmin(np.abs(omegas - 4))] > 0.1
    assert curve.rho_true[np.argmin(np.abs(omegas + 4))] > 0.1
    lines = mott_csv([curve]).splitlines()
    assert lines[0] == "omega,rho_true,rho_qsvt,abs_err,U,V" and len(lines) == 162


def test_threads_do_not_change_results():
    p = SiamParams.particle_hole(4, 0.745)
    a = spectral_scan(p, omega_grid(-4, 4, 17), threads=1)
    b = spectral_scan(p, omega_grid(-4, 4, 17), threads=4)
    assert np.array_equal(a.A_true, b.A_true)


def test_solver_validation():
    with pytest.raises(ValidationError):
        Solver("analog")
    with pytest.raises(ValidationError):
        Solver("ideal", kappa=0.5)
    assert CLASSICAL.tag == "classical"
