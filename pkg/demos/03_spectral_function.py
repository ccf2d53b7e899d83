"""Spectral function of the impurity model with the QSVT inverse.

With kappa=50 every singular value is inside the approximation domain and the
spectral function agrees with exact diagonalization to round-off. With
kappa=10 some frequencies fall outside it and the error becomes O(1) there.

Run with ``python3 demos/03_spectral_function.py`` (about 30 seconds).
"""
import numpy as np

from qsvt_greens import SiamParams, Solver, spectral_scan
from qsvt_greens.greens import omega_grid

p = SiamParams.particle_hole(4.0, 0.745)
grid = omega_grid(-10, 10, 401)
for kappa in (50, 10):
    scan = spectral_scan(p, grid, 0.1, Solver("ideal", kappa), threads=4)
    low = scan.sigma_min < 1 / kappa
    print(f"kappa={kappa}: max |dA| {scan.abs_err.max():.2e}, "
          f"{low.sum()} frequencies below 1/kappa")
    if low.any():
        print(f"  error where sigma_min >= 1/kappa: {scan.abs_err[~low].max():.1e}")
        print(f"  error where sigma_min <  1/kappa: up to {scan.abs_err[low].max():.2f}")

peaks = grid[1:-1][(scan.A_true[1:-1] > scan.A_true[:-2]) & (scan.A_true[1:-1] > scan.A_true[2:])]
print("peaks of A(omega):", np.round(peaks, 2))
