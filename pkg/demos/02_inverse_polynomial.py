"""Fit the odd polynomial for 1/x and invert with its QSP phases.

Run with ``python3 demos/02_inverse_polynomial.py``.
"""
import numpy as np

from qsvt_greens import PauliSum, apply_inverse, dense_matrix, find_phases, inverse_poly
from qsvt_greens.qsp import scan_response

kappa, eps = 4.0, 1e-6
poly = inverse_poly(kappa, eps)
print(f"kappa={kappa}: degree {poly.degree}, C={poly.norm_constant:.4f}, "
      f"sup|p|={poly.sup_norm():.6f}")

phases = find_phases(poly, tol=1e-9)
print(f"phase residual on Chebyshev nodes: {phases.residual:.1e}")

# Compare C * Re P(a) with 1/a on the valid domain. The grid skips a=0.
a, resp = scan_response(phases, np.linspace(1 / kappa, 1, 7))
for x, v in zip(a, resp):
    print(f"  a={x:.3f}  C*ReP={poly.norm_constant * v.real:10.6f}  1/a={1 / x:10.6f}")

# Invert a small well-conditioned operator through the simulated circuit.
m = PauliSum([(2.0, "II"), (0.5, "XZ"), (0.3j, "YI")])
exact = np.linalg.inv(dense_matrix(m))
for mode in ("ideal", "circuit"):
    res = apply_inverse(m, kappa, eps, mode=mode, phases=phases if mode == "circuit" else None)
    print(f"{mode:8s} max error {np.max(np.abs(res.matrix - exact)):.2e} "
          f"(sigma_min {res.sigma_min:.3f}, warning: {res.warning is not None})")

# At fixed eps the degree grows roughly linearly in kappa.
for k in (2, 4, 8, 16):
    print(f"  kappa={k:2d}: degree {inverse_poly(k, 1e-12).degree}")
