"""Two-site DMFT and the Bethe-lattice density of states across the Mott transition.

Run with ``python3 demos/04_dmft_mott.py``.
"""
import numpy as np
from scipy.integrate import trapezoid

from qsvt_greens import analytic_bath_V, dmft_loop, mott_scan
from qsvt_greens.greens import omega_grid

for U in (1.0, 2.0, 4.0, 5.9, 8.0):
    st = dmft_loop(U, zeta=1e-6, v_init=0.5, delta=1e-3, max_iter=2000)
    print(f"U={U:3.1f}: V={st.V:.5f} (closed form {analytic_bath_V(U):.5f}), "
          f"z_qp={st.z_qp:.4f}, {st.iterations} iterations")

# The density of states at the Fermi level drops to zero as U grows.
grid = omega_grid(-8, 8, 161)
curves = mott_scan([(0.0, 1.0), (2.0, 0.943), (4.0, 0.745), (5.99, 0.058), (8.0, 0.0)],
                   omegas=grid)
mid = np.argmin(np.abs(grid))
for c in curves:
    print(f"(U={c.U:g}, V={c.V:g}): rho(0)={c.rho_true[mid]:.4f}, "
          f"weight={trapezoid(c.rho_true, grid):.3f}")
