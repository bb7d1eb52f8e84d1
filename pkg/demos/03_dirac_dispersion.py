"""Build the 4x4 Dirac operator from a Weyl operator and its adjugate.

For the flat case the determinant of the full symbol is
``(det L_prin(p) - m^2)^2`` so it vanishes exactly on the mass shell.
"""

import numpy as np

from symcalc.dirac import (
    AffineMap,
    apply_dirac,
    build_dirac,
    coordinate_pushforward,
    full_symbol,
    mass_shell_p4,
    null_vector,
    plane_wave,
    pushforward_half_density,
)
from symcalc.harness.catalog import flat_weyl
from symcalc.symbol_core import standard_points

m = 1.0
L = flat_weyl()
D = build_dirac(L, m)
pts = standard_points()

print(" p4 (scan)    det full_symbol")
for p4 in np.linspace(0.0, 2.0, 9):
    det = np.linalg.det(full_symbol(D, np.zeros(4), [0.0, 0.0, 0.0, p4])).real
    print(f"  {p4:5.2f}      {det:10.5f}")

# Pick an on-shell momentum, take the kernel vector, and build a solution.
q = np.array([0.3, -0.6, 0.2])
p = np.append(q, mass_shell_p4(np.diag([1.0, 1, 1, -1]), q, m)[0])
u, sigma = null_vector(D, p)
psi = plane_wave(u, p)
print(f"\non shell p = {p}, smallest singular value ratio {sigma:.1e}")
print(f"max |D psi| over the sample = {np.abs(apply_dirac(D, psi, pts)).max():.2e}")

# Under x' = 2x the pushed half-density is again a solution.
phi = AffineMap.dilation(2.0)
D2 = build_dirac(coordinate_pushforward(L, phi), m)
psi2 = pushforward_half_density(psi, phi)
print(f"after dilation, max |D' psi'| = {np.abs(apply_dirac(D2, psi2, phi(pts))).max():.2e}")
