"""Gauge maps: the covariant subprincipal symbol transforms as R* L_csub R.

The ordinary subprincipal symbol picks up gradient terms of R; adding the
bracket correction removes them.
"""

import numpy as np

from symcalc.em_adjugate import extract_potential
from symcalc.gauge import apply_gauge, covariant_subprincipal, random_gauge, verify_csub_covariance
from symcalc.harness.catalog import load_scenario
from symcalc.symbol_core import standard_points

pts = standard_points()
op = load_scenario("S3").operator()
rng = np.random.default_rng(0)
R = random_gauge(rng, amplitude=0.5, name="demo")
gauged = apply_gauge(op, R)

Rv = R(pts)
Rh = np.conj(np.swapaxes(Rv, -1, -2))

# Naive law for the plain subprincipal symbol: fails.
naive = np.abs(gauged.S(pts) - Rh @ op.S(pts) @ Rv).max()
print(f"plain subprincipal, max |S' - R*SR|       = {naive:.3e}")

# Covariant version: holds to roundoff.
c0 = covariant_subprincipal(op)(pts)
c1 = covariant_subprincipal(gauged)(pts)
print(f"covariant subprincipal, max |C' - R*CR|   = {np.abs(c1 - Rh @ c0 @ Rv).max():.3e}")

rep = verify_csub_covariance(op, R, pts)
print(f"verify_csub_covariance: pass={rep.passed}, residual {rep.max_residual:.2e}")

# Hence the electromagnetic potential does not see the gauge.
dA = np.abs(extract_potential(gauged)(pts) - extract_potential(op)(pts)).max()
print(f"max |A(R*LR) - A(L)| = {dA:.3e}")
