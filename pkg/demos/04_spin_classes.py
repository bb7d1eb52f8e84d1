"""Orientation and time-orientation classes of L, -L, Adj L and -Adj L."""

import numpy as np

from symcalc.em_adjugate import adjugate_operator
from symcalc.harness.catalog import load_scenario
from symcalc.spin_structure import ReferencePair, chi_c, chi_t, classify
from symcalc.symbol_core import standard_points

pts = standard_points()
op = load_scenario("scaled-time").operator()
ref = ReferencePair(op)
adj = adjugate_operator(op)

print(f"{'operator':10s} {'c':>6s} {'t':>8s}   tag")
for label, member in [("L", op), ("-L", -op), ("Adj L", adj), ("-Adj L", -adj)]:
    c = chi_c(ref, member, pts)
    t = chi_t(ref, member, pts)
    tag = classify(ref, member, pts).as_tuple()
    print(f"{label:10s} {np.mean(c):6.2f} {np.mean(t):8.3f}   {tag}")
