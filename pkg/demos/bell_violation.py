"""How strongly the lattice state violates the Bell-type inequalities.

The state rho(lambda) correlates the two spin wings with correlation
-lambda/4 <a, b>.  Sweeping lambda shows the CH value crossing -1 at
lambda = 1/sqrt(2), and the Bell maximizer confirms that the two-wing
reduction at lambda = 1 is maximally entangled.
"""
import math

import numpy as np

from isingcause.net import spin_projection_A, spin_projection_B, state_rho, two_wing_density
from isingcause.qcausal import ch_value, chsh_value, correlation, violates_ch
from isingcause.search import STANDARD_DIRECTIONS, bell_maximize

a1, a2, b1, b2 = STANDARD_DIRECTIONS
A = [spin_projection_A(a1), spin_projection_A(a2)]
B = [spin_projection_B(b1), spin_projection_B(b2)]

print("correlations at lambda = 1 (rows a1, a2; columns b1, b2)")
state = state_rho(1.0)
for x in A:
    print("   ", "  ".join(f"{correlation(state, x, y):+.6f}" for y in B))

print("\nlambda     CH         CHSH      violated")
for lam in np.linspace(0, 1, 9):
    st = state_rho(lam)
    ch = ch_value(st, *A, *B)
    print(f"{lam:6.3f}  {ch:+.6f}  {chsh_value(st, *A, *B):+.6f}  {violates_ch(ch)}")
print(f"threshold lambda = 1/sqrt(2) = {1 / math.sqrt(2):.6f}")

beta = bell_maximize(two_wing_density(state))
print(f"\nBell maximum of the two-wing reduction at lambda = 1: {beta:.9f} (sqrt(2) = {math.sqrt(2):.9f})")
