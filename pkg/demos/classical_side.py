"""Classical hidden-variable models and the censorship construction.

Local, non-conspiratorial models keep the CH value inside [-1, 0]; the singlet
statistics at the standard angles reach -(1+sqrt(2))/2.  Yet the quantum
numbers themselves can always be read as classical conditional probabilities,
provided the setting events are part of the classical space.
"""
import math

import numpy as np

from isingcause.classical import (
    build_def5_model,
    censorship_construct,
    classical_ch_value,
    cond,
    def5_check,
    epr_ch_value,
    setting_pair_gamma,
)
from isingcause.net import state_rho, two_wing_density
from isingcause.search import STANDARD_DIRECTIONS

rng = np.random.default_rng(1)
values = []
for _ in range(300):
    k = int(rng.integers(1, 5))
    model = build_def5_model(rng.dirichlet(np.ones(k)), (rng.random((k, 2)), rng.random((k, 2))), ([0.5, 0.5], [0.5, 0.5]))
    assert def5_check(model)
    values.append(classical_ch_value(model))
print(f"300 local models: CH in [{min(values):.4f}, {max(values):.4f}]")
print(f"singlet statistics: CH = {epr_ch_value(STANDARD_DIRECTIONS):.6f}, -(1+sqrt(2))/2 = {-(1 + math.sqrt(2)) / 2:.6f}")

res = censorship_construct(two_wing_density(state_rho(1.0)), setting_pair_gamma(STANDARD_DIRECTIONS), [0.25] * 4)
print(f"\ncensorship conditions: {res.checks}")
for q, (m, n) in enumerate([(1, 1), (1, 2), (2, 1), (2, 2)]):
    p = cond(res.space, res.outcomes[(q, 0)], res.settings[q])
    print(f"   p(A_{m} B_{n} | a_{m} b_{n}) = {p:.6f}")
