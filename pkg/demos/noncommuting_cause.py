"""A noncommuting joint common cause for the violating correlations.

The candidate C mixes two spin directions c and c' of a third spin W sitting
in the common past of both wings.  Which directions screen off all four
correlations at once?  The residual tables below answer it: the U_0
component of c must vanish, while c' is free.
"""
import numpy as np

from isingcause.search import STANDARD_DIRECTIONS, CandidateC, SearchConfig, standard_pairs, search_noncommuting, verify_prop3
from isingcause.net import state_rho

rng = np.random.default_rng(0)


def random_unit(zero=None):
    v = rng.normal(size=3)
    if zero is not None:
        v[zero] = 0
    return v / np.linalg.norm(v)


for label, zero in (("c_1 = 0", 0), ("c_2 = 0", 1), ("c_3 = 0", 2)):
    worst = max(verify_prop3(STANDARD_DIRECTIONS, CandidateC(random_unit(zero), random_unit()), 1.0).worst for _ in range(20))
    print(f"{label}: worst residual over 20 random candidates {worst:.3e}")

v = verify_prop3(STANDARD_DIRECTIONS, CandidateC((0, 1, 0), (0, 0, 1)), 1.0)
print(f"\nc = (0,1,0), c' = (0,0,1): satisfied={v.satisfied} commuting={v.commuting} trivial={v.trivial}")
for (m, n, k), r in sorted(v.residuals.items()):
    print(f"   pair ({m},{n}) cell {k}: residual {r:.2e}")

res = search_noncommuting(state_rho(1.0), standard_pairs(), SearchConfig(resolution=12))
c1 = {round(c[0], 9) for c, _ in res.solutions}
print(f"\ngrid search: {len(res.solutions)} screening (c, c') pairs; their c_1 values: {sorted(c1)}")
