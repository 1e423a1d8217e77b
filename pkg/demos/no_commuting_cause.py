"""No commuting common cause inside the double cone O_{-1,1}.

Projections commuting with both wings of the four correlated pairs form a
two-dimensional relative commutant spanned by 1 and U_{-1}U_0U_1.  Every
partition built from it leaves a screening residual of at least sqrt(2)/32,
and an optimizer given a large budget finds nothing better.
"""
import math
import time

from isingcause.net import cauchy_interval, state_rho
from isingcause.search import SearchConfig, standard_pairs, search_commuting

t0 = time.perf_counter()
res = search_commuting(state_rho(1.0), standard_pairs(), cauchy_interval(-1, 1), SearchConfig(budget=20000))
print(f"relative commutant dimension: {res.best_params['commutant_dim']} (abelian: {res.best_params['abelian']})")
print(f"best worst-case residual: {res.best_residual:.12f}")
print(f"sqrt(2)/32              : {math.sqrt(2) / 32:.12f}")
print(f"{res.evaluations} evaluations in {time.perf_counter() - t0:.1f} s")
print("best projection:", res.best_params["x"])

single = search_commuting(state_rho(1.0), standard_pairs()[:1], cauchy_interval(-1, 1), SearchConfig(budget=2000))
print(f"\na single pair is easy: residual {single.best_residual:.1e}, trivial cause: {single.verdict.trivial}")
