import math

import numpy as np
import pytest

from isingcause.algebra import ONE, U, is_projection
from isingcause.errors import BudgetExhausted, MalformedInput, NotUnitVector, UnsupportedRegion
from isingcause.net import MinimalDoubleCone, Region, cauchy_interval, evaluate, state_rho
from isingcause.search import (
    STANDARD_DIRECTIONS,
    SINGLET_DENSITY,
    CandidateC,
    SearchConfig,
    bell_maximize,
    bell_value,
    build_candidate,
    clip_contraction,
    correlation_tensor,
    hermitian_basis,
    standard_pairs,
    search_commuting,
    search_noncommuting,
    sphere_grid,
    verify_prop3,
)
from oracle import Dense, random_density, random_unit

SQRT2 = math.sqrt(2)
# measured by enumerating every projection of the relative commutant of the
# four standard pairs in O_{-1,1} (span{1, U_{-1}U_0U_1}); equals sqrt(2)/32
COMMUTING_FLOOR = 0.044194173824159216


def circle_point(rng, zero_index):
    v = rng.normal(size=3)
    v[zero_index] = 0
    return v / np.linalg.norm(v)


# -- candidate family ---------------------------------------------------------------


def test_candidate_collapses_when_c_equals_c_prime():
    c = build_candidate(CandidateC((1, 0, 0), (1, 0, 0)))
    assert c == 0.5 * (ONE + U(0))


def test_candidate_is_projection_with_half_weight():
    rng = np.random.default_rng(0)
    G = Dense(-1, 1)
    for _ in range(20):
        c, cp = random_unit(rng), random_unit(rng)
        cand = build_candidate(CandidateC(c, cp))
        assert is_projection(cand, 1e-12)
        lam = rng.random()
        assert evaluate(state_rho(lam), cand).real == pytest.approx(0.5, abs=1e-14)
        np.testing.assert_allclose(G.of(cand), G.C(c, cp), atol=1e-14)
        assert G.tr(G.rho(lam) @ G.C(c, cp)).real == pytest.approx(0.5, abs=1e-12)


def test_candidate_rejects_non_unit():
    with pytest.raises(NotUnitVector):
        CandidateC((1, 1, 0), (1, 0, 0))


# -- verify_prop3: values frozen against the dense oracle -----------------------------


def test_u0_u_half_candidate_does_not_screen():
    """c = (1,0,0), c' = (0,0,1): the oracle gives worst residual sqrt(2)/32."""
    G = Dense(-1, 1)
    oracle = G.joint_residuals(1.0, STANDARD_DIRECTIONS, (1, 0, 0), (0, 0, 1))
    assert oracle == pytest.approx(SQRT2 / 32, abs=1e-14)
    v = verify_prop3(STANDARD_DIRECTIONS, CandidateC((1, 0, 0), (0, 0, 1)), 1.0)
    assert not v.satisfied
    assert v.worst == pytest.approx(oracle, abs=1e-14)


def test_c2_equal_one_screens():
    G = Dense(-1, 1)
    assert G.joint_residuals(1.0, STANDARD_DIRECTIONS, (0, 1, 0), (0, 0, 1)) < 1e-15
    v = verify_prop3(STANDARD_DIRECTIONS, CandidateC((0, 1, 0), (0, 0, 1)), 1.0)
    assert v.satisfied and not v.commuting and not v.trivial


def test_tracial_state_screens_trivially():
    v = verify_prop3(STANDARD_DIRECTIONS, CandidateC((1, 0, 0), (0, 0, 1)), 0.0)
    assert v.satisfied and v.worst == 0


def test_c1_zero_family_is_joint_common_cause():
    """Every (c, c') with c_1 = 0 screens off all four pairs, for every lambda."""
    rng = np.random.default_rng(1)
    for _ in range(15):
        c, cp, lam = circle_point(rng, 0), random_unit(rng), rng.random()
        v = verify_prop3(STANDARD_DIRECTIONS, CandidateC(c, cp), lam)
        assert v.satisfied and v.worst < 1e-10
        assert not v.commuting and not v.trivial


def test_c1_zero_family_for_other_equatorial_directions():
    rng = np.random.default_rng(2)
    for _ in range(10):
        dirs = [circle_point(rng, 2) for _ in range(4)]
        c, cp = circle_point(rng, 0), random_unit(rng)
        assert verify_prop3(dirs, CandidateC(c, cp), 1.0).satisfied


def test_residuals_agree_with_oracle_off_the_family():
    rng = np.random.default_rng(3)
    G = Dense(-1, 1)
    for _ in range(8):
        c, cp, lam = circle_point(rng, 1), random_unit(rng), rng.uniform(0.5, 1)
        v = verify_prop3(STANDARD_DIRECTIONS, CandidateC(c, cp), lam)
        assert v.worst == pytest.approx(G.joint_residuals(lam, STANDARD_DIRECTIONS, c, cp), abs=1e-13)


# -- grid search ----------------------------------------------------------------------


def test_sphere_grid_counts_poles_once():
    angles, vecs = sphere_grid(6)
    assert len(vecs) == 2 + 4 * 6
    np.testing.assert_allclose(np.linalg.norm(vecs, axis=1), 1)
    assert sum(np.allclose(v, (0, 0, 1)) for v in vecs) == 1
    assert sum(np.allclose(v, (0, 0, -1)) for v in vecs) == 1
    assert len(sphere_grid(2)[1]) == 2


def test_search_config_validation():
    with pytest.raises(MalformedInput):
        SearchConfig(resolution=1)
    with pytest.raises(MalformedInput):
        SearchConfig(budget=0)


@pytest.fixture(scope="module")
def noncommuting_run():
    return search_noncommuting(state_rho(1), standard_pairs(), SearchConfig(resolution=24))


def test_noncommuting_search_finds_solution(noncommuting_run):
    r = noncommuting_run
    assert r.best_residual < 1e-10
    assert r.verdict.satisfied and not r.verdict.commuting and not r.verdict.trivial
    assert r.evaluations >= (2 + 22 * 24) ** 2
    assert r.solutions


def test_noncommuting_solutions_mirror_c3(noncommuting_run):
    def key(v):
        return tuple(np.round(np.asarray(v, float), 9) + 0.0)

    sols = {(key(c), key(cp)) for c, cp in noncommuting_run.solutions}
    for c, cp in sols:
        assert (key((c[0], c[1], -c[2])), cp) in sols


def test_noncommuting_search_tracial_state():
    r = search_noncommuting(state_rho(0), standard_pairs(), SearchConfig(resolution=6))
    assert r.best_residual == 0
    assert len(r.solutions) == 26 ** 2


def test_noncommuting_search_deterministic():
    cfg = SearchConfig(resolution=8, seed=3)
    a = search_noncommuting(state_rho(0.9), standard_pairs(), cfg)
    b = search_noncommuting(state_rho(0.9), standard_pairs(), cfg)
    assert a.best_residual == b.best_residual
    assert a.best_params == b.best_params
    assert a.solutions == b.solutions and a.evaluations == b.evaluations


# -- commuting search -----------------------------------------------------------------


def test_hermitian_basis_starts_with_unit():
    basis = hermitian_basis([ONE + U(0), 1j * U(0)])
    assert len(basis) == 2
    assert basis[0] == ONE
    for b in basis:
        assert b == b.H


def test_commuting_search_floor():
    r = search_commuting(state_rho(1), standard_pairs(), cauchy_interval(-1, 1), SearchConfig(budget=3000))
    assert r.best_params["commutant_dim"] == 2
    assert r.best_params["abelian"]
    assert r.best_residual == pytest.approx(COMMUTING_FLOOR, abs=1e-12)
    assert r.best_residual > 1e-3
    assert not r.verdict.satisfied and r.verdict.commuting


def test_commuting_search_single_pair_finds_trivial_cause():
    pairs = standard_pairs()[:1]
    r = search_commuting(state_rho(1), pairs, cauchy_interval(-1, 1), SearchConfig(budget=2000))
    assert r.best_residual < 1e-10
    assert r.verdict.satisfied and r.verdict.commuting and r.verdict.trivial


def test_commuting_search_tracial_state():
    r = search_commuting(state_rho(0), standard_pairs(), cauchy_interval(-1, 1), SearchConfig(budget=500))
    assert r.best_residual == 0


def test_commuting_search_unsupported_ambient():
    with pytest.raises(UnsupportedRegion):
        search_commuting(state_rho(1), standard_pairs(), Region(frozenset({MinimalDoubleCone.at(2, 0)})))


def test_commuting_search_deterministic():
    cfg = SearchConfig(budget=600, seed=5)
    a = search_commuting(state_rho(1), standard_pairs()[:2], cauchy_interval(-1, 1), cfg)
    b = search_commuting(state_rho(1), standard_pairs()[:2], cauchy_interval(-1, 1), cfg)
    assert a.best_residual == b.best_residual and a.evaluations == b.evaluations
    assert a.best_params["x"] == b.best_params["x"]


# -- Bell maximizer ---------------------------------------------------------------------


def test_singlet_reaches_tsirelson():
    assert bell_maximize("singlet", config=SearchConfig(budget=4000)) == pytest.approx(SQRT2, abs=1e-4)


def test_lattice_singlet_matches():
    from isingcause.net import two_wing_density

    rho = two_wing_density(state_rho(1))
    assert bell_maximize(rho) == pytest.approx(SQRT2, abs=1e-4)
    assert bell_maximize(two_wing_density(state_rho(0))) == pytest.approx(1, abs=1e-9)


def test_product_states_do_not_violate():
    rng = np.random.default_rng(6)
    for _ in range(20):
        rho = np.kron(random_density(rng, 2), random_density(rng, 2))
        assert bell_maximize(rho, config=SearchConfig(budget=800, restarts=4)) <= 1 + 1e-6


def test_abelian_side_does_not_violate():
    rng = np.random.default_rng(7)
    assert bell_maximize("singlet", sides=("abelian", "full")) <= 1 + 1e-6
    for _ in range(10):
        rho = random_density(rng, 4, rank=1)
        assert bell_maximize(rho, sides=("full", "abelian"), config=SearchConfig(budget=800, restarts=4)) <= 1 + 1e-6


def test_bell_value_matches_tensor_form():
    rng = np.random.default_rng(8)
    rho = random_density(rng, 4)
    T = correlation_tensor(rho)
    for _ in range(10):
        x1, x2, y1, y2 = (clip_contraction(rng.normal(size=4)) for _ in range(4))
        tensor = 0.5 * (x1 @ T @ (y1 + y2) + x2 @ T @ (y1 - y2))
        assert bell_value(rho, x1, x2, y1, y2) == pytest.approx(tensor, abs=1e-12)


def test_clip_contraction_feasible():
    rng = np.random.default_rng(9)
    for _ in range(50):
        x = clip_contraction(3 * rng.normal(size=4))
        assert abs(x[0]) + np.linalg.norm(x[1:]) <= 1 + 1e-12
        m = x[0] * np.eye(2) + x[3] * np.diag([1, -1])
        assert np.abs(np.linalg.eigvalsh(m)).max() <= 1 + 1e-12


def test_bell_budget_exhausted_carries_best():
    with pytest.raises(BudgetExhausted) as info:
        bell_maximize(SINGLET_DENSITY, config=SearchConfig(budget=1, restarts=1))
    assert 0 <= info.value.best <= SQRT2 + 1e-9


def test_bell_rejects_unknown_inputs():
    with pytest.raises(MalformedInput):
        bell_maximize("ghz")
    with pytest.raises(MalformedInput):
        bell_maximize("singlet", sides=("full", "diagonal"))
    with pytest.raises(MalformedInput):
        correlation_tensor(np.eye(2))
