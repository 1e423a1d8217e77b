import itertools
import math

import numpy as np
import pytest

from isingcause.algebra import mul
from isingcause.classical import (
    CH_ASSIGNMENTS,
    FiniteProbabilitySpace,
    build_def5_model,
    ccs_check,
    censorship_construct,
    classical_ch_value,
    complement,
    cond,
    def5_check,
    def5_model_from_tables,
    epr_ch_value,
    epr_probabilities,
    joint_ccs_check,
    prop1_chain,
    reichenbach_check,
    reichenbach_identity,
    screening_triple,
    setting_pair_gamma,
    arith_lemma_value,
)
from isingcause.errors import DomainError, MalformedGamma, MalformedInput, ZeroConditioningEvent
from isingcause.net import evaluate, spin_projection_A, spin_projection_B, state_rho, two_wing_density
from isingcause.search import STANDARD_DIRECTIONS
from oracle import random_density

SQRT2 = math.sqrt(2)


def random_space(rng, n=8):
    w = rng.random(n)
    return FiniteProbabilitySpace(tuple(range(n)), tuple(w / w.sum()))


def random_event(rng, space):
    return frozenset(a for a in space.atoms if rng.random() < 0.5)


# -- spaces and conditioning ------------------------------------------------------


def test_cond_trivial_examples():
    sp = FiniteProbabilitySpace(("h", "t"), (0.5, 0.5))
    assert cond(sp, sp.omega, sp.omega) == 1
    assert cond(sp, {"h"}, sp.omega) == 0.5


def test_cond_matches_atom_sum():
    rng = np.random.default_rng(0)
    for _ in range(50):
        sp = random_space(rng)
        x, y = random_event(rng, sp), random_event(rng, sp)
        py = sum(sp.weights[a] for a in y)
        if py == 0:
            continue
        expected = sum(sp.weights[a] for a in x & y) / py
        assert cond(sp, x, y) == pytest.approx(expected, abs=1e-15)


def test_zero_conditioning_event():
    sp = FiniteProbabilitySpace((0, 1), (1.0, 0.0))
    with pytest.raises(ZeroConditioningEvent):
        cond(sp, {0}, {1})
    with pytest.raises(ZeroConditioningEvent):
        cond(sp, {0}, frozenset())


def test_space_validation():
    with pytest.raises(MalformedInput):
        FiniteProbabilitySpace((0, 1), (0.5, 0.6))
    with pytest.raises(MalformedInput):
        FiniteProbabilitySpace((0, 0), (0.5, 0.5))
    with pytest.raises(MalformedInput):
        FiniteProbabilitySpace((0, 1), (1.5, -0.5))
    sp = FiniteProbabilitySpace((0, 1), (0.5, 0.5))
    with pytest.raises(MalformedInput):
        sp.prob({2})
    assert complement(sp, {0}) == {1}


# -- Reichenbach common causes ------------------------------------------------------


def test_perfect_common_cause():
    sp, A, B, C = screening_triple(0.5, 1, 1, 0, 0)
    assert reichenbach_check(sp, A, B, C)
    lhs, rhs = reichenbach_identity(sp, A, B, C)
    assert lhs == pytest.approx(0.25, abs=1e-15)
    assert rhs == pytest.approx(0.25, abs=1e-15)


def test_independent_cause_fails_for_correlated_events():
    # A = B with probability 1/2; C is an independent coin
    atoms = list(itertools.product((0, 1), repeat=2))  # (coin, ab)
    sp = FiniteProbabilitySpace(atoms, [0.25] * 4)
    A = B = sp.event(lambda t: t[1] == 1)
    C = sp.event(lambda t: t[0] == 1)
    assert not reichenbach_check(sp, A, B, C)


def test_cause_equal_to_event_inside_other():
    """C = A with A a subset of B screens off; the verdict then rests on relevance."""
    sp = FiniteProbabilitySpace(("x", "y", "z"), (0.25, 0.25, 0.5))
    A, B = frozenset({"x"}), frozenset({"x", "y"})
    assert reichenbach_check(sp, A, B, A)
    sp2 = FiniteProbabilitySpace(("x", "y"), (0.5, 0.5))
    # B = Omega: screening holds but C is not relevant for B
    assert not reichenbach_check(sp2, {"x"}, sp2.omega, {"x"})


def test_identity_independent_cause():
    sp, A, B, C = screening_triple(0.3, 0.4, 0.7, 0.4, 0.7)
    lhs, rhs = reichenbach_identity(sp, A, B, C)
    assert abs(lhs) < 1e-15 and abs(rhs) < 1e-15


def test_identity_on_random_screening_triples():
    rng = np.random.default_rng(1)
    for _ in range(200):
        pc = rng.uniform(0.01, 0.99)
        sp, A, B, C = screening_triple(pc, *rng.random(4))
        lhs, rhs = reichenbach_identity(sp, A, B, C)
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_screening_triple_rejects_bad_probability():
    with pytest.raises(MalformedInput):
        screening_triple(1.2, 0, 0, 0, 0)


def test_ccs_atoms_and_trivial_partition():
    rng = np.random.default_rng(2)
    for _ in range(20):
        sp = random_space(rng)
        A, B = random_event(rng, sp), random_event(rng, sp)
        assert ccs_check(sp, A, B, [frozenset({a}) for a in sp.atoms])
        uncorrelated = abs(sp.prob(A & B) - sp.prob(A) * sp.prob(B)) <= 1e-12
        assert ccs_check(sp, A, B, [sp.omega]) == uncorrelated


def test_def5_partition_is_conditional_joint_ccs():
    rng = np.random.default_rng(3)
    model = build_def5_model(rng.dirichlet(np.ones(3)), (rng.random((3, 2)), rng.random((3, 2))), ([0.5, 0.5], [0.3, 0.7]))
    sp = model.space
    for (m, am), (n, bn) in itertools.product(enumerate(model.a), enumerate(model.b)):
        z = am & bn
        sub_atoms = sorted(z)
        sub = FiniteProbabilitySpace(sub_atoms, [sp.prob({t}) / sp.prob(z) for t in sub_atoms])
        cells = [ck & z for ck in model.C]
        assert joint_ccs_check(sub, [(model.A[m] & z, model.B[n] & z)], cells)


# -- local, non-conspiratorial models -------------------------------------------------


def random_model(rng, K=None, M=2, N=2):
    K = K or int(rng.integers(1, 5))
    inputs = (rng.dirichlet(np.ones(K)), (rng.random((K, M)), rng.random((K, N))), (rng.dirichlet(np.ones(M)), rng.dirichlet(np.ones(N))))
    return inputs, build_def5_model(*inputs)


def ch_from_inputs(inputs, assignment):
    """Atom-free oracle: mix the per-cell products over the cell weights."""
    w, (alpha, beta), _ = inputs
    m, n, mp, np_ = (x - 1 for x in assignment)

    def joint(i, j):
        return float(np.sum(w * alpha[:, i] * beta[:, j]))

    return joint(m, n) + joint(m, np_) + joint(mp, n) - joint(mp, np_) - float(w @ alpha[:, m]) - float(w @ beta[:, n])


def test_deterministic_model_passes():
    alpha = np.array([[1, 0], [0, 1], [1, 1]], float)
    beta = np.array([[0, 1], [1, 1], [0, 0]], float)
    model = build_def5_model([0.2, 0.3, 0.5], (alpha, beta), ([0.5, 0.5], [0.5, 0.5]))
    assert def5_check(model)
    for asg in CH_ASSIGNMENTS:
        v = classical_ch_value(model, asg)
        assert -1 - 1e-12 <= v <= 1e-12
        assert v == pytest.approx(ch_from_inputs(([0.2, 0.3, 0.5], (alpha, beta), None), asg), abs=1e-12)


def test_single_cell_half_model_is_uncorrelated():
    model = build_def5_model([1.0], (np.full((1, 2), 0.5), np.full((1, 2), 0.5)), ([0.5, 0.5], [0.5, 0.5]))
    assert def5_check(model)
    sp = model.space
    for m, n in itertools.product(range(2), repeat=2):
        z = model.a[m] & model.b[n]
        assert cond(sp, model.A[m] & model.B[n], z) == pytest.approx(0.25, abs=1e-15)


def test_no_conspiracy_counterexample():
    """Cell weights that depend on the setting of the left wing."""
    pa, pb = np.array([0.5, 0.5]), np.array([0.5, 0.5])
    cells = np.array([[0.6, 0.3, 0.1], [0.2, 0.3, 0.5]])  # p(C_k | a_m)
    p_joint = np.einsum("m,n,mk->mnk", pa, pb, cells)
    alpha = np.broadcast_to(np.array([[0.9, 0.2, 0.5], [0.1, 0.7, 0.4]])[:, None, :], (2, 2, 3))
    beta = np.broadcast_to(np.array([[0.3, 0.8, 0.6], [0.5, 0.1, 0.9]])[None, :, :], (2, 2, 3))
    model = def5_model_from_tables(p_joint, alpha, beta)
    # atom-sum oracle: p(a_1 b_1 C_1) against p(a_1 b_1) p(C_1)
    lhs = p_joint[0, 0, 0]
    rhs = p_joint[0, 0].sum() * p_joint[:, :, 0].sum()
    assert abs(lhs - rhs) == pytest.approx(0.05, abs=1e-15)  # 0.25*0.6 - 0.25*0.4
    assert model.space.prob(model.a[0] & model.b[0] & model.C[0]) == pytest.approx(lhs, abs=1e-15)
    assert not def5_check(model)


def test_locality_counterexample():
    """The left outcome depends on the right setting."""
    p_joint = np.full((2, 2, 3), 1 / 12)
    alpha = np.empty((2, 2, 3))
    alpha[:, 0, :], alpha[:, 1, :] = 0.2, 0.8
    beta = np.full((2, 2, 3), 0.5)
    model = def5_model_from_tables(p_joint, alpha, beta)
    sp = model.space
    # p(A_1 | a_1 C_1) = (0.2 + 0.8)/2 while p(A_1 | a_1 b_1 C_1) = 0.2
    assert cond(sp, model.A[0], model.a[0] & model.C[0]) == pytest.approx(0.5, abs=1e-15)
    assert cond(sp, model.A[0], model.a[0] & model.b[0] & model.C[0]) == pytest.approx(0.2, abs=1e-15)
    assert not def5_check(model)


def test_random_models_satisfy_ch():
    rng = np.random.default_rng(4)
    for _ in range(200):
        inputs, model = random_model(rng)
        assert def5_check(model)
        for asg in CH_ASSIGNMENTS:
            v = classical_ch_value(model, asg)
            assert -1 - 1e-12 <= v <= 1e-12
            assert v == pytest.approx(ch_from_inputs(inputs, asg), abs=1e-12)


def test_proof_chain_reproduces_ch():
    rng = np.random.default_rng(5)
    for _ in range(100):
        _, model = random_model(rng)
        for asg in CH_ASSIGNMENTS:
            per_cell, total = prop1_chain(model, asg)
            assert all(-1 - 1e-12 <= v <= 1e-12 for v in per_cell if v is not None)
            assert total == pytest.approx(classical_ch_value(model, asg), abs=1e-12)


def test_all_zero_outcomes_give_zero():
    model = build_def5_model([0.5, 0.5], (np.zeros((2, 2)), np.zeros((2, 2))), ([0.5, 0.5], [0.5, 0.5]))
    assert classical_ch_value(model) == 0


def test_build_rejects_malformed():
    with pytest.raises(MalformedInput):
        build_def5_model([0.5, 0.6], (np.zeros((2, 2)), np.zeros((2, 2))), ([0.5, 0.5], [0.5, 0.5]))
    with pytest.raises(MalformedInput):
        build_def5_model([1.0], (np.zeros((2, 2)), np.zeros((1, 2))), ([0.5, 0.5], [0.5, 0.5]))
    with pytest.raises(MalformedInput):
        build_def5_model([1.0], (np.full((1, 2), 1.5), np.zeros((1, 2))), ([0.5, 0.5], [0.5, 0.5]))


# -- arithmetic lemma and EPR ---------------------------------------------------------


def test_arith_examples():
    assert arith_lemma_value(0, 0, 0, 0) == 0
    # 1 + 1 + 1 - 1 - 1 - 1
    assert arith_lemma_value(1, 1, 1, 1) == 0
    # both endpoints of [-1, 0] are attained
    assert arith_lemma_value(1, 0, 1, 0) == -1
    with pytest.raises(DomainError):
        arith_lemma_value(1.1, 0, 0, 0)


def test_arith_bound_random():
    rng = np.random.default_rng(6)
    x = rng.random((20000, 4))
    vals = [arith_lemma_value(*row) for row in x]
    assert min(vals) >= -1 - 1e-12 and max(vals) <= 1e-12


def test_epr_probabilities():
    assert epr_probabilities(0)[2] == 0
    assert epr_probabilities(math.pi / 2)[2] == pytest.approx(0.25, abs=1e-15)
    assert epr_probabilities(math.pi) == pytest.approx((0.5, 0.5, 0.5), abs=1e-15)


def test_epr_ch_at_standard_angles():
    assert epr_ch_value(STANDARD_DIRECTIONS) == pytest.approx(-(1 + SQRT2) / 2, abs=1e-12)


# -- censorship --------------------------------------------------------------------------


def test_censorship_qubit_example():
    rho = np.diag([1.0, 0.0])
    z = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    plus = np.full((2, 2), 0.5)
    x = [plus, np.eye(2) - plus]
    res = censorship_construct(rho, [z, x], [0.5, 0.5])
    assert res.ok
    sp = res.space
    assert cond(sp, res.outcomes[(0, 0)], res.settings[0]) == pytest.approx(1, abs=1e-15)
    assert cond(sp, res.outcomes[(1, 0)], res.settings[1]) == pytest.approx(0.5, abs=1e-15)


def test_censorship_single_family():
    rng = np.random.default_rng(7)
    rho = random_density(rng, 3)
    fam = [np.diag(e) for e in np.eye(3)]
    res = censorship_construct(rho, [fam], [1.0])
    assert res.ok
    for j in range(3):
        assert res.space.prob(res.outcomes[(0, j)]) == pytest.approx(rho[j, j].real, abs=1e-12)


def random_family(rng, dim):
    q, _ = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    groups = np.array_split(rng.permutation(dim), int(rng.integers(1, dim + 1)))
    return [q[:, g] @ q[:, g].conj().T for g in groups if len(g)]


def test_censorship_random_states_and_families():
    rng = np.random.default_rng(8)
    for _ in range(20):
        dim = int(rng.integers(2, 5))
        gamma = [random_family(rng, dim) for _ in range(int(rng.integers(1, 4)))]
        p0 = rng.dirichlet(np.ones(len(gamma)))
        res = censorship_construct(random_density(rng, dim), gamma, p0)
        assert res.ok, res.checks
        assert res.deviation <= 1e-12


def test_censorship_reproduces_lattice_correlations():
    lam = 1.0
    rho = two_wing_density(state_rho(lam))
    res = censorship_construct(rho, setting_pair_gamma(STANDARD_DIRECTIONS), [0.25] * 4)
    assert res.ok
    for q, (m, n) in enumerate([(0, 2), (0, 3), (1, 2), (1, 3)]):
        a, b = STANDARD_DIRECTIONS[m], STANDARD_DIRECTIONS[n]
        lattice = evaluate(state_rho(lam), mul(spin_projection_A(a), spin_projection_B(b))).real
        assert cond(res.space, res.outcomes[(q, 0)], res.settings[q]) == pytest.approx(lattice, abs=1e-12)


def test_censorship_rejects_bad_gamma():
    rho = np.eye(2) / 2
    with pytest.raises(MalformedGamma):
        censorship_construct(rho, [[np.diag([1.0, 0.0])]], [1.0])
    with pytest.raises(MalformedGamma):
        censorship_construct(rho, [[np.eye(2), np.eye(2)]], [1.0])
    with pytest.raises(MalformedGamma):
        censorship_construct(rho, [], [])
    with pytest.raises(MalformedInput):
        censorship_construct(rho, [[np.eye(2)]], [0.0])
