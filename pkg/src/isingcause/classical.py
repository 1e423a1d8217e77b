"""Classical probability side: Reichenbach common causes, local hidden-variable
models, the Clauser-Horne bound and Kolmogorovian censorship.

Spaces are finite and enumerated; an event is a ``frozenset`` of atoms.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, MalformedGamma, MalformedInput, ZeroConditioningEvent
from .net import wing_matrix
from .qcausal import CH_ASSIGNMENTS

ZERO_PROB = 1e-15


@dataclass(frozen=True)
class FiniteProbabilitySpace:
    atoms: tuple
    weights: tuple

    def __post_init__(self):
        atoms = tuple(self.atoms)
        weights = tuple(float(w) for w in self.weights)
        if len(atoms) != len(weights):
            raise MalformedInput("atoms and weights differ in length")
        if len(set(atoms)) != len(atoms):
            raise MalformedInput("atoms must be distinct")
        if any(not (w >= 0) for w in weights):
            raise MalformedInput("weights must be nonnegative")
        if abs(math.fsum(weights) - 1) > 1e-12:
            raise MalformedInput(f"weights sum to {math.fsum(weights)!r}, not 1")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "_p", dict(zip(atoms, weights)))

    @property
    def omega(self) -> frozenset:
        return frozenset(self.atoms)

    def event(self, predicate) -> frozenset:
        """Event of all atoms satisfying ``predicate``."""
        return frozenset(a for a in self.atoms if predicate(a))

    def prob(self, event) -> float:
        extra = set(event) - set(self._p)
        if extra:
            raise MalformedInput(f"event contains unknown atoms {sorted(map(repr, extra))[:3]}")
        return math.fsum(self._p[a] for a in event)


def complement(space: FiniteProbabilitySpace, x) -> frozenset:
    return space.omega - frozenset(x)


def cond(space: FiniteProbabilitySpace, x, y) -> float:
    """``p(x | y)`` by the Bayes rule."""
    py = space.prob(y)
    if py <= ZERO_PROB:
        raise ZeroConditioningEvent(f"p(Y) = {py!r}")
    return space.prob(frozenset(x) & frozenset(y)) / py


# -- Reichenbach common causes ------------------------------------------------


def reichenbach_check(space, a, b, c, tol=1e-12) -> bool:
    """Screening off on ``C`` and ``C^perp`` plus positive statistical relevance of ``C`` for both events."""
    cp = complement(space, c)
    ab = frozenset(a) & frozenset(b)
    for z in (c, cp):
        if abs(cond(space, ab, z) - cond(space, a, z) * cond(space, b, z)) > tol:
            return False
    return cond(space, a, c) - cond(space, a, cp) > tol and cond(space, b, c) - cond(space, b, cp) > tol


def reichenbach_identity(space, a, b, c) -> tuple:
    """``(p(AB) - p(A)p(B), p(C)p(C^perp)[p(A|C)-p(A|C^perp)][p(B|C)-p(B|C^perp)])``."""
    cp = complement(space, c)
    lhs = space.prob(frozenset(a) & frozenset(b)) - space.prob(a) * space.prob(b)
    rhs = (
        space.prob(c)
        * space.prob(cp)
        * (cond(space, a, c) - cond(space, a, cp))
        * (cond(space, b, c) - cond(space, b, cp))
    )
    return lhs, rhs


def _screens(space, a, b, cell, tol):
    if space.prob(cell) <= ZERO_PROB:
        return True
    ab = frozenset(a) & frozenset(b)
    return abs(cond(space, ab, cell) - cond(space, a, cell) * cond(space, b, cell)) <= tol


def ccs_check(space, a, b, partition, tol=1e-12) -> bool:
    return all(_screens(space, a, b, cell, tol) for cell in partition)


def joint_ccs_check(space, pairs, partition, tol=1e-12) -> bool:
    return all(ccs_check(space, a, b, partition, tol) for a, b in pairs)


def screening_triple(pc, pa_c, pb_c, pa_cp, pb_cp):
    """Space with ``C`` screening off ``A`` and ``B`` on both sides, built from its conditionals.

    Returns ``(space, A, B, C)``; atoms are ``(in_C, in_A, in_B)``.
    """
    vals = (pc, pa_c, pb_c, pa_cp, pb_cp)
    if any(not (0 <= v <= 1) for v in vals):
        raise MalformedInput(f"probabilities must lie in [0, 1], got {vals!r}")
    atoms, weights = [], []
    for z, pz, pa, pb in ((1, pc, pa_c, pb_c), (0, 1 - pc, pa_cp, pb_cp)):
        for oa, ob in itertools.product((1, 0), repeat=2):
            atoms.append((z, oa, ob))
            weights.append(pz * (pa if oa else 1 - pa) * (pb if ob else 1 - pb))
    space = FiniteProbabilitySpace(atoms, weights)
    return (
        space,
        space.event(lambda t: t[1] == 1),
        space.event(lambda t: t[2] == 1),
        space.event(lambda t: t[0] == 1),
    )


# -- local, non-conspiratorial models -----------------------------------------


@dataclass
class Def5Model:
    """Outcome events ``A[m]``, ``B[n]``, settings ``a[m]``, ``b[n]`` and cells ``C[k]``."""

    space: FiniteProbabilitySpace
    A: list
    B: list
    a: list
    b: list
    C: list

    def __post_init__(self):
        for name, settings in (("a", self.a), ("b", self.b)):
            if abs(math.fsum(self.space.prob(s) for s in settings) - 1) > 1e-12:
                raise MalformedInput(f"setting events {name} do not carry total probability 1")
        cells = list(self.C)
        union = frozenset().union(*cells)
        if union != self.space.omega or sum(len(c) for c in cells) != len(union):
            raise MalformedInput("cells do not partition the sample space")


def def5_model_from_tables(p_joint, alpha, beta) -> Def5Model:
    """Enumerate atoms ``(m, n, k, oA, oB)`` with
    ``p = p_joint[m, n, k] * P(oA | m, n, k) * P(oB | m, n, k)``.

    ``alpha[m, n, k]`` is the probability of ``A_m`` and ``beta[m, n, k]`` that
    of ``B_n``; outcomes are independent given ``(m, n, k)``.  Nothing here
    enforces locality or no-conspiracy, so this also builds counterexamples.
    """
    p_joint = np.asarray(p_joint, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if p_joint.ndim != 3 or alpha.shape != p_joint.shape or beta.shape != p_joint.shape:
        raise MalformedInput("p_joint, alpha and beta must share a shape (M, N, K)")
    if np.any(p_joint < 0) or abs(p_joint.sum() - 1) > 1e-12:
        raise MalformedInput("p_joint must be a probability table")
    for t in (alpha, beta):
        if np.any(t < 0) or np.any(t > 1) or not np.all(np.isfinite(t)):
            raise MalformedInput("outcome conditionals must lie in [0, 1]")
    M, N, K = p_joint.shape
    atoms, weights = [], []
    for m, n, k in itertools.product(range(M), range(N), range(K)):
        pa, pb = alpha[m, n, k], beta[m, n, k]
        for oa, ob in itertools.product((1, 0), repeat=2):
            atoms.append((m, n, k, oa, ob))
            weights.append(p_joint[m, n, k] * (pa if oa else 1 - pa) * (pb if ob else 1 - pb))
    total = math.fsum(weights)
    space = FiniteProbabilitySpace(atoms, [w / total for w in weights])
    return Def5Model(
        space=space,
        A=[space.event(lambda t, m=m: t[0] == m and t[3] == 1) for m in range(M)],
        B=[space.event(lambda t, n=n: t[1] == n and t[4] == 1) for n in range(N)],
        a=[space.event(lambda t, m=m: t[0] == m) for m in range(M)],
        b=[space.event(lambda t, n=n: t[1] == n) for n in range(N)],
        C=[space.event(lambda t, k=k: t[2] == k) for k in range(K)],
    )


def _probability_vector(v, name):
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or len(v) == 0 or np.any(v < 0) or abs(v.sum() - 1) > 1e-12:
        raise MalformedInput(f"{name} must be a probability vector")
    return v


def build_def5_model(k_weights, per_cell_outcome_conditionals, setting_weights) -> Def5Model:
    """Product model: settings independent of cells, outcome ``A_m`` depends on ``(m, k)`` only.

    ``per_cell_outcome_conditionals = (alpha, beta)`` with ``alpha[k, m] =
    p(A_m | a_m C_k)`` and ``beta[k, n] = p(B_n | b_n C_k)``;
    ``setting_weights = (pa, pb)``.
    """
    w = _probability_vector(k_weights, "k_weights")
    try:
        alpha, beta = (np.asarray(t, dtype=float) for t in per_cell_outcome_conditionals)
        pa, pb = (_probability_vector(t, "setting weights") for t in setting_weights)
    except (TypeError, ValueError) as exc:
        raise MalformedInput(str(exc)) from exc
    K, M, N = len(w), len(pa), len(pb)
    if alpha.shape != (K, M) or beta.shape != (K, N):
        raise MalformedInput(f"expected alpha {(K, M)} and beta {(K, N)}, got {alpha.shape}, {beta.shape}")
    p_joint = np.einsum("m,n,k->mnk", pa, pb, w)
    a3 = np.broadcast_to(alpha.T[:, None, :], (M, N, K))
    b3 = np.broadcast_to(beta.T[None, :, :], (M, N, K))
    return def5_model_from_tables(p_joint, a3, b3)


def def5_check(model: Def5Model, tol=1e-12) -> bool:
    """Screening off, both locality conditions and no-conspiracy for every ``(m, n, k)``."""
    sp = model.space
    for (m, am), (n, bn), ck in itertools.product(enumerate(model.a), enumerate(model.b), model.C):
        A, B = model.A[m], model.B[n]
        z = am & bn & ck
        if sp.prob(z) <= ZERO_PROB:
            # no-conspiracy still constrains the weight of the empty cell
            if abs(sp.prob(z) - sp.prob(am & bn) * sp.prob(ck)) > tol:
                return False
            continue
        pa, pb = cond(sp, A, z), cond(sp, B, z)
        if abs(cond(sp, A & B, z) - pa * pb) > tol:
            return False
        if abs(pa - cond(sp, A, am & ck)) > tol:
            return False
        if abs(pb - cond(sp, B, bn & ck)) > tol:
            return False
        if abs(sp.prob(z) - sp.prob(am & bn) * sp.prob(ck)) > tol:
            return False
    return True


def classical_ch_from_probabilities(joint, marg_a, marg_b, assignment=(1, 1, 2, 2)) -> float:
    """CH combination from ``joint[(m, n)] = p(A_m B_n | a_m b_n)`` and the two marginal tables."""
    m, n, mp, np_ = assignment
    if m == mp or n == np_:
        raise MalformedInput(f"assignment {assignment!r} needs m != m' and n != n'")
    return (
        joint[(m, n)]
        + joint[(m, np_)]
        + joint[(mp, n)]
        - joint[(mp, np_)]
        - marg_a[(m, n)]
        - marg_b[(m, n)]
    )


def _setting_tables(model: Def5Model):
    sp = model.space
    joint, ma, mb = {}, {}, {}
    for (m, am), (n, bn) in itertools.product(enumerate(model.a, 1), enumerate(model.b, 1)):
        z = am & bn
        joint[(m, n)] = cond(sp, model.A[m - 1] & model.B[n - 1], z)
        ma[(m, n)] = cond(sp, model.A[m - 1], z)
        mb[(m, n)] = cond(sp, model.B[n - 1], z)
    return joint, ma, mb


def classical_ch_value(model: Def5Model, assignment=(1, 1, 2, 2)) -> float:
    return classical_ch_from_probabilities(*_setting_tables(model), assignment)


def arith_lemma_value(alpha, alpha_p, beta, beta_p) -> float:
    """``a b + a b' + a' b - a' b' - a - b``; lies in ``[-1, 0]`` on the unit cube."""
    vals = (alpha, alpha_p, beta, beta_p)
    if any(not (0 <= v <= 1) for v in vals):
        raise DomainError(f"arguments must lie in [0, 1], got {vals!r}")
    return alpha * beta + alpha * beta_p + alpha_p * beta - alpha_p * beta_p - alpha - beta


def prop1_chain(model: Def5Model, assignment=(1, 1, 2, 2)):
    """Per-cell lemma values and their ``p(C_k)``-weighted sum.

    In cell ``k`` the arguments are ``p(A_m | a_m C_k)``, ``p(A_m' | a_m' C_k)``,
    ``p(B_n | b_n C_k)``, ``p(B_n' | b_n' C_k)``.  For a model passing
    :func:`def5_check` the weighted sum equals :func:`classical_ch_value`.
    """
    sp = model.space
    m, n, mp, np_ = (x - 1 for x in assignment)
    per_cell, total = [], []
    for ck in model.C:
        pk = sp.prob(ck)
        if pk <= ZERO_PROB:
            per_cell.append(None)
            continue
        v = arith_lemma_value(
            cond(sp, model.A[m], model.a[m] & ck),
            cond(sp, model.A[mp], model.a[mp] & ck),
            cond(sp, model.B[n], model.b[n] & ck),
            cond(sp, model.B[np_], model.b[np_] & ck),
        )
        per_cell.append(v)
        total.append(pk * v)
    return per_cell, math.fsum(total)


def epr_probabilities(theta) -> tuple:
    """``(p(A|a b), p(B|a b), p(A B|a b)) = (1/2, 1/2, sin^2(theta/2)/2)`` for the singlet."""
    return 0.5, 0.5, 0.5 * math.sin(theta / 2) ** 2


def epr_ch_value(directions, assignment=(1, 1, 2, 2)) -> float:
    """CH combination of the singlet statistics for directions ``(a1, a2, b1, b2)``."""
    a = [np.asarray(v, float) for v in directions[:2]]
    b = [np.asarray(v, float) for v in directions[2:]]
    joint, ma, mb = {}, {}, {}
    for m, n in itertools.product((1, 2), repeat=2):
        cosang = float(np.clip(a[m - 1] @ b[n - 1], -1, 1))
        pa, pb, pab = epr_probabilities(math.acos(cosang))
        joint[(m, n)], ma[(m, n)], mb[(m, n)] = pab, pa, pb
    return classical_ch_from_probabilities(joint, ma, mb, assignment)


# -- Kolmogorovian censorship ---------------------------------------------------


@dataclass
class CensorshipResult:
    space: FiniteProbabilitySpace
    settings: list  # x_cl^Q
    outcomes: dict  # (q, j) -> X_cl for the j-th atom of family q
    checks: dict = field(default_factory=dict)
    deviation: float = 0.0

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def event_for(self, q: int, members) -> frozenset:
        """Classical event for the sum of atoms ``members`` of family ``q``."""
        return frozenset().union(*(self.outcomes[(q, j)] for j in members)) if members else frozenset()


def _validate_family(fam, dim, tol=1e-10):
    eye = np.eye(dim)
    total = np.zeros((dim, dim), dtype=complex)
    for p in fam:
        if p.shape != (dim, dim):
            raise MalformedGamma(f"projection of shape {p.shape} in a {dim}-dimensional algebra")
        if np.abs(p - p.conj().T).max() > tol or np.abs(p @ p - p).max() > tol:
            raise MalformedGamma("family member is not a projection")
        total += p
    for p, q in itertools.combinations(fam, 2):
        if np.abs(p @ q).max() > tol:
            raise MalformedGamma("family members are not orthogonal")
    if np.abs(total - eye).max() > tol:
        raise MalformedGamma("family does not sum to the unit")


def censorship_construct(rho, gamma, p0, tol=1e-12) -> CensorshipResult:
    """Classical space reproducing ``phi(X) = p(X_cl | x_cl)`` for every family in ``gamma``.

    ``Omega`` is the disjoint union over families ``q`` of their atoms, and
    ``p((q, j)) = p0[q] * phi(P_j)``.  The four defining conditions are
    checked over every subset of every family and recorded in ``checks``.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    if rho.shape != (dim, dim):
        raise MalformedInput("state must be a square matrix")
    gamma = [[np.asarray(p, dtype=complex) for p in fam] for fam in gamma]
    if not gamma or any(not fam for fam in gamma):
        raise MalformedGamma("Gamma must be a nonempty collection of nonempty families")
    for fam in gamma:
        _validate_family(fam, dim)
    p0 = np.asarray(p0, dtype=float)
    if p0.shape != (len(gamma),) or np.any(p0 <= 0) or abs(p0.sum() - 1) > 1e-12:
        raise MalformedInput("p0 must be strictly positive, one weight per family, summing to 1")

    def phi(x):
        return float(np.trace(rho @ x).real)

    atoms, weights = [], []
    for q, fam in enumerate(gamma):
        for j, p in enumerate(fam):
            atoms.append((q, j))
            weights.append(p0[q] * max(phi(p), 0.0))
    space = FiniteProbabilitySpace(atoms, weights)
    settings = [space.event(lambda t, q=q: t[0] == q) for q in range(len(gamma))]
    outcomes = {(q, j): frozenset({(q, j)}) for q, fam in enumerate(gamma) for j in range(len(fam))}
    res = CensorshipResult(space, settings, outcomes)

    cond1 = cond2 = cond3 = cond4 = True
    dev = 0.0
    for q, fam in enumerate(gamma):
        if abs(space.prob(settings[q]) - p0[q]) > tol:
            cond3 = False
        dev = max(dev, abs(space.prob(settings[q]) - p0[q]))
        for r in range(q + 1, len(gamma)):
            if settings[q] & settings[r]:
                cond2 = False
        for size in range(len(fam) + 1):
            for members in itertools.combinations(range(len(fam)), size):
                ev = res.event_for(q, members)
                if not ev <= settings[q]:
                    cond1 = False
                x = sum((fam[j] for j in members), np.zeros((dim, dim), dtype=complex))
                d = abs(phi(x) - cond(space, ev, settings[q]))
                dev = max(dev, d)
                if d > tol:
                    cond4 = False
    res.checks = {"cond1": cond1, "cond2": cond2, "cond3": cond3, "cond4": cond4}
    res.deviation = dev
    return res


def setting_pair_gamma(directions) -> list:
    """Families ``{A B, A B^perp, A^perp B, A^perp B^perp}`` on ``M_2 (x) M_2`` for each setting pair.

    Ordered ``(1,1), (1,2), (2,1), (2,2)``; within a family the first member is ``A_m B_n``.
    """
    eye = np.eye(2)
    out = []
    for m in (0, 1):
        for n in (2, 3):
            pa = wing_matrix(directions[m])
            pb = wing_matrix(directions[n])
            fam = []
            for x in (pa, eye - pa):
                for y in (pb, eye - pb):
                    fam.append(np.kron(x, y))
            out.append(fam)
    return out


__all__ = [
    "CH_ASSIGNMENTS",
    "FiniteProbabilitySpace",
    "complement",
    "cond",
    "reichenbach_check",
    "reichenbach_identity",
    "screening_triple",
    "ccs_check",
    "joint_ccs_check",
    "Def5Model",
    "def5_model_from_tables",
    "build_def5_model",
    "def5_check",
    "classical_ch_from_probabilities",
    "classical_ch_value",
    "arith_lemma_value",
    "prop1_chain",
    "epr_probabilities",
    "epr_ch_value",
    "CensorshipResult",
    "censorship_construct",
    "setting_pair_gamma",
]
