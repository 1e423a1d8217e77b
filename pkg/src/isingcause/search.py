"""Candidate common causes, grid/optimizer searches and the Bell maximizer.

Every residual evaluated here is a quadratic form in the real coordinates of
a cell.  If ``C = sum_a v_a K_a`` with self-adjoint ``K_a`` then

    phi(C X C) = v^T T_X v,   T_X[a, b] = Re phi(K_a X K_b)

for self-adjoint ``X``.  The ``T_X`` are computed once with the exact engine
and the searches then run on small dense arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize

from .algebra import ONE, AlgebraElement, U, mul, rep
from .errors import BudgetExhausted, MalformedInput
from .net import (
    W_TRIPLE,
    Region,
    _unit,
    commutant_in,
    evaluate,
    local_window,
    spin_element,
    spin_projection_A,
    spin_projection_B,
    state_rho,
)
from .qcausal import DEFAULT_TOL, CausalVerdict, PartitionOfUnit, perp, verify_joint_ccs

SQRT2 = math.sqrt(2.0)

STANDARD_DIRECTIONS = (
    (0.0, 1.0, 0.0),
    (1.0, 0.0, 0.0),
    (1 / SQRT2, 1 / SQRT2, 0.0),
    (-1 / SQRT2, 1 / SQRT2, 0.0),
)


@dataclass(frozen=True)
class CandidateC:
    c: tuple
    c_prime: tuple

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(float(x) for x in _unit(self.c)))
        object.__setattr__(self, "c_prime", tuple(float(x) for x in _unit(self.c_prime)))


@dataclass(frozen=True)
class SearchConfig:
    resolution: int = 24
    budget: int = 2000
    seed: int = 0
    tol: float = DEFAULT_TOL
    restarts: int = 16

    def __post_init__(self):
        if int(self.resolution) != self.resolution or self.resolution < 2:
            raise MalformedInput(f"resolution must be an integer >= 2, got {self.resolution!r}")
        if int(self.budget) != self.budget or self.budget < 1:
            raise MalformedInput(f"budget must be an integer >= 1, got {self.budget!r}")
        if not self.tol > 0:
            raise MalformedInput(f"tolerance must be positive, got {self.tol!r}")
        if self.restarts < 1:
            raise MalformedInput("restarts must be >= 1")


@dataclass
class SearchResult:
    best_residual: float
    best_params: dict
    evaluations: int
    verdict: CausalVerdict | None = None
    solutions: list = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.verdict is not None and self.verdict.satisfied


# -- the candidate family ------------------------------------------------------

_CENTRAL = U(-0.5) * U(0.5)


def build_candidate(cand: CandidateC) -> AlgebraElement:
    """Projection ``(1+Z)(1+c.W)/4 + (1-Z)(1+c'.W)/4`` with ``Z = U_{-1/2} U_{1/2}``."""
    if not isinstance(cand, CandidateC):
        cand = CandidateC(*cand)
    up = 0.25 * (ONE + _CENTRAL)
    down = 0.25 * (ONE - _CENTRAL)
    return mul(up, ONE + spin_element(cand.c, W_TRIPLE)) + mul(
        down, ONE + spin_element(cand.c_prime, W_TRIPLE)
    )


def standard_pairs(directions=STANDARD_DIRECTIONS) -> list:
    """The four labelled pairs ``((m, n), A_m, B_n)`` for directions ``(a1, a2, b1, b2)``."""
    if len(directions) != 4:
        raise MalformedInput("expected four direction vectors a1, a2, b1, b2")
    a = [spin_projection_A(v) for v in directions[:2]]
    b = [spin_projection_B(v) for v in directions[2:]]
    return [((m + 1, n + 1), a[m], b[n]) for m in range(2) for n in range(2)]


def verify_prop3(directions, cand: CandidateC, lam=1.0, tol=DEFAULT_TOL) -> CausalVerdict:
    c = build_candidate(cand)
    return verify_joint_ccs(state_rho(lam), standard_pairs(directions), PartitionOfUnit.binary(c, tol), tol)


# -- quadratic residual forms --------------------------------------------------


def _events(a, b):
    ap, bp = perp(a), perp(b)
    # order: AB, A'B', AB', A'B  -> residual q0*q1 - q2*q3
    return (mul(a, b), mul(ap, bp), mul(a, bp), mul(ap, b))


def _normalize_pairs(pairs):
    out = []
    for j, p in enumerate(pairs):
        if len(p) == 3:
            out.append((tuple(p[0]), p[1], p[2]))
        else:
            out.append(((0, j), p[0], p[1]))
    out.sort(key=lambda t: t[0])
    return out


def residual_forms(state, pairs, basis) -> np.ndarray:
    """Array ``T[p, e, a, b] = Re phi(K_a X_{p,e} K_b)`` (symmetrized) for self-adjoint ``K``."""
    labelled = _normalize_pairs(pairs)
    d = len(basis)
    forms = np.zeros((len(labelled), 4, d, d))
    for p, (_, a, b) in enumerate(labelled):
        for e, x in enumerate(_events(a, b)):
            left = [mul(k, x) for k in basis]
            for i in range(d):
                for j in range(i, d):
                    v = evaluate(state, mul(left[i], basis[j])).real
                    forms[p, e, i, j] = forms[p, e, j, i] = v
    return forms


def _worst_residual(forms, cells) -> np.ndarray:
    """Worst residual over pairs and cells; ``cells`` has shape (n_cells, N, d)."""
    worst = None
    for v in cells:
        q = np.einsum("na,peab,nb->npe", v, forms, v, optimize=True)
        r = np.abs(q[..., 0] * q[..., 1] - q[..., 2] * q[..., 3]).max(axis=1)
        worst = r if worst is None else np.maximum(worst, r)
    return worst


# -- noncommuting candidate search ------------------------------------------------------


def _candidate_basis():
    up = 0.25 * (ONE + _CENTRAL)
    down = 0.25 * (ONE - _CENTRAL)
    return [0.5 * ONE] + [mul(up, w) for w in W_TRIPLE] + [mul(down, w) for w in W_TRIPLE]


def sphere_grid(resolution: int):
    """Unit vectors on a (polar, azimuth) grid with each pole included once.

    Returns ``(angles, vectors)``; angles are ``(theta, phi)`` rows.
    """
    r = int(resolution)
    angles = [(0.0, 0.0)]
    for j in range(1, r - 1):
        theta = math.pi * j / (r - 1)
        for k in range(r):
            angles.append((theta, 2 * math.pi * k / r))
    angles.append((math.pi, 0.0))
    angles = np.array(angles)
    return angles, _angles_to_vec(angles)


def _angles_to_vec(angles):
    angles = np.atleast_2d(angles)
    th, ph = angles[:, 0], angles[:, 1]
    return np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=1)


def _cells_from_vectors(c, cp):
    n = c.shape[0]
    one = np.ones((n, 1))
    return np.stack([np.hstack([one, c, cp]), np.hstack([one, -c, -cp])])


def search_noncommuting(state, pairs, config: SearchConfig = SearchConfig()) -> SearchResult:
    """Grid over ``(c, c')`` on ``S^2 x S^2`` plus coordinate-descent refinement.

    ``solutions`` lists every grid point with residual below ``config.tol`` as
    ``(c, c')`` tuples in grid order.
    """
    forms = residual_forms(state, pairs, _candidate_basis())
    angles, vecs = sphere_grid(config.resolution)
    g = len(vecs)
    evaluations = 0
    best_val, best_idx = math.inf, None
    solutions = []
    for i in range(g):
        c = np.repeat(vecs[i : i + 1], g, axis=0)
        res = _worst_residual(forms, _cells_from_vectors(c, vecs))
        evaluations += g
        j = int(np.argmin(res))
        if res[j] < best_val:
            best_val, best_idx = float(res[j]), (i, j)
        for jj in np.flatnonzero(res < config.tol):
            solutions.append((tuple(vecs[i].tolist()), tuple(vecs[jj].tolist())))

    # coordinate descent on the four angles from the best grid point
    x = np.concatenate([angles[best_idx[0]], angles[best_idx[1]]])

    def objective(p):
        c = _angles_to_vec(p[:2])
        cp = _angles_to_vec(p[2:])
        return float(_worst_residual(forms, _cells_from_vectors(c, cp))[0])

    fx = objective(x)
    evaluations += 1
    step = math.pi / (config.resolution - 1)
    remaining = config.budget
    while step > 1e-9 and remaining > 0 and fx > 0:
        improved = False
        for k in range(4):
            for s in (step, -step):
                trial = x.copy()
                trial[k] += s
                ft = objective(trial)
                evaluations += 1
                remaining -= 1
                if ft < fx:
                    x, fx, improved = trial, ft, True
                    break
        if not improved:
            step /= 2
    if fx < best_val:
        best_val = fx
        c, cp = _angles_to_vec(x[:2])[0], _angles_to_vec(x[2:])[0]
    else:
        c, cp = vecs[best_idx[0]], vecs[best_idx[1]]
    cand = CandidateC(tuple(c / np.linalg.norm(c)), tuple(cp / np.linalg.norm(cp)))
    verdict = verify_joint_ccs(state, pairs, PartitionOfUnit.binary(build_candidate(cand)), config.tol)
    return SearchResult(
        best_residual=float(best_val),
        best_params={"c": cand.c, "c_prime": cand.c_prime},
        evaluations=evaluations,
        verdict=verdict,
        solutions=solutions,
    )


# -- commuting search ------------------------------------------------------------


def hermitian_basis(elements, tol=1e-10) -> list:
    """Real basis of the self-adjoint part of ``span(elements)``, starting with the unit when present.

    The span must be closed under the adjoint (true for commutants).
    """
    cands = []
    for e in elements:
        cands.append(0.5 * (e + e.H))
        cands.append((-0.5j) * (e - e.H))
    monos = sorted({m for e in cands for m in e.terms}, key=lambda m: (len(m), m))
    if not monos:
        return []
    idx = {m: k for k, m in enumerate(monos)}

    def coords(e):
        z = np.zeros(len(monos), dtype=complex)
        for m, c in e.terms.items():
            z[idx[m]] = c
        return np.concatenate([z.real, z.imag])

    mat = np.array([coords(e) for e in cands])
    rows = []
    if () in idx:
        unit = coords(ONE)
        if np.linalg.matrix_rank(np.vstack([mat, unit])) == np.linalg.matrix_rank(mat, tol=tol):
            rows.append(unit)
            mat = mat - np.outer(mat @ unit, unit)
    u, s, vt = np.linalg.svd(mat, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0] if len(s) else 1.0)))
    rows.extend(vt[:rank])
    out = []
    n = len(monos)
    for r in rows:
        z = r[:n] + 1j * r[n:]
        out.append(AlgebraElement({m: c for m, c in zip(monos, z) if abs(c) > 1e-13}))
    return out


def _pair_elements(pairs):
    out = []
    for p in pairs:
        out.extend(p[-2:])
    return out


def _coeff_matrix(elements, monos):
    idx = {m: k for k, m in enumerate(monos)}
    mat = np.zeros((len(elements), len(monos)), dtype=complex)
    for r, e in enumerate(elements):
        for m, c in e.terms.items():
            mat[r, idx[m]] = c
    return mat


def _minimal_projections(basis, products, mats, rng, tol=1e-9):
    """Minimal projections of an abelian commutant as dense matrices, or ``None`` if nonabelian."""
    d = len(basis)
    for i in range(d):
        for j in range(i + 1, d):
            if (products[i][j] - products[j][i]).norm1() > tol:
                return None
    # a generic self-adjoint element separates the minimal projections
    h = np.tensordot(rng.normal(size=d), mats, axes=1)
    h = 0.5 * (h + h.conj().T)
    w, v = scipy.linalg.eigh(h)
    groups, start = [], 0
    for k in range(1, len(w) + 1):
        if k == len(w) or w[k] - w[k - 1] > 1e-6:
            groups.append(v[:, start:k] @ v[:, start:k].conj().T)
            start = k
    if len(groups) != d:
        return None
    return groups


def search_commuting(state, pairs, ambient: Region, config: SearchConfig = SearchConfig()) -> SearchResult:
    """Look for a commuting joint common cause ``{x, 1 - x}`` inside ``A(ambient)``.

    ``x`` ranges over self-adjoint elements of the relative commutant of the
    pair events.  The objective is the worst screening residual plus the
    projection defect ``||x^2 - x||`` (coefficient 2-norm, i.e. normalized
    Hilbert-Schmidt).  Every local optimum is snapped to the spectral
    projection onto eigenvalues above 1/2 and re-scored exactly; the result
    reports the best snapped projection.
    """
    window = local_window(ambient)
    comm = commutant_in(_pair_elements(pairs), ambient)
    basis = hermitian_basis(comm)
    d = len(basis)
    forms = residual_forms(state, pairs, basis)
    e0 = np.zeros(d)
    e0[0] = 1.0  # basis[0] is the unit

    products = [[mul(basis[i], basis[j]) for j in range(d)] for i in range(d)]
    monos = sorted(
        {m for row in products for p in row for m in p.terms} | {m for b in basis for m in b.terms},
        key=lambda m: (len(m), m),
    )
    prod_coeffs = _coeff_matrix([p for row in products for p in row], monos).reshape(d, d, -1)
    lin_coeffs = _coeff_matrix(basis, monos)
    mats = np.array([rep(b, window) for b in basis])

    evaluations = 0

    def cells(t):
        t = np.atleast_2d(t)
        return np.stack([t, e0 - t])

    def defect(t):
        sq = np.einsum("i,j,ijm->m", t, t, prod_coeffs)
        return float(np.linalg.norm(sq - t @ lin_coeffs))

    def objective(t):
        nonlocal evaluations
        evaluations += 1
        return float(_worst_residual(forms, cells(t))[0]) + defect(t)

    dim = mats.shape[1]
    gram = np.einsum("aij,bij->ab", mats.conj(), mats).real / dim

    def coords(proj):
        # coordinates of a self-adjoint matrix in the Hermitian basis (real by construction)
        return np.linalg.solve(gram, np.einsum("aij,ij->a", mats.conj(), proj).real / dim)

    def snap(t):
        h = np.tensordot(t, mats, axes=1)
        h = 0.5 * (h + h.conj().T)
        w, v = scipy.linalg.eigh(h)
        keep = v[:, w > 0.5]
        return coords(keep @ keep.conj().T)

    rng = np.random.default_rng(config.seed)
    best_val, best_t = math.inf, e0.copy()

    def consider(ts):
        nonlocal best_val, best_t
        val = float(_worst_residual(forms, cells(ts))[0])
        if val < best_val - 1e-15:
            best_val, best_t = val, ts

    # exhaustive phase: in an abelian commutant every projection is a sum of minimal ones
    minimal = _minimal_projections(basis, products, mats, rng)
    enumerated = 0
    if minimal is not None and 2 ** (len(minimal) - 1) <= config.budget:
        for mask in range(2 ** (len(minimal) - 1)):
            proj = sum((minimal[k] for k in range(len(minimal)) if mask >> k & 1), np.zeros_like(mats[0]))
            consider(coords(proj))
            evaluations += 1
            enumerated += 1

    starts = 0
    while evaluations < config.budget and best_val > 1e-15:
        # start on the projection manifold: spectral projection of a random element
        t0 = snap(rng.normal(size=d) + 0.5 * e0)
        starts += 1
        left = config.budget - evaluations
        res = scipy.optimize.minimize(
            objective,
            t0,
            method="Nelder-Mead",
            options={"maxfev": max(1, min(left, 200 * d)), "xatol": 1e-12, "fatol": 1e-15},
        )
        consider(t0)
        consider(snap(res.x))

    x = AlgebraElement()
    for c, b in zip(best_t, basis):
        x = x + float(c) * b
    x = AlgebraElement({m: c for m, c in x.terms.items() if abs(c) > 1e-12})
    try:
        partition = PartitionOfUnit.binary(x, 1e-9)
        verdict = verify_joint_ccs(state, pairs, partition, config.tol)
    except Exception:  # snapped element failed exact validation; report without verdict
        verdict = None
    return SearchResult(
        best_residual=float(best_val),
        best_params={
            "x": x,
            "commutant_dim": len(comm),
            "hermitian_dim": d,
            "abelian": minimal is not None,
            "enumerated": enumerated,
            "starts": starts,
        },
        evaluations=evaluations,
        verdict=verdict,
    )


# -- Bell operator maximizer -----------------------------------------------------

PAULIS = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]]),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

SINGLET = np.array([0, 1, -1, 0], dtype=complex) / SQRT2
SINGLET_DENSITY = np.outer(SINGLET, SINGLET.conj())


def correlation_tensor(rho: np.ndarray) -> np.ndarray:
    """``T[mu, nu] = tr(rho sigma_mu (x) sigma_nu)`` for a 4x4 density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise MalformedInput(f"expected a 4x4 density matrix, got shape {rho.shape}")
    return np.array([[np.trace(rho @ np.kron(p, q)).real for q in PAULIS] for p in PAULIS])


def contraction(x) -> np.ndarray:
    """Matrix ``x0 1 + x . sigma`` of a parameter 4-vector."""
    return sum(c * p for c, p in zip(x, PAULIS))


def bell_value(rho, x1, x2, y1, y2) -> float:
    """``phi(R)`` with ``R = (X1(Y1+Y2) + X2(Y1-Y2))/2``, computed densely."""
    X1, X2, Y1, Y2 = (contraction(v) for v in (x1, x2, y1, y2))
    r = 0.5 * (np.kron(X1, Y1 + Y2) + np.kron(X2, Y1 - Y2))
    return float(np.trace(np.asarray(rho) @ r).real)


def clip_contraction(x) -> np.ndarray:
    """Radially rescale into ``|x0| + ||x|| <= 1``."""
    x = np.asarray(x, dtype=float)
    n = abs(x[0]) + np.linalg.norm(x[1:])
    return x / n if n > 1 else x


def _best_response(g, mask):
    """Exact maximizer of ``g . x`` over the contraction set (restricted by ``mask``)."""
    g = g * mask
    gv = np.linalg.norm(g[1:])
    out = np.zeros(4)
    if abs(g[0]) >= gv:
        out[0] = 1.0 if g[0] >= 0 else -1.0
    else:
        out[1:] = g[1:] / gv
    return out


_MASKS = {"full": np.ones(4), "abelian": np.array([1.0, 0.0, 0.0, 1.0])}


def bell_maximize(state="singlet", sides=("full", "full"), config: SearchConfig = SearchConfig(), return_args=False):
    """``beta = sup |phi(R)|`` over self-adjoint contractions on a 2x2 (x) 2x2 split.

    ``state`` is a 4x4 density matrix or ``"singlet"``; ``sides`` picks
    ``"full"`` (all of M_2) or ``"abelian"`` (diagonal matrices) per wing.
    Multi-start projected gradient ascent with radial clipping, followed by a
    best-response polish, for both signs of ``phi(R)``.  ``config.budget``
    bounds the total number of iterations (ascent plus polish); if no start
    converges within its share, :class:`BudgetExhausted` carries the best value.
    """
    if isinstance(state, str):
        if state != "singlet":
            raise MalformedInput(f"unknown named state {state!r}")
        state = SINGLET_DENSITY
    T = correlation_tensor(state)
    try:
        ma, mb = (_MASKS[s] for s in sides)
    except KeyError as exc:
        raise MalformedInput(f"unknown side parametrization {exc.args[0]!r}") from None
    rng = np.random.default_rng(config.seed)

    def value(x1, x2, y1, y2):
        return 0.5 * (x1 @ T @ (y1 + y2) + x2 @ T @ (y1 - y2))

    per_start = max(1, config.budget // (2 * config.restarts))
    best, best_args, converged = -math.inf, None, False
    for sign in (1.0, -1.0):
        for _ in range(config.restarts):
            x1, x2 = (clip_contraction(rng.normal(size=4) * ma) for _ in range(2))
            y1, y2 = (clip_contraction(rng.normal(size=4) * mb) for _ in range(2))
            f = sign * value(x1, x2, y1, y2)
            eta = 0.5
            ok = False
            used = 0
            for _ in range(max(1, per_start // 2)):
                used += 1
                gx1 = 0.5 * sign * (T @ (y1 + y2))
                gx2 = 0.5 * sign * (T @ (y1 - y2))
                gy1 = 0.5 * sign * (T.T @ (x1 + x2))
                gy2 = 0.5 * sign * (T.T @ (x1 - x2))
                x1 = clip_contraction(x1 + eta * gx1 * ma)
                x2 = clip_contraction(x2 + eta * gx2 * ma)
                y1 = clip_contraction(y1 + eta * gy1 * mb)
                y2 = clip_contraction(y2 + eta * gy2 * mb)
                fn = sign * value(x1, x2, y1, y2)
                if abs(fn - f) < 1e-12:
                    ok = True
                    f = fn
                    break
                f = fn
            # polish: alternate exact best responses (monotone in f)
            for _ in range(per_start - used):
                x1 = _best_response(0.5 * sign * (T @ (y1 + y2)), ma)
                x2 = _best_response(0.5 * sign * (T @ (y1 - y2)), ma)
                y1 = _best_response(0.5 * sign * (T.T @ (x1 + x2)), mb)
                y2 = _best_response(0.5 * sign * (T.T @ (x1 - x2)), mb)
                fn = sign * value(x1, x2, y1, y2)
                if fn <= f + 1e-12:
                    f = max(f, fn)
                    ok = True
                    break
                f = fn
            converged |= ok
            if f > best:
                best, best_args = f, (x1, x2, y1, y2)
    if not converged:
        raise BudgetExhausted(float(best))
    if return_args:
        return best, best_args
    return float(best)


__all__ = [
    "STANDARD_DIRECTIONS",
    "CandidateC",
    "SearchConfig",
    "SearchResult",
    "build_candidate",
    "standard_pairs",
    "verify_prop3",
    "residual_forms",
    "sphere_grid",
    "search_noncommuting",
    "hermitian_basis",
    "search_commuting",
    "PAULIS",
    "SINGLET_DENSITY",
    "correlation_tensor",
    "contraction",
    "bell_value",
    "clip_contraction",
    "bell_maximize",
]
