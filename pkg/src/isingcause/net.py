"""Local quantum Ising model: regions, local algebras, dynamics, state, pasts.

Minimal double cones are labelled by their centre ``(t, i)`` and stored in
doubled coordinates.  The thickened Cauchy surface consists of the cones at
``t = 0`` (integer ``i``) and ``t = -1/2`` (half-integer ``i``); the cone at
site ``i`` of that surface hosts ``U_i``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .algebra import (
    ONE,
    AlgebraElement,
    U,
    doubled,
    is_selfadjoint,
    mul,
    rep,
    site_value,
    trace,
    trace_product,
)
from .errors import (
    InvalidState,
    LambdaOutOfRange,
    NotUnitVector,
    UnspecifiedDynamics,
    UnsupportedRegion,
)

# -- geometry ---------------------------------------------------------------


@dataclass(frozen=True, order=True)
class MinimalDoubleCone:
    """Unit-diameter double cone centred at ``(t2/2, i2/2)``."""

    t2: int
    i2: int

    def __post_init__(self):
        if (self.t2 - self.i2) % 2:
            raise ValueError(f"cone centre ({self.t2}/2, {self.i2}/2) has mixed parity")

    @classmethod
    def at(cls, t, i) -> "MinimalDoubleCone":
        return cls(doubled(t), doubled(i))

    @classmethod
    def cauchy(cls, i) -> "MinimalDoubleCone":
        """Cone of the thickened Cauchy surface hosting ``U_i``."""
        d = doubled(i)
        return cls(0 if d % 2 == 0 else -1, d)

    @property
    def t(self):
        return site_value(self.t2)

    @property
    def i(self):
        return site_value(self.i2)

    def in_past_of(self, other: "MinimalDoubleCone") -> bool:
        """``self`` lies in the backward light cone of ``other``."""
        dt = other.t2 - self.t2
        return dt >= 0 and abs(self.i2 - other.i2) <= dt

    def spacelike_to(self, other: "MinimalDoubleCone") -> bool:
        return abs(self.i2 - other.i2) > abs(self.t2 - other.t2)


@dataclass(frozen=True)
class Region:
    cones: frozenset = field(default_factory=frozenset)
    name: str = ""

    def __post_init__(self):
        if not self.cones:
            raise ValueError("a region needs at least one cone")
        object.__setattr__(self, "cones", frozenset(self.cones))

    def __iter__(self):
        return iter(sorted(self.cones))

    def __len__(self):
        return len(self.cones)

    def __eq__(self, other):
        return isinstance(other, Region) and self.cones == other.cones

    def __hash__(self):
        return hash(self.cones)


def cauchy_interval(i, j) -> Region:
    """``O_{i,j}``: the Cauchy-surface cones of sites ``i .. j``."""
    lo, hi = doubled(i), doubled(j)
    if hi < lo:
        raise ValueError("empty interval")
    cones = [MinimalDoubleCone.cauchy(site_value(d)) for d in range(lo, hi + 1)]
    return Region(frozenset(cones), name=f"O[{site_value(lo)},{site_value(hi)}]")


def region_A() -> Region:
    return Region(frozenset({MinimalDoubleCone.at(0, -1), MinimalDoubleCone.at(0.5, -0.5)}), "O_A")


def region_B() -> Region:
    return Region(frozenset({MinimalDoubleCone.at(0.5, 0.5), MinimalDoubleCone.at(0, 1)}), "O_B")


def region_C() -> Region:
    """``O_{-1/2} v O_{1/2}``, which coincides with the Cauchy interval over -1/2..1/2."""
    r = cauchy_interval(-0.5, 0.5)
    return Region(r.cones, "O_C")


def _cauchy_sites(region: Region):
    """Sorted doubled sites if ``region`` is a contiguous Cauchy interval, else ``None``."""
    sites = []
    for c in region.cones:
        if c != MinimalDoubleCone.cauchy(site_value(c.i2)):
            return None
        sites.append(c.i2)
    sites.sort()
    if sites != list(range(sites[0], sites[-1] + 1)):
        return None
    return sites


# -- local algebras -----------------------------------------------------------

_A_BASIS = [(), (-2,), (-2, -1, 0), (-1, 0)]
_B_BASIS = [(), (2,), (0, 1, 2), (0, 1)]


def local_basis(region: Region) -> list:
    """Monomial basis (up to scalars) of the local algebra of ``region``."""
    if region == region_A():
        return list(_A_BASIS)
    if region == region_B():
        return list(_B_BASIS)
    sites = _cauchy_sites(region)
    if sites is None:
        raise UnsupportedRegion(f"no catalogued local algebra for region {region.name or region!r}")
    out = []
    n = len(sites)
    for mask in range(2 ** n):
        out.append(tuple(s for k, s in enumerate(sites) if mask >> k & 1))
    out.sort(key=lambda m: (len(m), m))
    return out


def local_window(region: Region):
    """Smallest lattice window ``(lo, hi)`` holding the local algebra of ``region``."""
    sites = {s for m in local_basis(region) for s in m}
    if not sites:
        sites = {c.i2 for c in region.cones}
    return site_value(min(sites)), site_value(max(sites))


# -- spin observables ---------------------------------------------------------

U_TRIPLE = (U(-1), U(-1) * U(-0.5) * U(0), 1j * U(-0.5) * U(0))
V_TRIPLE = (U(1), -(U(0) * U(0.5) * U(1)), 1j * U(0) * U(0.5))
# generators of O_C split by the central element U_{-1/2} U_{1/2}
W_TRIPLE = (U(0), U(0.5), 1j * U(0) * U(0.5))


def _unit(vec, tol=1e-10) -> np.ndarray:
    v = np.asarray(vec, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise NotUnitVector(f"expected a real 3-vector, got {vec!r}")
    if abs(np.linalg.norm(v) - 1.0) > tol:
        raise NotUnitVector(f"|{vec!r}| = {np.linalg.norm(v)!r} != 1")
    return v


def spin_element(vec, triple) -> AlgebraElement:
    out = AlgebraElement()
    for c, g in zip(vec, triple):
        out = out + float(c) * g
    return out


def spin_projection_A(a) -> AlgebraElement:
    """``A(a) = (1 + a.U)/2`` in the algebra of ``O_A``."""
    a = _unit(a)
    return 0.5 * (ONE + spin_element(a, U_TRIPLE))


def spin_projection_B(b) -> AlgebraElement:
    """``B(b) = (1 + b.V)/2`` in the algebra of ``O_B``."""
    b = _unit(b)
    return 0.5 * (ONE + spin_element(b, V_TRIPLE))


# -- states ------------------------------------------------------------------


@dataclass(frozen=True)
class LatticeState:
    """The functional ``x -> trace(rho x)`` for a density element ``rho``."""

    rho: AlgebraElement
    lam: float | None = None

    def __post_init__(self):
        rho = self.rho
        if abs(trace(rho) - 1) > 1e-12:
            raise InvalidState(f"trace(rho) = {trace(rho)!r}")
        if not is_selfadjoint(rho, 1e-12):
            raise InvalidState("rho is not self-adjoint")
        sites = rho.sites
        if sites:
            window = (site_value(min(sites)), site_value(max(sites)))
            m = rep(rho, window)
            lo = scipy.linalg.eigvalsh(m)[0]
            if lo < -1e-10:
                raise InvalidState(f"rho is not positive (min eigenvalue {lo:.3g})")

    def __call__(self, x: AlgebraElement) -> complex:
        return evaluate(self, x)


def state_rho(lam: float) -> LatticeState:
    """Family interpolating the tracial state (0) and the singlet (1)."""
    lam = float(lam)
    if not (0.0 <= lam <= 1.0) or math.isnan(lam):
        raise LambdaOutOfRange(f"lambda = {lam!r} outside [0, 1]")
    rho = ONE + lam * (
        U(-1) * U(-0.5) * U(0.5) * U(1) - U(-1) * U(1) + U(-0.5) * U(0.5)
    )
    return LatticeState(rho, lam)


def evaluate(state: LatticeState, x: AlgebraElement) -> complex:
    return trace_product(state.rho, x)


# The generator triples obey U1 U2 = -i U3 (likewise V), so the linear map
# onto Pauli matrices must flip the sign of sigma_y to stay multiplicative.
WING_PAULIS = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    -np.array([[0, -1j], [1j, 0]]),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def wing_matrix(vec) -> np.ndarray:
    """2x2 image of the spin projection along ``vec`` under the wing isomorphism."""
    out = WING_PAULIS[0].copy()
    for c, p in zip(vec, WING_PAULIS[1:]):
        out = out + c * p
    return out / 2


def two_wing_density(state: LatticeState) -> np.ndarray:
    """Restriction of ``state`` to ``A(O_A) v A(O_B)`` as a 4x4 density matrix.

    The two wing algebras are identified with ``M_2 (x) 1`` and ``1 (x) M_2``
    through ``U_k, V_k -> WING_PAULIS[k]``; ``A(a)`` then maps to
    ``wing_matrix(a) (x) 1``.
    """
    us = (ONE,) + U_TRIPLE
    vs = (ONE,) + V_TRIPLE
    out = np.zeros((4, 4), dtype=complex)
    for j, u in enumerate(us):
        for k, v in enumerate(vs):
            out += evaluate(state, mul(u, v)) * np.kron(WING_PAULIS[j], WING_PAULIS[k])
    return out / 4


# -- dynamics ------------------------------------------------------------------


def beta_automorphism(x: AlgebraElement) -> AlgebraElement:
    """Causal automorphism ``U_x -> U_{x-1/2} U_x U_{x+1/2}`` on half-integer sites."""
    integer = sorted(site_value(s) for s in x.sites if s % 2 == 0)
    if integer:
        raise UnspecifiedDynamics(f"beta is not fixed on integer sites {integer}")
    out = AlgebraElement()
    for m, c in x.terms.items():
        img = AlgebraElement.scalar(c)
        for s in m:
            img = img * AlgebraElement.monomial([site_value(s - 1), site_value(s), site_value(s + 1)])
        out = out + img
    return out


# -- relative commutants -----------------------------------------------------


def _rref(mat: np.ndarray, tol=1e-10) -> np.ndarray:
    a = np.array(mat, dtype=complex)
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(a[r:, c])))
        if abs(a[p, c]) < tol:
            a[r:, c] = 0
            continue
        a[[r, p]] = a[[p, r]]
        a[r] /= a[r, c]
        for k in range(rows):
            if k != r:
                a[k] -= a[k, c] * a[r]
        r += 1
    a[np.abs(a) < tol] = 0
    return a[:r]


def _span_basis(vectors: np.ndarray, monomials: list) -> list:
    """Sparse basis (reduced row echelon) of the row span, as algebra elements."""
    if vectors.shape[0] == 0:
        return []
    out = []
    for row in _rref(vectors):
        out.append(AlgebraElement({m: c for m, c in zip(monomials, row) if c != 0}))
    return out


def commutant_in(generators, ambient: Region) -> list:
    """Basis of ``{c in A(ambient) : [c, g] = 0 for all g}``.

    The basis is returned in reduced row echelon form over the monomial basis
    of ``ambient``, so monomial commutants come back as plain monomials.
    """
    basis = local_basis(ambient)
    generators = list(generators)
    if not generators:
        return [AlgebraElement({m: 1.0}) for m in basis]
    rows: dict = {}
    columns = []
    for m in basis:
        col: dict = {}
        e = AlgebraElement({m: 1.0})
        for gi, g in enumerate(generators):
            comm = mul(e, g) - mul(g, e)
            for mm, c in comm.terms.items():
                key = (gi, mm)
                if key not in rows:
                    rows[key] = len(rows)
                col[rows[key]] = c
        columns.append(col)
    system = np.zeros((max(len(rows), 1), len(basis)), dtype=complex)
    for j, col in enumerate(columns):
        for i, c in col.items():
            system[i, j] = c
    null = scipy.linalg.null_space(system, rcond=1e-10)
    return _span_basis(null.T, basis)


def restrict_to_sites(elements, sites) -> list:
    """Basis of ``span(elements)`` intersected with the algebra over ``sites`` (doubled)."""
    sites = set(sites)
    monos = sorted({m for e in elements for m in e.terms}, key=lambda m: (len(m), m))
    if not monos:
        return []
    mat = np.array([[e.coeff(m) for m in monos] for e in elements], dtype=complex)
    outside = [k for k, m in enumerate(monos) if not set(m) <= sites]
    if outside:
        null = scipy.linalg.null_space(mat[:, outside].T, rcond=1e-10)
        mat = null.T @ mat
    return _span_basis(mat, monos)


# -- pasts -------------------------------------------------------------------


class PastKind(str, enum.Enum):
    WEAK = "weak"
    COMMON = "common"
    STRONG = "strong"


@dataclass(frozen=True)
class PastPredicate:
    """Membership test for a weak/common/strong past of two regions."""

    kind: PastKind
    va: Region
    vb: Region

    def contains_cone(self, cone: MinimalDoubleCone) -> bool:
        in_a = any(cone.in_past_of(x) for x in self.va.cones)
        in_b = any(cone.in_past_of(x) for x in self.vb.cones)
        if self.kind is PastKind.WEAK:
            return in_a or in_b
        if self.kind is PastKind.COMMON:
            return in_a and in_b
        return all(cone.in_past_of(x) for x in self.va.cones | self.vb.cones)

    def __contains__(self, item) -> bool:
        if isinstance(item, MinimalDoubleCone):
            return self.contains_cone(item)
        return all(self.contains_cone(c) for c in item.cones)

    def __call__(self, item) -> bool:
        return item in self


def past(va: Region, vb: Region, kind="common") -> PastPredicate:
    return PastPredicate(PastKind(kind), va, vb)


__all__ = [
    "MinimalDoubleCone",
    "Region",
    "cauchy_interval",
    "region_A",
    "region_B",
    "region_C",
    "local_basis",
    "local_window",
    "U_TRIPLE",
    "V_TRIPLE",
    "W_TRIPLE",
    "spin_element",
    "spin_projection_A",
    "spin_projection_B",
    "LatticeState",
    "state_rho",
    "evaluate",
    "WING_PAULIS",
    "wing_matrix",
    "two_wing_density",
    "beta_automorphism",
    "commutant_in",
    "restrict_to_sites",
    "PastKind",
    "PastPredicate",
    "past",
]
