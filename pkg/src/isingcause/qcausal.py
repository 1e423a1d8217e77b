"""Correlations, conditional expectations and common-cause-system checks.

All residuals use the division-free product form
``phi(C X_ab C) phi(C X_a'b' C) - phi(C X_ab' C) phi(C X_a'b C)``
so cells of zero weight need no special casing.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import ONE, AlgebraElement, commutator, is_projection, mul
from .errors import MalformedPartition, NoncommutingPair, ZeroWeightCell
from .net import LatticeState, evaluate

DEFAULT_TOL = 1e-10

# (m, n, m', n') with m != m', n != n'; indices are 1-based like the pairs they label
CH_ASSIGNMENTS = ((1, 1, 2, 2), (1, 2, 2, 1), (2, 1, 1, 2), (2, 2, 1, 1))


def _phi(state, x) -> float:
    return evaluate(state, x).real


def _require_commuting(a, b, tol=DEFAULT_TOL):
    if commutator(a, b).norm1() > tol:
        raise NoncommutingPair("events must commute")


def perp(x: AlgebraElement) -> AlgebraElement:
    return ONE - x


@dataclass(frozen=True)
class PartitionOfUnit:
    """Mutually orthogonal projections summing to the unit (validated on construction)."""

    members: tuple
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        members = tuple(self.members)
        object.__setattr__(self, "members", members)
        if not members:
            raise MalformedPartition("empty partition")
        for k, c in enumerate(members):
            if not isinstance(c, AlgebraElement) or not is_projection(c, self.tol):
                raise MalformedPartition(f"member {k} is not a projection")
        for j in range(len(members)):
            for k in range(j + 1, len(members)):
                if mul(members[j], members[k]).norm1() > self.tol:
                    raise MalformedPartition(f"members {j} and {k} are not orthogonal")
        total = AlgebraElement()
        for c in members:
            total = total + c
        if (total - ONE).norm1() > self.tol:
            raise MalformedPartition("members do not sum to the unit")

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __getitem__(self, k):
        return self.members[k]

    @classmethod
    def binary(cls, c: AlgebraElement, tol=DEFAULT_TOL) -> "PartitionOfUnit":
        return cls((c, ONE - c), tol)


def as_partition(partition, tol=DEFAULT_TOL) -> PartitionOfUnit:
    if isinstance(partition, PartitionOfUnit):
        return partition
    return PartitionOfUnit(tuple(partition), tol)


@dataclass
class CausalVerdict:
    """Outcome of a (joint) common cause system check.

    ``residuals`` maps ``(m, n, k)`` to the product-form defect of pair
    ``(m, n)`` in cell ``k``.
    """

    residuals: dict
    commuting: bool
    trivial: bool
    tol: float
    satisfied: bool = field(init=False)

    def __post_init__(self):
        self.satisfied = all(r <= self.tol for r in self.residuals.values())

    @property
    def worst(self) -> float:
        return max(self.residuals.values(), default=0.0)


# -- elementary quantities ---------------------------------------------------


def correlation(state: LatticeState, a: AlgebraElement, b: AlgebraElement) -> float:
    _require_commuting(a, b)
    return _phi(state, mul(a, b)) - _phi(state, a) * _phi(state, b)


def product_form_check(state: LatticeState, a, b, tol=DEFAULT_TOL) -> bool:
    """True iff ``phi(AB) phi(A'B') != phi(AB') phi(A'B)`` (primes: complements)."""
    _require_commuting(a, b)
    ap, bp = perp(a), perp(b)
    lhs = _phi(state, mul(a, b)) * _phi(state, mul(ap, bp))
    rhs = _phi(state, mul(a, bp)) * _phi(state, mul(ap, b))
    return abs(lhs - rhs) > tol


def conditional_expectation(partition, x: AlgebraElement) -> AlgebraElement:
    out = AlgebraElement()
    for c in partition:
        out = out + mul(mul(c, x), c)
    return out


def conditional_state(state, partition, k: int, x: AlgebraElement) -> float:
    partition = as_partition(partition)
    c = partition[k]
    w = _phi(state, c)
    if w <= 1e-12:
        raise ZeroWeightCell(f"cell {k} has weight {w!r}")
    return _phi(state, mul(mul(c, x), c)) / w


def _cell_residual(state, a, b, c) -> float:
    ap, bp = perp(a), perp(b)

    def q(x):
        return _phi(state, mul(mul(c, x), c))

    return abs(q(mul(a, b)) * q(mul(ap, bp)) - q(mul(a, bp)) * q(mul(ap, b)))


def _is_below(c, x, tol) -> bool:
    return (mul(x, c) - c).norm1() <= tol


def verify_joint_ccs(state, pairs, partition, tol=DEFAULT_TOL) -> CausalVerdict:
    """Joint common cause system check for ``pairs = [((m, n), A, B), ...]`` or ``[(A, B), ...]``.

    Bare ``(A, B)`` pairs are labelled ``(0, j)`` in input order.
    """
    partition = as_partition(partition, tol)
    labelled = []
    for j, p in enumerate(pairs):
        if len(p) == 3:
            labelled.append((tuple(p[0]), p[1], p[2]))
        else:
            labelled.append(((0, j), p[0], p[1]))
    for _, a, b in labelled:
        _require_commuting(a, b, tol)
    labelled.sort(key=lambda t: t[0])

    residuals = {}
    for (m, n), a, b in labelled:
        for k, c in enumerate(partition):
            residuals[(m, n, k)] = _cell_residual(state, a, b, c)

    events = {}
    for _, a, b in labelled:
        events.setdefault(id(a), a)
        events.setdefault(id(b), b)
    commuting = all(
        commutator(c, e).norm1() <= tol for c in partition for e in events.values()
    )
    trivial = False
    for _, a, b in labelled:
        bounds = (a, perp(a), b, perp(b))
        if any(_is_below(c, x, tol) for c in partition for x in bounds):
            trivial = True
            break
    return CausalVerdict(residuals, commuting, trivial, tol)


def verify_ccs(state, a, b, partition, tol=DEFAULT_TOL) -> CausalVerdict:
    return verify_joint_ccs(state, [((1, 1), a, b)], partition, tol)


# -- Bell-type combinations ----------------------------------------------------


def _ch_element(As, Bs, assignment):
    m, n, mp, np_ = assignment
    if m == mp or n == np_:
        raise ValueError(f"assignment {assignment!r} needs m != m' and n != n'")
    a, ap = As[m - 1], As[mp - 1]
    b, bp = Bs[n - 1], Bs[np_ - 1]
    return mul(a, b) + mul(a, bp) + mul(ap, b) - mul(ap, bp) - a - b


def _require_wings_commute(As, Bs):
    for a in As:
        for b in Bs:
            _require_commuting(a, b)


def ch_value(state, a1, a2, b1, b2, assignment=(1, 1, 2, 2)) -> float:
    As, Bs = (a1, a2), (b1, b2)
    _require_wings_commute(As, Bs)
    return _phi(state, _ch_element(As, Bs, assignment))


def violates_ch(value: float, tol=1e-12) -> bool:
    return value < -1 - tol or value > tol


def chsh_value(state, a1, a2, b1, b2) -> float:
    """``phi(X1(Y1+Y2) + X2(Y1-Y2))`` with ``X = 2A - 1``, ``Y = 2B - 1``."""
    _require_wings_commute((a1, a2), (b1, b2))
    x1, x2 = 2 * a1 - ONE, 2 * a2 - ONE
    y1, y2 = 2 * b1 - ONE, 2 * b2 - ONE
    return _phi(state, mul(x1, y1 + y2) + mul(x2, y1 - y2))


def ch_conditioned_value(state, partition, a1, a2, b1, b2, assignment=(1, 1, 2, 2)) -> float:
    """CH combination in the conditioned state ``phi o E_c``."""
    As, Bs = (a1, a2), (b1, b2)
    _require_wings_commute(As, Bs)
    partition = as_partition(partition)
    return _phi(state, conditional_expectation(partition, _ch_element(As, Bs, assignment)))


def no_signalling_check(state, partition, a, b, tol=DEFAULT_TOL) -> bool:
    """Both marginal identities of the conditioned state, cell by cell (zero-weight cells skipped)."""
    _require_commuting(a, b, tol)
    partition = as_partition(partition, tol)
    ap, bp = perp(a), perp(b)
    for k, c in enumerate(partition):
        if _phi(state, c) <= 1e-12:
            continue
        pa = conditional_state(state, partition, k, a)
        pb = conditional_state(state, partition, k, b)
        pab = conditional_state(state, partition, k, mul(a, b))
        if abs(pa - pab - conditional_state(state, partition, k, mul(a, bp))) > tol:
            return False
        if abs(pb - pab - conditional_state(state, partition, k, mul(ap, b))) > tol:
            return False
        if abs(conditional_state(state, partition, k, ONE) - 1) > tol:
            return False
    return True
