"""Exact arithmetic in the *-algebra generated by the Ising generators.

Every site ``i`` of the half-integer lattice carries a self-adjoint unitary
``U_i``.  Generators at distance 1/2 anticommute, all others commute.  Sites
are stored *doubled* (``2*i`` as an ``int``) so that the lattice is plain
``Z``; a monomial is a strictly ascending tuple of doubled sites and an
element is a sparse map ``monomial -> complex``.

The public API speaks lattice coordinates (``U(-0.5)``, ``window=(-1, 1)``);
doubled coordinates only appear in :attr:`AlgebraElement.terms`.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from numbers import Number

import numpy as np

from .errors import InvalidSite, SiteOutOfWindow

PRUNE = 1e-14

Monomial = tuple  # strictly ascending tuple of doubled sites


def doubled(i) -> int:
    """Return ``2*i`` for a half-integer lattice coordinate ``i``."""
    try:
        d = Fraction(i) * 2
    except (TypeError, ValueError) as exc:
        raise InvalidSite(f"{i!r} is not a lattice site") from exc
    if d.denominator != 1:
        raise InvalidSite(f"{i!r} is not a half-integer site")
    return int(d)


def site_value(d: int):
    """Inverse of :func:`doubled`; integers stay ``int``, half-integers become ``float``."""
    return d // 2 if d % 2 == 0 else d / 2


@lru_cache(maxsize=None)
def _mono_mul(m1: Monomial, m2: Monomial):
    """Product of two canonical monomials as ``(sign, monomial)``."""
    out = list(m1)
    sign = 1
    for g in m2:
        # g enters on the right and moves left past every larger site
        pos = len(out)
        while pos > 0 and out[pos - 1] > g:
            if out[pos - 1] - g == 1:
                sign = -sign
            pos -= 1
        if pos > 0 and out[pos - 1] == g:
            del out[pos - 1]
        else:
            out.insert(pos, g)
    return sign, tuple(out)


@lru_cache(maxsize=None)
def _mono_adjoint_sign(m: Monomial) -> int:
    # reversing the word transposes every pair once; only neighbours at distance 1/2 pick up a sign
    n = sum(1 for a, b in zip(m, m[1:]) if b - a == 1)
    return -1 if n % 2 else 1


@lru_cache(maxsize=None)
def _mono_square_sign(m: Monomial) -> int:
    return _mono_mul(m, m)[0]


def _clean(terms: dict) -> dict:
    return {m: c for m, c in terms.items() if abs(c) >= PRUNE}


class AlgebraElement:
    """Finite linear combination of canonical monomials.

    Instances are treated as immutable; arithmetic returns new elements.
    ``*`` is the algebra product, scalars may appear on either side.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = _clean({tuple(m): complex(c) for m, c in (terms or {}).items()})

    # -- constructors -------------------------------------------------------
    @classmethod
    def scalar(cls, c) -> "AlgebraElement":
        return cls({(): c})

    @classmethod
    def monomial(cls, sites, coeff=1.0) -> "AlgebraElement":
        """Element ``coeff * U_{s1} U_{s2} ...`` for lattice sites given in any order."""
        out = cls.scalar(coeff)
        for s in sites:
            out = out * cls({(doubled(s),): 1.0})
        return out

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, AlgebraElement):
            return other
        if isinstance(other, Number):
            return AlgebraElement.scalar(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, 0) + c
        return AlgebraElement(terms)

    __radd__ = __add__

    def __neg__(self):
        return AlgebraElement({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return AlgebraElement({m: c * other for m, c in self.terms.items()})
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, Number):
            return AlgebraElement({m: other * c for m, c in self.terms.items()})
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Number):
            return self * (1 / other)
        return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not supported")
        out = AlgebraElement.scalar(1)
        for _ in range(n):
            out = out * self
        return out

    # -- inspection ---------------------------------------------------------
    @property
    def sites(self) -> set:
        """Doubled sites occurring in any monomial."""
        return {s for m in self.terms for s in m}

    def norm1(self) -> float:
        return float(sum(abs(c) for c in self.terms.values()))

    def coeff(self, monomial) -> complex:
        return self.terms.get(tuple(monomial), 0j)

    def adjoint(self) -> "AlgebraElement":
        return adjoint(self)

    @property
    def H(self):
        return adjoint(self)

    def is_zero(self, tol=0.0) -> bool:
        return self.norm1() <= tol

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return (self - other).is_zero()

    def items(self):
        """Terms in canonical monomial order."""
        return sorted(self.terms.items(), key=lambda kv: _order_key(kv[0]))

    def __repr__(self):
        if not self.terms:
            return "AlgebraElement(0)"
        parts = []
        for m, c in self.items():
            word = "".join(f"U[{site_value(s)}]" for s in m) or "1"
            parts.append(f"({c.real:+.6g}{c.imag:+.6g}j)*{word}")
        return "AlgebraElement(" + " ".join(parts) + ")"


def _order_key(m: Monomial):
    return (len(m), m)


def U(i) -> AlgebraElement:
    """Generator ``U_i`` at lattice site ``i`` (a half-integer)."""
    return AlgebraElement({(doubled(i),): 1.0})


ONE = AlgebraElement.scalar(1.0)
ZERO = AlgebraElement()


def mul(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    terms: dict = {}
    for m1, c1 in x.terms.items():
        for m2, c2 in y.terms.items():
            s, m = _mono_mul(m1, m2)
            terms[m] = terms.get(m, 0) + s * c1 * c2
    return AlgebraElement(terms)


def adjoint(x: AlgebraElement) -> AlgebraElement:
    return AlgebraElement({m: _mono_adjoint_sign(m) * c.conjugate() for m, c in x.terms.items()})


def trace(x: AlgebraElement) -> complex:
    """Normalized trace: the identity coefficient."""
    return x.terms.get((), 0j)


def trace_product(x: AlgebraElement, y: AlgebraElement) -> complex:
    """``trace(x*y)`` without forming the product."""
    small, big = (y, x) if len(x.terms) > len(y.terms) else (x, y)
    total = 0j
    for m, c in small.terms.items():
        d = big.terms.get(m)
        if d is not None:
            # m*m = +-1, the same sign in either order
            total += _mono_square_sign(m) * c * d
    return total


def commutator(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    return mul(x, y) - mul(y, x)


def is_selfadjoint(x: AlgebraElement, tol=1e-12) -> bool:
    return (x - adjoint(x)).norm1() <= tol


def is_projection(x: AlgebraElement, tol=1e-12) -> bool:
    return is_selfadjoint(x, tol) and (mul(x, x) - x).norm1() <= tol


# -- faithful matrix representation ------------------------------------------

_PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def window_sites(window) -> list:
    """Doubled sites of a lattice window ``(lo, hi)`` (inclusive, step 1/2)."""
    lo, hi = doubled(window[0]), doubled(window[1])
    if hi < lo:
        raise ValueError(f"empty window {window!r}")
    return list(range(lo, hi + 1))


@lru_cache(maxsize=64)
def _generator_matrices(lo: int, hi: int):
    n = hi - lo + 1
    mats = {}
    for j, s in enumerate(range(lo, hi + 1)):
        factors = [np.eye(2, dtype=complex)] * (n + 1)
        factors[j] = _PAULI_Z
        factors[j + 1] = _PAULI_X
        m = factors[0]
        for f in factors[1:]:
            m = np.kron(m, f)
        m.setflags(write=False)
        mats[s] = m
    return mats


@lru_cache(maxsize=4096)
def _monomial_matrix(m: Monomial, lo: int, hi: int):
    gens = _generator_matrices(lo, hi)
    dim = 2 ** (hi - lo + 2)
    out = np.eye(dim, dtype=complex)
    for s in m:
        out = out @ gens[s]
    out.setflags(write=False)
    return out


def rep(x: AlgebraElement, window) -> np.ndarray:
    """Dense image of ``x`` for the window ``(lo, hi)`` of lattice sites.

    ``U_{s_j}`` maps to Pauli Z on qubit ``j`` times Pauli X on qubit ``j+1``
    (qubit 0 is the leftmost Kronecker factor), on ``n+1`` qubits for an
    ``n``-site window.  Normalized trace is preserved:
    ``trace(x) == np.trace(rep(x)) / dim``.
    """
    sites = window_sites(window)
    lo, hi = sites[0], sites[-1]
    bad = {s for s in x.sites if s < lo or s > hi}
    if bad:
        raise SiteOutOfWindow(
            f"sites {sorted(site_value(s) for s in bad)} outside window {window!r}"
        )
    dim = 2 ** (len(sites) + 1)
    out = np.zeros((dim, dim), dtype=complex)
    for m, c in x.terms.items():
        out += c * _monomial_matrix(m, lo, hi)
    return out


def window_monomials(window) -> list:
    """All ``2**n`` canonical monomials over the sites of ``window``."""
    sites = window_sites(window)
    out = []
    for k in range(len(sites) + 1):
        out.extend(itertools.combinations(sites, k))
    return out


def from_matrix(mat: np.ndarray, window, tol=PRUNE) -> AlgebraElement:
    """Inverse of :func:`rep` on its image (Hilbert-Schmidt projection onto monomials)."""
    sites = window_sites(window)
    lo, hi = sites[0], sites[-1]
    dim = 2 ** (len(sites) + 1)
    if mat.shape != (dim, dim):
        raise ValueError(f"expected a {dim}x{dim} matrix for window {window!r}")
    terms = {}
    for m in window_monomials(window):
        r = _monomial_matrix(m, lo, hi)
        c = np.vdot(r, mat) / dim
        if abs(c) >= tol:
            terms[m] = c
    return AlgebraElement(terms)
