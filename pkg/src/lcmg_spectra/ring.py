"""Complex group rings C[G] and C[G/K_n].

A :class:`RingElement` is a finitely supported map from canonical group
representatives to complex coefficients.  Coefficients are complex doubles;
entries that are exactly 0.0 are pruned and nothing else is.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import DomainError, ResourceCapError, StructuralError
from .groups import QuotientChain, Rep, Space

DEFAULT_POWER_CAP = 20


class RingElement:
    """Formal sum ``sum_g c_g g`` over a group or a finite quotient."""

    __slots__ = ("space", "_terms")

    def __init__(self, space: Space, terms: Mapping[Rep, complex] | Iterable[tuple[Rep, complex]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Rep, complex] = {}
        for g, c in items:
            if not space.is_element(g):
                raise StructuralError(f"{g!r} is not a canonical element of {space.describe()}")
            acc[g] = acc.get(g, 0j) + complex(c)
        self.space = space
        self._terms = {g: c for g, c in sorted(acc.items()) if c != 0}

    @classmethod
    def zero(cls, space: Space) -> "RingElement":
        return cls(space)

    @classmethod
    def one(cls, space: Space) -> "RingElement":
        return cls(space, {space.identity(): 1})

    @classmethod
    def monomial(cls, space: Space, g: Rep, coeff: complex = 1) -> "RingElement":
        return cls(space, {g: coeff})

    @property
    def terms(self) -> dict[Rep, complex]:
        return dict(self._terms)

    @property
    def support(self) -> list[Rep]:
        return list(self._terms)

    def coeff(self, g: Rep) -> complex:
        return self._terms.get(g, 0j)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.space == other.space and self._terms == other._terms

    def __repr__(self) -> str:
        body = " + ".join(f"({c:g})*{g}" for g, c in self._terms.items()) or "0"
        return f"RingElement[{self.space.describe()}]({body})"

    def _check(self, other: "RingElement") -> None:
        if self.space != other.space:
            raise StructuralError(
                f"ring elements over {self.space.describe()} and {other.space.describe()}"
            )

    def __add__(self, other):
        if not isinstance(other, RingElement):
            other = RingElement.one(self.space) * complex(other)
        self._check(other)
        acc = dict(self._terms)
        for g, c in other._terms.items():
            acc[g] = acc.get(g, 0j) + c
        return RingElement(self.space, acc)

    __radd__ = __add__

    def __neg__(self):
        return RingElement(self.space, {g: -c for g, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, RingElement):
            return ring_multiply(self, other)
        s = complex(other)
        return RingElement(self.space, {g: c * s for g, c in self._terms.items()})

    def __rmul__(self, other):
        s = complex(other)
        return RingElement(self.space, {g: s * c for g, c in self._terms.items()})

    def __pow__(self, k: int):
        if k < 0:
            if len(self._terms) != 1:
                raise DomainError("only monomials have inverses in the group ring")
            (g, c), = self._terms.items()
            inv = RingElement(self.space, {self.space.inv(g): 1 / c})
            return inv ** (-k)
        result = RingElement.one(self.space)
        for _ in range(k):
            result = result * self
        return result

    def star(self) -> "RingElement":
        return involution(self)

    def is_self_adjoint(self) -> bool:
        return involution(self) == self

    def hermitian_part(self) -> "RingElement":
        """(x + x*)/2, which is exactly self-adjoint in floating point."""
        return (self + involution(self)) * 0.5

    def to_json(self) -> list[dict]:
        return [
            {"re": c.real, "im": c.imag, "g": self.space.to_coords(g)}
            for g, c in self._terms.items()
        ]

    @classmethod
    def from_json(cls, space: Space, terms: Iterable[Mapping]) -> "RingElement":
        acc = []
        for t in terms:
            g = space.from_coords(t["g"])
            acc.append((g, complex(t.get("re", 0.0), t.get("im", 0.0))))
        return cls(space, acc)


def involution(x: RingElement) -> RingElement:
    """sum c_g g  ->  sum conj(c_g) g^-1."""
    inv = x.space.inv
    return RingElement(x.space, {inv(g): c.conjugate() for g, c in x._terms.items()})


def ring_multiply(x: RingElement, y: RingElement) -> RingElement:
    x._check(y)
    mul = x.space.mul
    acc: dict[Rep, complex] = defaultdict(complex)
    for h, a in x._terms.items():
        for k, b in y._terms.items():
            acc[mul(h, k)] += a * b
    return RingElement(x.space, acc)


def gram(w: RingElement) -> RingElement:
    """z = w w*, returned exactly self-adjoint."""
    return ring_multiply(w, involution(w)).hermitian_part()


def project_ring(chain: QuotientChain, level: int, x: RingElement) -> RingElement:
    """Image of x under C[G] -> C[G/K_n]; coefficients of merged cosets add."""
    if x.space != chain.model:
        raise StructuralError("element is not over the chain's group")
    q = chain.quotient(level)
    acc: dict[Rep, complex] = defaultdict(complex)
    for g, c in x._terms.items():
        acc[q.project(g)] += c
    return RingElement(q, acc)


def power_trace(x: RingElement, k: int, cap: int = DEFAULT_POWER_CAP) -> complex:
    """Coefficient of the identity in x^k."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > cap:
        raise ResourceCapError("power_trace exponent", k, cap)
    return (x ** k).coeff(x.space.identity())


@dataclass(frozen=True)
class SymmetrizedSupport:
    """An inverse-closed generator list S with one label per generator."""

    space: Space
    generators: tuple[Rep, ...]
    labels: tuple[complex, ...]

    def __post_init__(self):
        if len(self.generators) != len(self.labels):
            raise StructuralError("one label per generator required")
        if len(set(self.generators)) != len(self.generators):
            raise StructuralError("generators must be pairwise distinct")
        gens = set(self.generators)
        for g in self.generators:
            if self.space.inv(g) not in gens:
                raise DomainError(f"generator set is not inverse-closed: {g!r}")

    def label(self, g: Rep) -> complex:
        return self.labels[self.generators.index(g)]

    def items(self) -> list[tuple[Rep, complex]]:
        return list(zip(self.generators, self.labels))

    def is_hermitian(self) -> bool:
        lab = dict(self.items())
        inv = self.space.inv
        return all(lab[inv(g)] == c.conjugate() for g, c in lab.items())

    def as_element(self) -> RingElement:
        return RingElement(self.space, self.items())

    def project(self, chain: QuotientChain, level: int) -> "SymmetrizedSupport":
        """pi_n(S) without repetition; labels of generators sharing a coset are summed."""
        if self.space != chain.model:
            raise StructuralError("support is not over the chain's group")
        q = chain.quotient(level)
        acc: dict[Rep, complex] = {}
        for g, c in self.items():
            gbar = q.project(g)
            acc[gbar] = acc.get(gbar, 0j) + c
        gens = tuple(sorted(acc))
        return SymmetrizedSupport(q, gens, tuple(acc[g] for g in gens))


def symmetrize(z: RingElement) -> SymmetrizedSupport:
    """Write a self-adjoint z as sum over an inverse-closed S, padding with 0 labels."""
    inv = z.space.inv
    for g, c in z._terms.items():
        partner = z.coeff(inv(g))
        if partner != c.conjugate():
            raise DomainError(
                f"element is not self-adjoint: coefficient {c} at {g!r} "
                f"but {partner} at its inverse {inv(g)!r}"
            )
    gens = set(z._terms) | {inv(g) for g in z._terms}
    ordered = tuple(sorted(gens))
    return SymmetrizedSupport(z.space, ordered, tuple(z.coeff(g) for g in ordered))
