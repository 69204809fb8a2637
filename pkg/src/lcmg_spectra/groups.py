"""Residually finite groups with exact arithmetic and nested quotient chains.

Three closed families are provided: the free abelian lattice Z^d, the
integer Heisenberg group, and finite groups given by a Cayley table.  Elements
are stored as plain canonical representatives (tuples of Python ints, or an
int index for table groups) so that hashing and equality are representation
comparisons.  :class:`GroupElement` and :class:`QuotientElement` wrap a
representative together with its ambient group for the public API.
"""

from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Iterator, Sequence

from .errors import LevelRangeError, ResourceCapError, StructuralError

Rep = Hashable

DEFAULT_QUOTIENT_CAP = 20_000


class Space(ABC):
    """Anything whose elements can index group-ring terms and graph vertices."""

    finite: bool = False

    @abstractmethod
    def identity(self) -> Rep: ...

    @abstractmethod
    def mul(self, a: Rep, b: Rep) -> Rep: ...

    @abstractmethod
    def inv(self, a: Rep) -> Rep: ...

    @abstractmethod
    def is_element(self, a: object) -> bool: ...

    def to_coords(self, a: Rep) -> list[int]:
        return list(a)

    def describe(self) -> str:
        return repr(self)


class GroupModel(Space):
    """A finitely generated group with exact element arithmetic."""

    @abstractmethod
    def from_coords(self, coords: Sequence[int]) -> Rep: ...

    @abstractmethod
    def generators(self) -> dict[str, Rep]:
        """Named standard generators (used by the expression parser)."""

    def element(self, *coords: int) -> "GroupElement":
        return GroupElement(self, self.from_coords(coords))


@dataclass(frozen=True)
class IntegerLattice(GroupModel):
    dim: int = 1

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("lattice dimension must be positive")

    def identity(self):
        return (0,) * self.dim

    def mul(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a):
        return tuple(-x for x in a)

    def is_element(self, a):
        return (
            isinstance(a, tuple)
            and len(a) == self.dim
            and all(isinstance(x, int) for x in a)
        )

    def from_coords(self, coords):
        if len(coords) != self.dim:
            raise StructuralError(f"expected {self.dim} coordinates, got {len(coords)}")
        return tuple(int(c) for c in coords)

    def generators(self):
        gens = {}
        for i in range(self.dim):
            e = [0] * self.dim
            e[i] = 1
            gens[f"t{i + 1}"] = tuple(e)
        if self.dim == 1:
            gens["t"] = (1,)
        return gens

    def reduce(self, a, m: int):
        return tuple(x % m for x in a)

    def describe(self):
        return f"lattice:{self.dim}"


@dataclass(frozen=True)
class Heisenberg(GroupModel):
    """Integer upper unitriangular 3x3 matrices; (a, b, c) is [[1,a,c],[0,1,b],[0,0,1]]."""

    def identity(self):
        return (0, 0, 0)

    def mul(self, x, y):
        a, b, c = x
        a2, b2, c2 = y
        return (a + a2, b + b2, c + c2 + a * b2)

    def inv(self, x):
        a, b, c = x
        return (-a, -b, a * b - c)

    def is_element(self, x):
        return isinstance(x, tuple) and len(x) == 3 and all(isinstance(v, int) for v in x)

    def from_coords(self, coords):
        if len(coords) != 3:
            raise StructuralError("Heisenberg elements have 3 coordinates")
        return tuple(int(c) for c in coords)

    def generators(self):
        return {"a": (1, 0, 0), "b": (0, 1, 0), "c": (0, 0, 1)}

    def reduce(self, x, m: int):
        return tuple(v % m for v in x)

    def describe(self):
        return "heisenberg"


@dataclass(frozen=True)
class FiniteGroup(GroupModel):
    """A finite group given by its multiplication table ``table[i][j] = i*j``."""

    table: tuple[tuple[int, ...], ...]
    finite = True

    def __post_init__(self):
        table = tuple(tuple(int(x) for x in row) for row in self.table)
        object.__setattr__(self, "table", table)
        n = len(table)
        if n == 0 or any(len(row) != n for row in table):
            raise StructuralError("multiplication table must be square and nonempty")
        for row in table:
            if sorted(row) != list(range(n)):
                raise StructuralError("table rows must be permutations (Latin square)")
        for col in range(n):
            if sorted(row[col] for row in table) != list(range(n)):
                raise StructuralError("table columns must be permutations (Latin square)")
        if n <= 64:
            for i, j, k in itertools.product(range(n), repeat=3):
                if table[table[i][j]][k] != table[i][table[j][k]]:
                    raise StructuralError(f"table is not associative at ({i}, {j}, {k})")

    @cached_property
    def _identity(self) -> int:
        for e, row in enumerate(self.table):
            if all(row[j] == j for j in range(len(row))):
                return e
        raise StructuralError("table has no identity")

    @cached_property
    def _inverses(self) -> tuple[int, ...]:
        e = self._identity
        return tuple(row.index(e) for row in self.table)

    @property
    def order(self) -> int:
        return len(self.table)

    def identity(self):
        return self._identity

    def mul(self, a, b):
        return self.table[a][b]

    def inv(self, a):
        return self._inverses[a]

    def is_element(self, a):
        return isinstance(a, int) and 0 <= a < len(self.table)

    def to_coords(self, a):
        return [a]

    def from_coords(self, coords):
        if len(coords) != 1:
            raise StructuralError("table-group elements have a single index coordinate")
        i = int(coords[0])
        if not self.is_element(i):
            raise StructuralError(f"element index {i} out of range")
        return i

    def elements(self) -> list[int]:
        return list(range(len(self.table)))

    def generators(self):
        gens = {f"g{i}": i for i in range(len(self.table))}
        gens["e"] = self._identity
        return gens

    def describe(self):
        return f"finite:{len(self.table)}"

    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroup":
        return cls(tuple(tuple((i + j) % n for j in range(n)) for i in range(n)))

    @classmethod
    def from_permutations(cls, gens: Iterable[Sequence[int]]) -> "FiniteGroup":
        """Close a set of permutations (tuples of images) under composition.

        Element 0 is the identity; ``table[i][j]`` applies ``i`` first, then ``j``.
        """
        gens = [tuple(g) for g in gens]
        if not gens:
            raise StructuralError("need at least one generator")
        deg = len(gens[0])
        ident = tuple(range(deg))
        elems = [ident]
        index = {ident: 0}
        i = 0
        while i < len(elems):
            p = elems[i]
            for g in gens:
                q = tuple(g[p[x]] for x in range(deg))
                if q not in index:
                    index[q] = len(elems)
                    elems.append(q)
            i += 1
        table = [[index[tuple(q[p[x]] for x in range(deg))] for q in elems] for p in elems]
        return cls(tuple(tuple(row) for row in table))

    @classmethod
    def dihedral(cls, n: int) -> "FiniteGroup":
        rot = tuple((i + 1) % n for i in range(n))
        ref = tuple((-i) % n for i in range(n))
        return cls.from_permutations([rot, ref])

    def subgroup_generated(self, gens: Iterable[int]) -> frozenset[int]:
        sub = {self._identity}
        frontier = list(sub)
        gens = list(gens)
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.table[x][g]
                    if y not in sub:
                        sub.add(y)
                        nxt.append(y)
            frontier = nxt
        return frozenset(sub)

    def is_normal_subgroup(self, sub: Iterable[int]) -> bool:
        sub = frozenset(sub)
        if self._identity not in sub:
            return False
        if any(self.table[a][b] not in sub for a in sub for b in sub):
            return False
        return all(
            self.table[self.table[g][k]][self._inverses[g]] in sub
            for g in range(self.order)
            for k in sub
        )


@dataclass(frozen=True)
class GroupElement:
    """A group element tagged with its model."""

    model: GroupModel
    rep: Rep

    def __post_init__(self):
        if not self.model.is_element(self.rep):
            raise StructuralError(f"{self.rep!r} is not an element of {self.model.describe()}")

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return multiply(self, other)

    def inverse(self) -> "GroupElement":
        return GroupElement(self.model, self.model.inv(self.rep))

    def is_identity(self) -> bool:
        return self.rep == self.model.identity()


def multiply(a: GroupElement, b: GroupElement) -> GroupElement:
    if a.model != b.model:
        raise StructuralError(
            f"cannot multiply elements of {a.model.describe()} and {b.model.describe()}"
        )
    return GroupElement(a.model, a.model.mul(a.rep, b.rep))


@dataclass(frozen=True)
class QuotientChain:
    """Nested finite-index normal subgroups K_1 >= K_2 >= ... of a model.

    Lattice and Heisenberg chains are given by moduli (K_n = kernel of reduction
    mod m_n) with each modulus dividing the next.  Table groups carry explicit
    normal subgroups as sets of element indices.
    """

    model: GroupModel
    moduli: tuple[int, ...] = ()
    subgroups: tuple[frozenset[int], ...] = ()

    def __post_init__(self):
        if isinstance(self.model, FiniteGroup):
            subs = tuple(frozenset(int(x) for x in s) for s in self.subgroups)
            object.__setattr__(self, "subgroups", subs)
            if self.moduli:
                raise StructuralError("table-group chains use explicit subgroups, not moduli")
            if not subs:
                raise StructuralError("chain needs at least one subgroup")
            for k, s in enumerate(subs):
                if not self.model.is_normal_subgroup(s):
                    raise StructuralError(f"subgroup at level {k + 1} is not normal")
                if k and not s <= subs[k - 1]:
                    raise StructuralError(f"subgroups not nested at level {k + 1}")
        else:
            mods = tuple(int(m) for m in self.moduli)
            object.__setattr__(self, "moduli", mods)
            if self.subgroups:
                raise StructuralError("lattice/Heisenberg chains use moduli")
            if not mods:
                raise StructuralError("chain needs at least one modulus")
            if any(m < 1 for m in mods):
                raise StructuralError("moduli must be positive")
            for prev, nxt in zip(mods, mods[1:]):
                if nxt <= prev or nxt % prev:
                    raise StructuralError(
                        f"moduli must strictly increase by divisibility: {prev} -> {nxt}"
                    )

    @classmethod
    def powers(cls, model: GroupModel, base: int = 2, levels: int = 8) -> "QuotientChain":
        return cls(model, moduli=tuple(base**n for n in range(1, levels + 1)))

    @property
    def depth(self) -> int:
        return len(self.subgroups) if self.subgroups else len(self.moduli)

    @property
    def levels(self) -> range:
        return range(1, self.depth + 1)

    def _check(self, level: int) -> None:
        if not isinstance(level, int) or not 1 <= level <= self.depth:
            raise LevelRangeError(f"level {level!r} not in 1..{self.depth}")

    def modulus(self, level: int) -> int:
        self._check(level)
        if self.subgroups:
            raise StructuralError("table-group chains have no modulus")
        return self.moduli[level - 1]

    def level_of_modulus(self, m: int) -> int:
        try:
            return self.moduli.index(m) + 1
        except ValueError:
            raise LevelRangeError(f"modulus {m} not in chain {self.moduli}") from None

    def quotient(self, level: int) -> "Quotient":
        self._check(level)
        return Quotient(self, level)

    def order(self, level: int) -> int:
        return self.quotient(level).order


@dataclass(frozen=True)
class Quotient(Space):
    """The finite group G/K_n with canonical coset representatives."""

    chain: QuotientChain
    level: int
    finite = True

    @cached_property
    def _coset_rep(self) -> tuple[int, ...] | None:
        model = self.chain.model
        if not isinstance(model, FiniteGroup):
            return None
        sub = self.chain.subgroups[self.level - 1]
        return tuple(min(model.mul(g, k) for k in sub) for g in range(model.order))

    @property
    def model(self) -> GroupModel:
        return self.chain.model

    @property
    def modulus(self) -> int:
        return self.chain.modulus(self.level)

    @property
    def order(self) -> int:
        model = self.chain.model
        if isinstance(model, FiniteGroup):
            return model.order // len(self.chain.subgroups[self.level - 1])
        m = self.chain.moduli[self.level - 1]
        if isinstance(model, Heisenberg):
            return m**3
        return m**model.dim

    def project(self, g: Rep) -> Rep:
        """Canonical representative of the coset gK_n."""
        model = self.chain.model
        if isinstance(model, FiniteGroup):
            return self._coset_rep[g]
        return model.reduce(g, self.chain.moduli[self.level - 1])

    def identity(self):
        return self.project(self.chain.model.identity())

    def mul(self, a, b):
        return self.project(self.chain.model.mul(a, b))

    def inv(self, a):
        return self.project(self.chain.model.inv(a))

    def is_element(self, a):
        if not self.chain.model.is_element(a):
            return False
        return self.project(a) == a

    def to_coords(self, a):
        return self.chain.model.to_coords(a)

    def from_coords(self, coords: Sequence[int]) -> Rep:
        g = self.chain.model.from_coords(coords)
        if self.project(g) != g:
            raise StructuralError(f"{list(coords)} is not a canonical coset representative")
        return g

    def elements(self, cap: int = DEFAULT_QUOTIENT_CAP) -> list[Rep]:
        n = self.order
        if n > cap:
            raise ResourceCapError(f"quotient order at level {self.level}", n, cap)
        model = self.chain.model
        if isinstance(model, FiniteGroup):
            return sorted(set(self._coset_rep))
        m = self.chain.moduli[self.level - 1]
        arity = 3 if isinstance(model, Heisenberg) else model.dim
        return list(itertools.product(range(m), repeat=arity))

    def describe(self):
        return f"{self.chain.model.describe()}/K_{self.level}"


@dataclass(frozen=True)
class QuotientElement:
    chain: QuotientChain
    level: int
    rep: Rep = field()

    def __mul__(self, other: "QuotientElement") -> "QuotientElement":
        if (self.chain, self.level) != (other.chain, other.level):
            raise StructuralError("quotient elements from different levels or chains")
        q = self.chain.quotient(self.level)
        return QuotientElement(self.chain, self.level, q.mul(self.rep, other.rep))

    def inverse(self) -> "QuotientElement":
        q = self.chain.quotient(self.level)
        return QuotientElement(self.chain, self.level, q.inv(self.rep))


def project(chain: QuotientChain, level: int, g: GroupElement) -> QuotientElement:
    if g.model != chain.model:
        raise StructuralError("element does not belong to the chain's group")
    q = chain.quotient(level)
    return QuotientElement(chain, level, q.project(g.rep))


def enumerate_quotient(
    chain: QuotientChain, level: int, cap: int = DEFAULT_QUOTIENT_CAP
) -> list[QuotientElement]:
    """All cosets of G/K_n in lexicographic order of representatives; identity first."""
    q = chain.quotient(level)
    return [QuotientElement(chain, level, r) for r in q.elements(cap)]


def _word_layers(model: GroupModel, gens: Iterable[Rep], max_length: int) -> Iterator[tuple[int, set]]:
    ident = model.identity()
    steps = [g for g in dict.fromkeys(gens) if g != ident]
    seen = {ident}
    frontier = [ident]
    for length in range(1, max_length + 1):
        layer = set()
        for x in frontier:
            for s in steps:
                y = model.mul(x, s)
                if y not in seen:
                    seen.add(y)
                    layer.add(y)
        if not layer:
            return
        yield length, layer
        frontier = list(layer)


def shortest_kernel_word(
    chain: QuotientChain, level: int, gens: Iterable[Rep], max_length: int
) -> int | None:
    """Word length (in ``gens``) of the shortest nonidentity element of K_n.

    ``gens`` should be closed under inverses.  Returns None when no such
    element has length <= ``max_length``.
    """
    q = chain.quotient(level)
    ident = q.identity()
    for length, layer in _word_layers(chain.model, gens, max_length):
        if any(q.project(g) == ident for g in layer):
            return length
    return None


def injectivity_radius(
    chain: QuotientChain, level: int, gens: Iterable[Rep], radius_cap: int = 16
) -> int:
    """Largest r <= radius_cap with no nonidentity K_n element of word length <= 2r+1.

    This is the radius up to which the projection is guaranteed to map the
    radius-r Cayley ball isomorphically.  Returns -1 if even r = 0 fails.
    """
    length = shortest_kernel_word(chain, level, gens, 2 * radius_cap + 1)
    if length is None:
        return radius_cap
    # need 2r + 1 < length
    return min(radius_cap, (length - 2) // 2)


def residual_level(
    chain: QuotientChain, radius: int, gens: Iterable[Rep]
) -> int | None:
    """First level N(r) at which the word-length guarantee holds for ``radius``."""
    gens = list(gens)
    for level in chain.levels:
        if injectivity_radius(chain, level, gens, radius) >= radius:
            return level
    return None
