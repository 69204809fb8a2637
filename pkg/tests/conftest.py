from __future__ import annotations

import itertools

import pytest

from lcmg_spectra import Heisenberg, IntegerLattice, QuotientChain, RingElement


@pytest.fixture
def Z():
    return IntegerLattice(1)


@pytest.fixture
def t(Z):
    return RingElement.monomial(Z, (1,))


@pytest.fixture
def H():
    return Heisenberg()


@pytest.fixture
def heis_gens(H):
    return {name: RingElement.monomial(H, g) for name, g in H.generators().items()}


@pytest.fixture
def z_chain(Z):
    return QuotientChain.powers(Z, 2, 10)


@pytest.fixture
def h_chain(H):
    return QuotientChain.powers(H, 2, 4)


def brute_force_isomorphic(a, b, tol=1e-12):
    """Try every bijection; only for graphs with a handful of vertices."""
    if len(a) != len(b) or len(a.edges) != len(b.edges):
        return False
    others_a = [i for i in range(len(a)) if i != a.basepoint]
    others_b = [i for i in range(len(b)) if i != b.basepoint]
    for perm in itertools.permutations(others_b):
        f = {a.basepoint: b.basepoint, **dict(zip(others_a, perm))}
        ok = True
        for (u, v), c in a.edges.items():
            d = b.edges.get((f[u], f[v]))
            if d is None or abs(d.real - c.real) > tol or abs(d.imag - c.imag) > tol:
                ok = False
                break
        if ok:
            return True
    return False


def closed_walk_sum(space, sym, k):
    """Sum over all words s_1..s_k with product 1 of the label products (brute force)."""
    ident = space.identity()
    total = 0j
    for word in itertools.product(sym.items(), repeat=k):
        g = ident
        weight = 1 + 0j
        for s, c in word:
            g = space.mul(g, s)
            weight *= c
        if g == ident:
            total += weight
    return total


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
