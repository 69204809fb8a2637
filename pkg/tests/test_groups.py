import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcmg_spectra import (
    FiniteGroup,
    GroupElement,
    Heisenberg,
    IntegerLattice,
    LevelRangeError,
    QuotientChain,
    ResourceCapError,
    StructuralError,
    enumerate_quotient,
    injectivity_radius,
    multiply,
    project,
)
from lcmg_spectra.groups import residual_level, shortest_kernel_word

big = st.integers(min_value=-(10**30), max_value=10**30)
small = st.integers(min_value=-50, max_value=50)


def heis_matrix(x):
    a, b, c = x
    return np.array([[1, a, c], [0, 1, b], [0, 0, 1]], dtype=object)


def test_lattice_multiply():
    Z2 = IntegerLattice(2)
    assert multiply(Z2.element(1, 0), Z2.element(0, 1)).rep == (1, 1)


def test_heisenberg_multiply_matches_matrix_product(H):
    prod = multiply(H.element(1, 0, 0), H.element(0, 1, 0))
    assert prod.rep == (1, 1, 1)
    expected = heis_matrix((1, 0, 0)).dot(heis_matrix((0, 1, 0)))
    assert (heis_matrix(prod.rep) == expected).all()


@given(st.tuples(big, big, big), st.tuples(big, big, big))
def test_heisenberg_law_is_matrix_product(x, y):
    H = Heisenberg()
    got = heis_matrix(H.mul(x, y))
    assert (got == heis_matrix(x).dot(heis_matrix(y))).all()


@pytest.mark.parametrize("model", [IntegerLattice(1), IntegerLattice(3), Heisenberg()])
@given(data=st.data())
def test_group_axioms(model, data):
    n = 3 if isinstance(model, Heisenberg) else model.dim
    elem = st.tuples(*[big] * n)
    a, b, c = (data.draw(elem) for _ in range(3))
    assert model.mul(model.mul(a, b), c) == model.mul(a, model.mul(b, c))
    assert model.mul(a, model.identity()) == a == model.mul(model.identity(), a)
    assert model.mul(a, model.inv(a)) == model.identity() == model.mul(model.inv(a), a)


def test_inverse_element_and_mismatch(H):
    g = H.element(3, -2, 7)
    assert multiply(g, g.inverse()).is_identity()
    with pytest.raises(StructuralError):
        multiply(IntegerLattice(3).element(1, 2, 3), g)
    with pytest.raises(StructuralError):
        GroupElement(H, (1, 2))


def test_project_examples(Z, H):
    ch = QuotientChain(Z, moduli=(2, 4))
    assert project(ch, 2, Z.element(7)).rep == (3,)
    lhs = project(ch, 2, Z.element(3)) * project(ch, 2, Z.element(2))
    assert lhs == project(ch, 2, Z.element(5))
    assert lhs.rep == (1,)
    hch = QuotientChain(H, moduli=(2,))
    assert project(hch, 1, H.element(3, 1, 5)).rep == (1, 1, 1)


def test_project_invalid_level(Z):
    ch = QuotientChain.powers(Z, 2, 3)
    with pytest.raises(LevelRangeError):
        project(ch, 4, Z.element(1))
    with pytest.raises(LevelRangeError):
        project(ch, 0, Z.element(1))


@settings(max_examples=50)
@given(st.tuples(small, small, small), st.tuples(small, small, small), st.integers(1, 4))
def test_project_is_homomorphism_and_nested(x, y, level):
    H = Heisenberg()
    ch = QuotientChain.powers(H, 2, 4)
    q = ch.quotient(level)
    assert q.project(H.mul(x, y)) == q.mul(q.project(x), q.project(y))
    if level > 1:
        coarse = ch.quotient(level - 1)
        assert coarse.project(q.project(x)) == coarse.project(x)


def test_enumerate_examples(Z, H):
    assert [e.rep for e in enumerate_quotient(QuotientChain(Z, moduli=(3,)), 1)] == [(0,), (1,), (2,)]
    heis = enumerate_quotient(QuotientChain(H, moduli=(2,)), 1)
    assert len(heis) == 8 and heis[0].rep == (0, 0, 0)
    Z2 = IntegerLattice(2)
    assert [e.rep for e in enumerate_quotient(QuotientChain(Z2, moduli=(2,)), 1)] == [
        (0, 0), (0, 1), (1, 0), (1, 1)
    ]


def test_enumerate_cap(H):
    ch = QuotientChain.powers(H, 2, 6)
    with pytest.raises(ResourceCapError, match="20000"):
        enumerate_quotient(ch, 5)  # 32^3 = 32768


@pytest.mark.parametrize("level", [1, 2, 3])
def test_projection_surjective_on_small_quotients(H, level):
    ch = QuotientChain.powers(H, 2, 3)
    q = ch.quotient(level)
    m = ch.modulus(level)
    images = {q.project((a, b, c)) for a in range(-m, m) for b in range(-m, m) for c in range(-m, m)}
    assert images == set(q.elements())


def test_quotient_orders(Z, H):
    assert QuotientChain.powers(IntegerLattice(2), 2, 3).order(3) == 64
    assert QuotientChain.powers(H, 2, 3).order(2) == 64


def test_chain_validation(Z):
    with pytest.raises(StructuralError):
        QuotientChain(Z, moduli=(2, 6, 9))
    with pytest.raises(StructuralError):
        QuotientChain(Z, moduli=(4, 4))


def test_residual_triviality_lattice(Z):
    ch = QuotientChain.powers(Z, 2, 8)
    for r in range(17):
        for n in ch.levels:
            m = 2**n
            if m > 2 * r + 1:
                assert all(x % m != 0 for x in range(1, 2 * r + 2))
                assert injectivity_radius(ch, n, [(1,), (-1,)], r) == r
            else:
                assert injectivity_radius(ch, n, [(1,), (-1,)], r) < r


def test_residual_level(Z):
    ch = QuotientChain.powers(Z, 2, 8)
    assert residual_level(ch, 3, [(1,), (-1,)]) == 3  # 8 > 7
    assert residual_level(ch, 200, [(1,), (-1,)]) is None


def test_shortest_kernel_word_heisenberg(H):
    ch = QuotientChain.powers(H, 2, 2)
    gens = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)]
    assert shortest_kernel_word(ch, 1, gens, 10) == 2  # a^2
    assert shortest_kernel_word(ch, 2, gens, 10) == 4  # a^4 or [a, b]^... of length 4


def test_finite_group_chain():
    D4 = FiniteGroup.dihedral(4)
    assert D4.order == 8
    rot = D4.generators()["g1"]
    center = D4.subgroup_generated([D4.mul(rot, rot)])
    rotations = D4.subgroup_generated([rot])
    ch = QuotientChain(D4, subgroups=(rotations, center, {D4.identity()}))
    assert [ch.order(n) for n in ch.levels] == [2, 4, 8]
    els = enumerate_quotient(ch, 2)
    assert els[0].rep == min(center)
    for x in range(8):
        for y in range(8):
            q = ch.quotient(2)
            assert q.project(D4.mul(x, y)) == q.mul(q.project(x), q.project(y))


def test_finite_group_rejects_non_normal():
    S3 = FiniteGroup.from_permutations([(1, 0, 2), (1, 2, 0)])
    transposition = S3.subgroup_generated([1])
    assert len(transposition) == 2
    with pytest.raises(StructuralError):
        QuotientChain(S3, subgroups=(transposition,))


def test_finite_group_rejects_bad_table():
    with pytest.raises(StructuralError):
        FiniteGroup(((0, 1), (0, 1)))
