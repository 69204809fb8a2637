import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from conftest import closed_walk_sum
from lcmg_spectra import (
    DomainError,
    Heisenberg,
    KestenMeasure,
    Lcmg,
    MarkovOperator,
    QuotientChain,
    RingElement,
    ResourceCapError,
    betti,
    counting_measure,
    gram,
    kesten_measure,
    power_trace,
    project_ring,
    sdf_from_measure,
    symmetrize,
)
from lcmg_spectra.spectral import moment_by_walks, quotient_operator, walk_moments


def fourier_moment(k):
    val, _ = quad(lambda th: (2 - 2 * math.cos(th)) ** k, 0, 2 * math.pi, limit=200)
    return val / (2 * math.pi)


@pytest.fixture
def z(Z, t):
    return RingElement.one(Z) * 2 - t - t**-1


@pytest.mark.parametrize("k", range(11))
def test_walk_moments_lattice(Z, z, k):
    got = moment_by_walks(Z, symmetrize(z), k)
    assert got.real == pytest.approx(math.comb(2 * k, k), rel=1e-12)
    assert got.real == pytest.approx(fourier_moment(k), rel=1e-9)
    assert got == pytest.approx(power_trace(z, k), rel=1e-12)


def test_walk_moments_trivial(Z):
    one = symmetrize(RingElement.one(Z))
    assert [moment_by_walks(Z, one, k) for k in range(5)] == [1, 1, 1, 1, 1]
    zero = symmetrize(RingElement.zero(Z))
    assert moment_by_walks(Z, zero, 0) == 1
    assert [moment_by_walks(Z, zero, k) for k in range(1, 5)] == [0, 0, 0, 0]


def test_walk_moments_brute_force_heisenberg(H, heis_gens):
    a, b = heis_gens["a"], heis_gens["b"]
    z = gram(RingElement.one(H) * 0.5 - a + b * 0.5j)
    sym = symmetrize(z)
    for k in range(5):
        assert moment_by_walks(H, sym, k) == pytest.approx(closed_walk_sum(H, sym, k), rel=1e-9, abs=1e-12)


def test_moment_cap(Z, z):
    with pytest.raises(ResourceCapError):
        moment_by_walks(Z, symmetrize(z), 21)


def test_circulant_operator(Z, z):
    op = quotient_operator(QuotientChain(Z, moduli=(4,)), 1, z)
    expected = np.array([[2, -1, 0, -1], [-1, 2, -1, 0], [0, -1, 2, -1], [-1, 0, -1, 2]])
    assert np.array_equal(op.dense(), expected)
    eig = np.sort(np.linalg.eigvalsh(op.dense()))
    formula = np.sort([2 - 2 * math.cos(2 * math.pi * j / 4) for j in range(4)])
    assert np.allclose(eig, formula, atol=1e-12)
    assert op.norm_bound == 4


def test_identity_operator(Z):
    op = quotient_operator(QuotientChain(Z, moduli=(1, 4)), 1, RingElement.one(Z))
    assert np.array_equal(op.dense(), np.eye(1))


def test_circulant_measure(Z, z):
    op = quotient_operator(QuotientChain(Z, moduli=(4,)), 1, z)
    mu = kesten_measure(op)
    assert mu.locations == pytest.approx([0, 2, 4], abs=1e-12)
    assert mu.masses == pytest.approx([0.25, 0.5, 0.25], abs=1e-12)
    single = kesten_measure(MarkovOperator.from_lcmg(Lcmg(["e"], 0, {(0, 0): 1.0})))
    assert single.atoms == [(1.0, 1.0)]


def test_random_self_adjoint_heisenberg_is_hermitian(H):
    rng = np.random.default_rng(7)
    gens = list(H.generators().values())[:3]
    terms = []
    for g in gens:
        c = complex(*rng.normal(size=2))
        terms += [(g, c), (H.inv(g), c.conjugate())]
    z = RingElement(H, terms + [(H.identity(), 1.5)])
    op = quotient_operator(QuotientChain(H, moduli=(2,)), 1, z)
    assert op.dim == 8
    assert op.asymmetry() <= 1e-12


def test_non_hermitian_rejected():
    g = Lcmg(["x", "y"], 0, {(0, 1): 1.0, (1, 0): 2.0})
    with pytest.raises(DomainError):
        kesten_measure(MarkovOperator.from_lcmg(g))


def _counting_check(op):
    mu = kesten_measure(op)
    evals = np.sort(np.linalg.eigvalsh(op.dense()))
    for loc, mass in mu.atoms:
        count = np.sum(np.abs(evals - loc) <= 1e-9 * op.norm_bound)
        assert mass == pytest.approx(count / op.dim, abs=1e-10)
    fast = counting_measure(op)
    assert fast.locations == pytest.approx(mu.locations, abs=1e-9 * op.norm_bound)
    assert fast.masses == pytest.approx(mu.masses, abs=1e-10)


def test_vertex_transitive_mass_is_counting_measure_heisenberg(H, heis_gens):
    a, b = heis_gens["a"], heis_gens["b"]
    z = gram(RingElement.one(H) - a - b)
    for level in (1, 2):
        _counting_check(quotient_operator(QuotientChain(H, moduli=(2, 4)), level, z))


@pytest.mark.parametrize("m", [16, 32])
def test_vertex_transitive_mass_is_counting_measure_lattice(Z, t, m):
    w = RingElement.one(Z) - t * 0.5 + t**3 * 0.25j
    _counting_check(quotient_operator(QuotientChain(Z, moduli=(m,)), 1, gram(w)))


def three_way(chain, level, z, kmax=10):
    zn = project_ring(chain, level, z)
    op = quotient_operator(chain, level, z)
    walks = walk_moments(op, kmax)
    mu = kesten_measure(op)
    for k in range(kmax + 1):
        pt = power_trace(zn, k)
        spec = mu.moment(k)
        scale = max(1.0, abs(pt))
        assert abs(walks[k] - pt) <= 1e-9 * scale
        assert abs(spec - pt) <= 1e-9 * scale


@pytest.mark.parametrize("level", [1, 2, 3, 4, 5])
def test_three_way_moments_lattice(Z, t, level):
    w = RingElement.one(Z) - t * 2 + t**3 * 0.5
    three_way(QuotientChain.powers(Z, 2, 5), level, gram(w))


@pytest.mark.parametrize("level", [1, 2])
def test_three_way_moments_heisenberg(H, heis_gens, level):
    a, b, c = heis_gens["a"], heis_gens["b"], heis_gens["c"]
    w = RingElement.one(H) - a * (0.5 + 0.5j) + b * c * 0.25
    three_way(QuotientChain.powers(H, 2, 2), level, gram(w))


@pytest.mark.filterwarnings("ignore:support generates a subgroup")
@settings(max_examples=25, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=1, max_size=4))
def test_gram_quotients_are_psd(coefs):
    H = Heisenberg()
    gens = [H.identity(), (1, 0, 0), (0, 1, 0), (1, 1, 0)]
    w = RingElement(H, list(zip(gens, coefs)))
    op = quotient_operator(QuotientChain(H, moduli=(2, 4)), 2, gram(w))
    assert op.asymmetry() <= 1e-12
    assert np.linalg.eigvalsh(op.dense()).min() >= -1e-9 * max(op.norm_bound, 1.0)
    mu = kesten_measure(op)
    assert abs(mu.total_mass - 1) <= 1e-9
    assert all(-mu.bound - 1e-9 <= x <= mu.bound + 1e-9 for x in mu.locations)


def test_sdf_of_four_cycle(Z, t):
    w = RingElement.one(Z) - t
    op = quotient_operator(QuotientChain(Z, moduli=(4,)), 1, gram(w))
    F = sdf_from_measure(kesten_measure(op))
    assert F(0.0) == pytest.approx(0.25)
    assert F(1.0) == pytest.approx(0.25)
    assert F(math.sqrt(2)) == pytest.approx(0.75)
    assert F(2.0) == pytest.approx(1.0)
    assert betti(F) == pytest.approx(0.25)
    with pytest.raises(DomainError):
        F(-0.1)


@pytest.mark.filterwarnings("ignore:support generates a subgroup")
def test_sdf_trivial_cases(Z):
    ch = QuotientChain(Z, moduli=(8,))
    zero = sdf_from_measure(kesten_measure(quotient_operator(ch, 1, gram(RingElement.zero(Z)))))
    assert betti(zero) == 1 and np.all(zero(np.linspace(0, 3, 7)) == 1)
    one = sdf_from_measure(kesten_measure(quotient_operator(ch, 1, gram(RingElement.one(Z)))))
    assert betti(one) == 0
    assert one(0.999) == 0 and one(1.0) == 1 and one(5.0) == 1


def test_sdf_monotone_and_right_continuous(Z, t):
    w = RingElement.one(Z) - t + t**2 * 0.3
    op = quotient_operator(QuotientChain(Z, moduli=(64,)), 1, gram(w))
    F = sdf_from_measure(kesten_measure(op))
    grid = np.linspace(0, 3, 1000)
    vals = F(grid)
    assert np.all(np.diff(vals) >= 0)
    for lam in np.sqrt(F.measure.locations):
        assert F(lam) == pytest.approx(F(lam + 1e-7), abs=1e-12)


def test_negative_atom_rejected():
    mu = KestenMeasure((-1.0, 1.0), (0.5, 0.5), bound=1.0)
    with pytest.raises(Exception, match="not of the form"):
        sdf_from_measure(mu)


def test_csv_output(Z, t):
    op = quotient_operator(QuotientChain(Z, moduli=(4,)), 1, gram(RingElement.one(Z) - t))
    text = sdf_from_measure(kesten_measure(op)).to_csv([0.0, 2.0])
    rows = [line.split(",") for line in text.splitlines()]
    assert rows[0] == ["lambda", "F"]
    assert [float(r[0]) for r in rows[1:]] == [0.0, 2.0]
    assert [float(r[1]) for r in rows[1:]] == pytest.approx([0.25, 1.0], abs=1e-12)
