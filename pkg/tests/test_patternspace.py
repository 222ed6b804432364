from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from apk.errors import InsufficientWindow
from apk.exactnum import QuadReal
from apk.generators import gen_lattice, gen_poisson_delone
from apk.patternspace import (Ball, Box, Empty, FiniteSet, LabeledPointSet, Patch, PointSet,
                              Region, Union, WeightedComb, entourage_test, flc_census, from_json,
                              index_for, intersect, local_derivability_check, local_equal,
                              local_match_dist, patch_at, patch_eq, repetitivity_radius,
                              support, to_json)
from apk.patternspace.axioms import IMPLEMENTATIONS, _Gen, check_case, run_axioms

R1 = Region((-20,), (20,))


def pts(*xs, region=R1):
    return PointSet.from_exact([(Fraction(x).limit_denominator(1000),) for x in xs], region)


def test_wedge_examples():
    assert pts(0, 1, 2, 3).wedge(Ball((0,), Fraction(3, 2))) == pts(0, 1)
    P = Patch([((0,), (1,)), ((1,), (2,))], R1)
    assert P.wedge(Box((0,), (1,))) == Patch([((0,), (1,))], R1)
    assert P.wedge(Box((-5,), (5,))) == P


def test_translate_examples():
    assert pts(0, 1).translate((Fraction(1, 2),)) == pts(0.5, 1.5).translate((0,))
    P = pts(0, 1, 5)
    x = (QuadReal.golden(),)
    assert P.translate(x).translate((-x[0],)) == P


def test_support_examples():
    S = support(pts(0, 2))
    assert isinstance(S, FiniteSet) and sorted(p[0] for p in S.points) == [0, 2]
    assert isinstance(support(pts()), Empty)
    U = support(Patch([((0,), (1,)), ((2,), (3,))], R1))
    assert isinstance(U, Union) and len(U.parts) == 2


def test_patch_at_examples(ints_small):
    assert patch_at(ints_small, (0,), Fraction(5, 2)).points == [(k,) for k in range(-2, 3)]
    assert len(patch_at(ints_small, (Fraction(1, 2),), Fraction(2, 5))) == 0
    with pytest.raises(InsufficientWindow):
        patch_at(ints_small, (19,), 3)


def test_patch_eq_examples():
    reg = Region((-2,), (2,))
    P = PointSet.from_floats([[0.0]], reg)
    assert patch_eq(P, P)
    assert patch_eq(P, PointSet.from_floats([[0.005]], reg), tol=0.01)
    assert not patch_eq(pts(0), pts(0, 1))


def test_local_match_dist(ints_small):
    shifted = ints_small.translate((Fraction(3, 10),))
    grid = [Fraction(k, 100) for k in range(10, 70, 5)]
    assert local_match_dist(ints_small, ints_small, grid) == 0.1
    assert local_match_dist(ints_small, shifted, grid) == pytest.approx(0.15)
    assert local_match_dist(shifted, ints_small, grid) == pytest.approx(0.15)


def test_entourage_examples(ints_small):
    shifted = ints_small.translate((Fraction(2, 5),))
    K = Ball((0,), 3)
    assert entourage_test(ints_small, ints_small, K, Ball((0,), Fraction(1, 2)))
    assert entourage_test(ints_small, shifted, K, Ball((0,), Fraction(1, 2)))
    assert not entourage_test(ints_small, shifted, K, Ball((0,), Fraction(1, 10)))


def test_flc_census(ints_small, fib_small):
    xs = [ints_small.vec(i) for i in range(5, 30)]
    assert flc_census(ints_small, Fraction(3, 2), xs) == 1
    cov = np.flatnonzero(index_for(fib_small).covered(3))
    n1 = flc_census(fib_small, 3, [fib_small.vec(int(i)) for i in cov[:100]])
    n2 = flc_census(fib_small, 3, [fib_small.vec(int(i)) for i in cov])
    assert 1 < n1 <= n2 <= 8
    P = gen_poisson_delone(Region((-60,), (60,)), 0.5, 1.5, seed=3)
    cov = np.flatnonzero(index_for(P).covered(3))
    few = flc_census(P, 3, [P.vec(int(i)) for i in cov[:10]])
    many = flc_census(P, 3, [P.vec(int(i)) for i in cov[:40]])
    assert few < many


def test_repetitivity(fib_small):
    Z = gen_lattice(2, [[1, 0], [0, 1]], Region((-6, -6), (6, 6)))
    rad = repetitivity_radius(Z, (0, 0), 1)
    assert rad == pytest.approx(np.sqrt(2) / 2, abs=0.05)
    x0 = fib_small.vec(len(fib_small) // 2)
    assert repetitivity_radius(fib_small, x0, 5) < 20
    P = gen_poisson_delone(Region((-100,), (100,)), 0.5, 1.5, seed=1)
    assert repetitivity_radius(P, P.vec(len(P) // 2), 5) is None


def test_local_derivability(ints_small, fib_small):
    samples = [(ints_small.vec(i), ints_small.vec(j), 2) for i, j in ((10, 12), (11, 25))]
    rep = local_derivability_check(ints_small, ints_small, 0, samples)
    assert rep.consistent and rep.hypothesis_held == 2
    # interval tiles between consecutive Fibonacci points derive their left endpoints
    tiles = [(fib_small.vec(i), fib_small.vec(i + 1)) for i in range(len(fib_small) - 1)]
    T = Patch(tiles, fib_small.region)
    left = fib_small._like(mask=np.arange(len(fib_small)) < len(fib_small) - 1)
    cov = np.flatnonzero(index_for(fib_small).covered(8))
    samples = [(fib_small.vec(int(i)), fib_small.vec(int(j)), 2)
               for i, j in zip(cov[:40], cov[7:47])]
    assert local_derivability_check(T, left, 2, samples).consistent
    # random relabelling is not locally derivable from the lattice
    rng = np.random.default_rng(0)
    noisy = PointSet.from_floats(ints_small.coords + rng.uniform(-0.2, 0.2, (len(ints_small), 1)),
                                 Region((-21,), (21,)))
    samples = [(ints_small.vec(i), ints_small.vec(i + 1), 1) for i in range(5, 30)]
    assert not local_derivability_check(ints_small, noisy, 1, samples).consistent


def test_local_equal_on_lattice(ints_small):
    assert local_equal(ints_small, (0,), (3,), 4)
    assert not local_equal(ints_small, (0,), (Fraction(1, 2),), 4)


@pytest.mark.parametrize("kind", IMPLEMENTATIONS)
def test_axioms_small_run(kind):
    rep, = run_axioms(150, seed=7, kinds=(kind,))
    assert rep.cases == 150 and rep.failures == 0, rep.examples


@given(st.integers(0, 2 ** 32), st.sampled_from(IMPLEMENTATIONS))
def test_axioms_hypothesis(seed, kind):
    g = _Gen(seed)
    d = 1 + g.rng.randrange(2)
    P = g.pattern(kind, d)
    assert check_case(P, g.closed(d), g.closed(d), g.vec(d, -3, 3)) == []


@given(st.lists(st.fractions(-15, 15, max_denominator=8), max_size=12, unique=True))
def test_pointset_json_round_trip(xs):
    P = PointSet.from_exact([(x,) for x in xs], R1)
    assert from_json(to_json(P)) == P


def test_labeled_and_comb_json_round_trip():
    L = LabeledPointSet.from_exact([(0,), (QuadReal.golden(),)], ["a", "b"], R1)
    W = WeightedComb.from_exact([(0,), (1,)], [1 + 2j, 3], R1)
    assert from_json(to_json(L)) == L
    assert from_json(to_json(W)) == W


def test_intersection_is_closed_set_meet():
    C = intersect(Ball((0,), 2), Box((1,), (5,)))
    assert C.contains_vec((Fraction(3, 2),)) and not C.contains_vec((3,))
