from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from apk.cps import TAU, Character
from apk.errors import DimMismatch, NoPairs, NotExpansive, PreconditionError, SingularMap
from apk.exactnum import QuadReal
from apk.spectra import (band_counts, character_phase, circular_diameter, equivariance_modulus,
                         pisot_shrink, rho_T, vspace_rank)

SQRT2 = QuadReal.sqrt(2)
SQRT5 = QuadReal.sqrt(5)
turns = st.floats(-3, 3, allow_nan=False)


def test_rho_examples():
    assert rho_T(0.1, 0.9) == pytest.approx(0.2)
    assert rho_T(0.3, 0.3) == 0
    assert rho_T(0.25, 0.5) == pytest.approx(0.25)


@given(turns, turns, turns)
def test_rho_is_a_metric(a, b, c):
    assert abs(rho_T(a, b) - rho_T(b, a)) < 1e-12
    assert rho_T(a, c) <= rho_T(a, b) + rho_T(b, c) + 1e-12
    assert 0 <= rho_T(a, b) <= 0.5


def test_character_phase_examples():
    assert character_phase(1, (Fraction(9, 4),)) == 0.25
    assert character_phase(0, (SQRT2,)) == 0
    assert character_phase((1, 1), (Fraction(1, 2), Fraction(3, 4))) == 0.25
    # exact path settles phases next to an integer
    assert character_phase(TAU, (TAU - 1,)) == 0.0
    with pytest.raises(DimMismatch):
        character_phase((1, 1), (0,))


@given(st.lists(st.floats(0, 1, exclude_max=True), min_size=2, max_size=30))
def test_circular_diameter_brute_force(th):
    t = np.asarray(th)
    brute = max(rho_T(a, b) for a in t for b in t)
    assert circular_diameter(t) == pytest.approx(brute, abs=1e-12)
    cnt = band_counts(t, 0.1)
    want = [(rho_T(t, x) <= 0.1 + 1e-12).sum() for x in t]
    assert cnt.tolist() == want


def test_equivariance_integers(ints):
    grid = [1, 2, 5, 10, 50]
    rep = equivariance_modulus(ints, 1, grid)
    assert rep.omega == [0.0] * len(grid)
    rep2 = equivariance_modulus(ints, (SQRT2,), grid)
    assert min(rep2.omega) > 0.49
    assert rep2.is_nonincreasing()


def test_equivariance_needs_pairs(ints_small):
    with pytest.raises(NoPairs):
        equivariance_modulus(ints_small, 1, [25])
    rep = equivariance_modulus(ints_small, 1, [2, 25], allow_empty=True)
    assert rep.omega == [0.0, None]


def test_fibonacci_decay_with_pisot_shrink(fib_big):
    # tau^-5 applied to a dual-lattice character still decays inside the window
    a = Character((SQRT5 / 5,), (-SQRT5 / 5,))
    b = pisot_shrink(TAU, a, 5)
    assert b.a[0] == Fraction(5, 2) - Fraction(11, 10) * SQRT5
    rep = equivariance_modulus(fib_big, b, [25, 50, 100, 200, 400])
    assert rep.is_nonincreasing()
    assert rep.omega[0] > 0.2
    assert rep.first_below(0.05) is not None and float(rep.first_below(0.05)) <= 200


def test_envelope_is_monotone(fib_small):
    rep = equivariance_modulus(fib_small, (SQRT5 / 5,), [5, 10, 20, 40, 80, 160])
    for w, raw in zip(rep.omega, rep.omega_raw):
        assert w >= raw
    assert rep.is_nonincreasing()


def test_vspace_examples():
    assert vspace_rank([1], [0.5], 10_000) == 0
    assert vspace_rank([1, TAU], [1, 0.5, 0.1, 0.02], 10_000) == 1
    s2 = float(SQRT2)
    G = [(1, 0), (0, 1), (s2, 0), (0, s2)]
    assert vspace_rank(G, [0.5, 0.1], 100) == 2
    assert vspace_rank([(1, 0), (0, 1), (s2, 0)], [0.5, 0.1], 100) == 1
    with pytest.raises(PreconditionError):
        vspace_rank(G, [0.1], 10_000)


def test_pisot_shrink_examples():
    c = pisot_shrink(TAU, 1, 3)
    assert c.a[0] == SQRT5 - 2
    assert c.norm() == pytest.approx(0.2360679, abs=1e-7)
    a = Character((Fraction(3, 7),))
    assert pisot_shrink(TAU, a, 0) == a
    with pytest.raises(NotExpansive):
        pisot_shrink(Fraction(1, 2), 1, 2)
    with pytest.raises(SingularMap):
        pisot_shrink([[2, 0], [0, 0]], (1, 1), 1)
    two = pisot_shrink([[3, 1], [1, 2]], (1, 0), 2)
    M = np.array([[3, 1], [1, 2]], float)
    np.testing.assert_allclose(two.a_float(), np.linalg.matrix_power(np.linalg.inv(M.T), 2)
                               @ [1, 0])
