from fractions import Fraction

import numpy as np
import pytest

from apk.cps import (TAU, CutProjectScheme, Window, ammann_beenker_scheme, ammann_beenker_window,
                     build_scheme, check_pairing, dual_scheme, eigen_enumerate, fibonacci_scheme,
                     fibonacci_window, find_small_eigenvalue, lattice_scheme, model_set,
                     pairing_matrix, same_lattice, window_checks)
from apk.errors import InjectivityViolation, NotFound, SingularBasis
from apk.patternspace import Region


@pytest.fixture(scope="module")
def fib():
    return fibonacci_scheme()


def test_build_scheme_examples(fib):
    assert fib.certificates["injectivity"]["violations"] == 0
    assert fib.density_eps < 0.25
    with pytest.raises(InjectivityViolation):
        build_scheme([[1, 0], [0, 1]], 1, 1)
    with pytest.raises(SingularBasis):
        build_scheme([[1, 1], [2, 2]], 1, 1)


def test_dual_examples(fib):
    Z2 = lattice_scheme([[1, 0], [0, 1]])
    assert same_lattice(Z2, dual_scheme(Z2).scheme)
    DS = dual_scheme(fib)
    assert fib.det() == 1 - 2 * TAU
    G = pairing_matrix(fib, DS.scheme)
    assert G == [[1, 0], [0, 1]]
    assert check_pairing(fib, DS, bound=20).ok
    assert same_lattice(fib, dual_scheme(DS.scheme).scheme)


def test_ammann_beenker_dual():
    S = ammann_beenker_scheme()
    DS = dual_scheme(S)
    rep = check_pairing(S, DS, bound=5)
    assert rep.ok and rep.pairs_checked > 0
    assert same_lattice(S, dual_scheme(DS.scheme).scheme)


def test_window_checks(fib):
    rep = window_checks(fib, fibonacci_window())
    assert rep.passed and rep.boundary_hits == []
    bad = window_checks(fib, Window.interval(0, TAU))
    assert not bad.generic
    assert any(h["coeffs"] == [0, 0] for h in bad.boundary_hits)
    assert not window_checks(fib, Window.interval(0, 0)).interior_nonempty
    third = window_checks(fib, Window.interval(Fraction(1, 3), Fraction(5, 2)))
    assert third.generic


def test_model_set_examples(fib):
    D = model_set(fib, fibonacci_window(), Region((-50,), (50,)))
    gaps = np.unique(np.round(np.diff(D.coords[:, 0]), 12))
    np.testing.assert_allclose(gaps, [1, float(TAU)])
    empty = model_set(fib, Window.interval(0, 0), Region((-50,), (50,)))
    assert len(empty) == 0
    sub = model_set(fib, Window.interval(-TAU / 4, TAU / 4), Region((-50,), (50,)))
    assert set(sub.points) <= set(D.points)


def test_model_set_ammann_beenker():
    S = ammann_beenker_scheme()
    D = model_set(S, ammann_beenker_window(S), Region((-6, -6), (6, 6)))
    assert len(D) > 50
    assert D.min_distance() > 0.7


def test_eigen_enumerate(fib):
    Z2 = lattice_scheme([[1, 0], [0, 1]])
    chars = eigen_enumerate(Z2, 3, 0)
    assert sorted(tuple(c.a) for c in chars if c.norm() <= 1) == [(-1, 0), (0, -1), (0, 0),
                                                                    (0, 1), (1, 0)]
    small = eigen_enumerate(fib, 0.05, 25, include_zero=False)
    assert small and all(c.norm() <= 0.05 for c in small)
    zero = eigen_enumerate(fib, 0, 25)
    assert [c.norm() for c in zero] == [0.0]


def test_find_small_eigenvalue(fib):
    ch = find_small_eigenvalue(fib, 10, 0.05)
    assert 1 / 10.05 < ch.norm() < 1 / 9.95
    # the dual lattice contains the pairing partners of the basis, so a direct hit is exact
    DS = dual_scheme(fib)
    a = DS.scheme.physical((1, 0))[0]
    hit = find_small_eigenvalue(fib, 1 / float(a), 1e-6)
    assert hit.a[0] == a or hit.a[0] == -a
    Z = lattice_scheme([[1]])
    with pytest.raises(NotFound):
        find_small_eigenvalue(Z, 2 ** 0.5, 0.01)


def test_scheme_json_round_trip(fib):
    T = CutProjectScheme.from_json(fib.to_json())
    assert T.basis == fib.basis and T.d == 1 and T.m == 1
