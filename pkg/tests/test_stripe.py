import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from apk.cps import Character, fibonacci_scheme
from apk.errors import (CocycleViolation, NotFound, NotRelativelyDense, PreconditionError,
                        R0TooSmall)
from apk.exactnum import QuadReal
from apk.generators import gen_poisson_delone
from apk.patternspace import Region
from apk.stripe import (StripeCertificate, StripeSpec, band_distance, eigen_from_stripe,
                        level_set_refine, locator_set, matched_set, stripe_membership,
                        stripe_search, stripe_verify)

SQRT2 = QuadReal.sqrt(2)


@pytest.fixture(scope="module")
def poisson():
    return gen_poisson_delone(Region((-150,), (150,)), 0.5, 1.5, seed=11)


@pytest.fixture(scope="module")
def fib_cert(fib_big):
    return stripe_search(fib_big, None, 3, 0.2, 0.05)


def test_membership_examples():
    s = StripeSpec((1, 0), 1, 0.1, 1)
    assert stripe_membership(s, (0.3, 4), (0.3, 4))
    assert stripe_membership(s, (0, 0), (2.05, 7))
    assert not stripe_membership(s, (0, 0), (0.5, 0))
    assert band_distance(s, (0, 0), (0.5, 0)) == 0.5


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-50, 50), st.floats(-50, 50),
       st.floats(0.5, 5), st.integers(-5, 5))
def test_membership_periodic(ax, ay, bx, by, L1, k):
    if math.hypot(ax, ay) < 1e-3:
        return
    s = StripeSpec((ax, ay), L1, L1 / 8, 1)
    a = np.asarray(s.a)
    b = np.array([bx, by])
    x = b + np.array([0.37, -1.1])
    d0 = band_distance(s, b, x)
    assert abs(band_distance(s, b, x + k * L1 * a) - d0) < 1e-9
    assert abs(band_distance(s, b + k * L1 * a, x) - d0) < 1e-9


def test_matched_set_integers(ints):
    M = matched_set(ints, (Fraction(3, 10),), 2, search_radius=5)
    assert sorted(p[0] for p in M.points) == [Fraction(3, 10) + n for n in range(-5, 6)]


def test_matched_set_fibonacci_and_poisson(fib_small, poisson):
    x = fib_small.vec(len(fib_small) // 2)
    M = matched_set(fib_small, x, 10)
    assert len(M) > 5 and x in M.points
    gaps = np.diff(M.coords[:, 0])
    assert gaps.max() < 60
    y = poisson.coords[len(poisson) // 2]
    assert len(matched_set(poisson, tuple(y), 10)) == 1


def test_verify_integers(ints):
    ok = stripe_verify(ints, StripeSpec((1,), 1, 0.01, 1.5))
    assert ok.holds and ok.violation_count == 0 and ok.off_point_anchors == 1000
    bad = stripe_verify(ints, StripeSpec((1,), math.sqrt(2), 0.1, 1.5))
    assert not bad.holds
    d = [v[2] for v in bad.violations if abs(v[1][0] - v[0][0]) == 1]
    assert d and abs(d[0] - (math.sqrt(2) - 1)) < 1e-9


def test_search_integers_not_found(ints):
    with pytest.raises(NotFound):
        stripe_search(ints, None, math.sqrt(2), 0.1, 0.01)


def test_search_explicit_character(ints):
    chars = [Character((Fraction(1, 2),)), Character((1,))]
    cert = stripe_search(ints, chars, 1, 0.1, 0.01)
    assert cert.spec.L1 == 1.0 and cert.holds


def test_search_fibonacci(fib_cert):
    s = fib_cert.spec
    assert abs(s.L1 - 3) < 0.05 and s.L2 == 0.2
    assert fib_cert.holds and fib_cert.off_point_anchors >= 1000
    back = StripeCertificate.from_json(fib_cert.to_json())
    assert back.spec == s and back.source_character == fib_cert.source_character


def test_search_is_deterministic(fib_big, fib_cert):
    again = stripe_search(fib_big, fibonacci_scheme(), 3, 0.2, 0.05)
    assert again.to_json() == fib_cert.to_json()


def test_locator_examples(ints, fib_small, poisson):
    E, info = locator_set(ints, (0,), 2)
    assert E.points == [(k,) for k in range(-998, 999)]
    x0 = fib_small.vec(len(fib_small) // 2)
    E, info = locator_set(fib_small, x0, 5)
    assert info.r_E >= 1 and info.covering_radius < 10
    with pytest.raises(R0TooSmall):
        locator_set(fib_small, x0, Fraction(1, 2))
    with pytest.raises(NotRelativelyDense):
        locator_set(poisson, poisson.vec(len(poisson) // 2), 5)


def test_level_set_constant(fib_small):
    res = level_set_refine(fib_small, np.zeros(len(fib_small)), 0.1)
    assert len(res.D_eps) > 1 and res.spread == 0


def test_level_set_rejects_non_cocycle(ints):
    u = ints.coords[:, 0] * math.sqrt(2)
    theta = u - np.round(u)
    with pytest.raises(CocycleViolation):
        level_set_refine(ints, theta, 0.1)


def test_converse_integers(ints):
    cert = stripe_verify(ints, StripeSpec((1,), 1, 0.1, 2))
    res = eigen_from_stripe(ints, cert)
    assert res.character.a_float()[0] == pytest.approx(1.0)
    assert all(w == 0 for w in res.report_D.omega if w is not None)
    wide = stripe_verify(ints, StripeSpec((1,), 1, 0.3, 2))
    with pytest.raises(PreconditionError):
        eigen_from_stripe(ints, wide)


def test_converse_fibonacci(fib_big, fib_cert):
    res = eigen_from_stripe(fib_big, fib_cert)
    assert abs(1 / res.character.norm() - fib_cert.spec.L1) < 1e-12
    assert res.band_max < 0.25
    assert res.report_D.first_below(0.2 / 3.0109) is not None
    # f-leveling on the locator set keeps the phase spread below each eps
    done = [lv for lv in res.levels if not isinstance(lv, dict)]
    assert done and all(lv.spread < lv.eps and len(lv.D_eps) >= 1 for lv in done)
