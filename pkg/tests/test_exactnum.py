from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from apk.errors import DiscMismatch, UsageError
from apk.exactnum import (QuadReal, key_to_quad, keys_from_values, keys_to_float, parse_exact,
                          qf_arith, qf_cmp, qf_conj, qmat_det, qmat_inv, qmat_mul, sign_pq)

TAU = QuadReal.golden()
rats = st.fractions(min_value=-50, max_value=50, max_denominator=30)


def quads(disc=5):
    return st.builds(lambda p, q: QuadReal(p, q, disc), rats, rats)


def test_spec_examples():
    assert qf_arith(TAU, TAU, "*") == QuadReal(Fraction(3, 2), Fraction(1, 2), 5)
    assert TAU * TAU == TAU + 1
    assert qf_arith(TAU, QuadReal(0, 0, 5), "+") == TAU
    s2 = QuadReal.sqrt(2)
    assert (3 + 2 * s2) * (3 - 2 * s2) == 1
    assert qf_conj(TAU) == 1 - TAU
    assert qf_conj(QuadReal(Fraction(7, 3), 0, 5)) == Fraction(7, 3)
    assert qf_conj(3 + 2 * s2) == 3 - 2 * s2
    assert qf_cmp(TAU, QuadReal(Fraction(3, 2), 0, 5)) == 1
    assert qf_cmp(TAU, TAU) == 0
    assert qf_cmp(1 - TAU, QuadReal(0, 0, 5)) == -1


@given(quads(), quads(), quads())
def test_field_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a and a * b == b * a
    assert a - a == 0 and a + 0 == a and a * 1 == a
    if a != 0:
        assert a * a.inverse() == 1
        assert (b / a) * a == b


@given(quads(), quads())
def test_conj_is_field_automorphism(a, b):
    assert (a * b).conj() == a.conj() * b.conj()
    assert (a + b).conj() == a.conj() + b.conj()
    assert a.conj().conj() == a
    assert a.norm() == (a * a.conj()).p


@given(quads(), quads())
def test_order_matches_floats(a, b):
    fa, fb = a.to_float(), b.to_float()
    if abs(fa - fb) > 1e-9:
        assert (a < b) == (fa < fb)
    assert qf_cmp(a, b) == -qf_cmp(b, a)


@given(rats, rats, st.sampled_from([2, 3, 5, 7]))
def test_sign_exact(u, v, n):
    x = float(u) + float(v) * n ** 0.5
    if abs(x) > 1e-9:
        assert sign_pq(u, v, n) == (1 if x > 0 else -1)


def test_floats_rejected_and_fields_checked():
    with pytest.raises(TypeError):
        QuadReal(0.5, 0)
    with pytest.raises(TypeError):
        TAU + 0.5
    with pytest.raises(DiscMismatch):
        TAU + QuadReal.sqrt(2)
    with pytest.raises(UsageError):
        QuadReal(1, 1, 4)
    # rationals cross fields freely
    assert QuadReal(2, 0, 2) + TAU == TAU + 2


def test_parse_exact():
    assert parse_exact("tau") == TAU
    assert parse_exact("0.1") == Fraction(1, 10)
    assert parse_exact("3/2") == Fraction(3, 2)
    assert parse_exact("1/2+1/2*sqrt5") == TAU
    assert parse_exact("sqrt8") == QuadReal(0, 2, 2)
    assert parse_exact("tau**2") == TAU + 1
    assert parse_exact("2", disc=5) == QuadReal(2, 0, 5)
    with pytest.raises(UsageError):
        parse_exact("pi")
    with pytest.raises(UsageError):
        parse_exact("1+")


@given(st.lists(quads(), min_size=1, max_size=20))
def test_keys_round_trip(vals):
    keys, den = keys_from_values(vals, 5)
    back = [key_to_quad(k, den, 5) for k in keys]
    assert back == vals
    np.testing.assert_allclose(keys_to_float(keys, den, 5), [v.to_float() for v in vals],
                               rtol=1e-12, atol=1e-12)


def test_matrix_inverse_exact():
    M = [[QuadReal(1, 0, 5), QuadReal(1, 0, 5)], [TAU, 1 - TAU]]
    assert qmat_det(M) == 1 - 2 * TAU
    I = qmat_mul(M, qmat_inv(M))
    assert I == [[1, 0], [0, 1]]
