from hypothesis import given
from hypothesis import strategies as st

from apk.rng import SplitMix64, halton


def test_reference_vector():
    # published splitmix64 outputs for seed 1234567
    g = SplitMix64(1234567)
    assert [g.next_u64() for _ in range(5)] == [
        6457827717110365317, 3203168211198807973, 9817491932198370423,
        4593380528125082431, 16408922859458223821]


@given(st.integers(0, 2 ** 64 - 1), st.integers(1, 1000))
def test_ranges(seed, n):
    g = SplitMix64(seed)
    for _ in range(20):
        assert 0 <= g.randrange(n) < n
        assert 0 <= g.random() < 1


def test_halton():
    assert halton(3, 2) == [(0.5, 1 / 3), (0.25, 2 / 3), (0.75, 1 / 9)]
