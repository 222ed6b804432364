from fractions import Fraction

import numpy as np
import pytest

from apk.cps import TAU, Window
from apk.errors import InfeasibleParams, NotDeloneSupport, TooManyClasses, UsageError
from apk.generators import (GeneratorConfig, align_translation, fibonacci_labels, fibonacci_word,
                            gen_ammann_beenker, gen_fibonacci_cps, gen_fibonacci_substitution,
                            gen_lattice, gen_poisson_delone, gen_silver_mean, generate,
                            mld_witness, to_delone)
from apk.patternspace import LabeledPointSet, Patch, PointSet, Region, WeightedComb
from apk.patternspace.index import index_for
from apk.patternspace.local import flc_census


def test_lattice_examples():
    Z = gen_lattice(1, [[1]], Region((-10,), (10,)))
    assert Z.points == [(k,) for k in range(-10, 11)]
    off = gen_lattice(1, [[1]], Region((-10,), (10,)), Fraction(3, 10))
    assert off.points == [(Fraction(3, 10) + k,) for k in range(-10, 10)]
    G = gen_lattice(2, [[1, 0], [0, 1]], Region((-2, -2), (2, 2)))
    assert len(G) == 25


def test_fibonacci_cps_examples():
    D = gen_fibonacci_cps(Region((-50,), (50,)))
    gaps = {round(g, 12) for g in np.diff(D.coords[:, 0])}
    assert gaps == {1.0, round(float(TAU), 12)}
    sub = gen_fibonacci_cps(Region((-50,), (50,)), Window.interval(-TAU / 3, TAU / 3))
    assert set(sub.points) < set(D.points)
    assert len(gen_fibonacci_cps(Region((0,), (0,)))) <= 1


def test_substitution_examples():
    assert fibonacci_word(1) == "ab"
    assert gen_fibonacci_substitution(1).points == [(0,), (TAU,)]
    lengths = [len(fibonacci_word(k)) for k in range(1, 12)]
    assert all(c == a + b for a, b, c in zip(lengths, lengths[1:], lengths[2:]))
    with pytest.raises(UsageError):
        fibonacci_word(0)


def test_substitution_matches_cps():
    reg = Region((-100,), (100,))
    t = align_translation(gen_fibonacci_cps(reg), gen_fibonacci_substitution(20), reg)
    assert t is not None


def test_silver_mean_gaps():
    D = gen_silver_mean(Region((-50,), (50,)))
    assert len({round(g, 9) for g in np.diff(D.coords[:, 0])}) == 2


def test_ammann_beenker_examples():
    D = gen_ammann_beenker(Region((-8, -8), (8, 8)))
    assert D.min_distance() > 0.76
    diffs = []
    P = D.coords
    # anchors in a disc so every neighbour lies in the window
    for i in np.flatnonzero(np.linalg.norm(P, axis=1) < 6):
        v = P - P[i]
        n = np.linalg.norm(v, axis=1)
        diffs.append(v[(n > 0) & (n < 1.01)])
    v = np.concatenate(diffs)
    ang = np.mod(np.arctan2(v[:, 1], v[:, 0]) + np.pi / 8, 2 * np.pi)
    hist = np.bincount((ang // (np.pi / 4)).astype(int) % 8, minlength=8)
    assert hist.max() <= 1.1 * hist.mean() and hist.min() >= 0.9 * hist.mean()
    assert len(gen_ammann_beenker(Region((100, 100), (100, 100)))) <= 1


def test_poisson_control():
    reg = Region((-40,), (40,))
    A = gen_poisson_delone(reg, 0.5, 1.5, seed=5)
    B = gen_poisson_delone(reg, 0.5, 1.5, seed=5)
    assert np.array_equal(A.coords, B.coords)
    cert = A.delone_certificate()
    assert cert["r"] >= 0.5 * (1 - 1e-9) and cert["R"] <= 1.5
    P2 = gen_poisson_delone(Region((-8, -8), (8, 8)), 0.5, 1.2, seed=2)
    assert P2.min_distance() > 0.5 and P2.covering_radius() <= 1.2
    with pytest.raises(InfeasibleParams):
        gen_poisson_delone(reg, 2, 1, seed=0)


def test_poisson_census_grows():
    P = gen_poisson_delone(Region((-100,), (100,)), 0.5, 1.5, seed=9)
    cov = np.flatnonzero(index_for(P).covered(3))
    assert flc_census(P, 3, [P.vec(int(i)) for i in cov[:20]]) < \
        flc_census(P, 3, [P.vec(int(i)) for i in cov[:80]])


def test_to_delone_examples():
    reg = Region((-1,), (11,))
    T = Patch([((k,), (k + 1,)) for k in range(10)], reg)
    assert to_delone(T).points == [(k,) for k in range(10)]
    L = LabeledPointSet.from_exact([(k,) for k in range(6)], list("ABABBA"), reg)
    D = to_delone(L)
    offs = sorted({p[0] - round(p[0]) for p in D.points})
    assert offs == [0, Fraction(1, 4)]
    wit = mld_witness(L, D, 2, count=20)
    assert all(r.consistent for r in wit.values())
    W = WeightedComb.from_exact([(0,), (2,), (5,)], [1, 2j, 3], reg)
    assert to_delone(W).points == [(0,), (2,), (5,)]
    with pytest.raises(NotDeloneSupport):
        to_delone(Patch([], reg))
    with pytest.raises(TooManyClasses):
        to_delone(LabeledPointSet.from_exact([(k,) for k in range(6)], list("ABCDEF"), reg),
                  max_classes=3)


def test_fibonacci_decoration_mld(fib_small):
    L = fibonacci_labels(fib_small)
    assert set(L.labels) == {"a", "b"}
    D = to_delone(L)
    wit = mld_witness(L, D, 4, count=60)
    assert all(r.consistent and r.hypothesis_held > 0 for r in wit.values())


def test_config_json(tmp_path):
    cfg = GeneratorConfig("lattice", ((-3,), (3,)), params={"offset": ["1/4"]})
    p = tmp_path / "cfg.json"
    p.write_text(__import__("json").dumps(cfg.to_json()))
    back = GeneratorConfig.load(p)
    assert back == cfg
    assert generate(back).points[0] == (Fraction(-11, 4),)
    with pytest.raises(UsageError):
        GeneratorConfig("penrose", ((0,), (1,)))
    with pytest.raises(UsageError):
        GeneratorConfig("poisson-control", ((0,), (1,)))
