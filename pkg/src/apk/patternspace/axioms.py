"""Randomized checks of the pattern-space axioms.

For each implementation, random exact (P, C1, C2, x) cases test

* composition: ``P ^ (C1 n C2) = (P ^ C1) ^ C2``
* support: ``P ^ C = P`` iff ``C`` contains ``support(P)``; also ``P ^ support(P) = P``
* equivariance: ``(P ^ C) + x = (P + x) ^ (C + x)``
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

from ..exactnum import QuadReal
from ..rng import SplitMix64
from .patterns import LabeledPointSet, Patch, PointSet, WeightedComb, contains_set, support
from .region import Ball, Band, Box, Region, intersect

IMPLEMENTATIONS = ("PointSet", "LabeledPointSet", "Patch", "WeightedComb")


@dataclass
class AxiomReport:
    implementation: str
    cases: int = 0
    composition_failures: int = 0
    support_failures: int = 0
    equivariance_failures: int = 0
    examples: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def failures(self) -> int:
        return self.composition_failures + self.support_failures + self.equivariance_failures

    def to_json(self) -> dict:
        return {"implementation": self.implementation, "cases": self.cases,
                "composition_failures": self.composition_failures,
                "support_failures": self.support_failures,
                "equivariance_failures": self.equivariance_failures,
                "failures": self.failures, "examples": self.examples[:5],
                "seconds": round(self.seconds, 3)}


class _Gen:
    def __init__(self, seed: int):
        self.rng = SplitMix64(seed)

    def int(self, lo: int, hi: int) -> int:
        return lo + self.rng.randrange(hi - lo + 1)

    def rat(self, lo: int = -5, hi: int = 5, den: int = 4):
        q = Fraction(self.int(lo * den, hi * den), den)
        if self.rng.randrange(4) == 0:
            # occasional quadratic irrational keeps the exact path honest
            return QuadReal(q, Fraction(self.int(-2, 2), 4), 5)
        return q

    def vec(self, d: int, lo=-5, hi=5):
        return tuple(self.rat(lo, hi) for _ in range(d))

    def region(self, d: int) -> Region:
        return Region.cube(-40, 40, d)

    def points(self, d: int, n: int) -> list:
        seen = {}
        for _ in range(n):
            v = self.vec(d)
            seen[tuple(float(c) for c in v)] = v
        return list(seen.values())

    def closed(self, d: int):
        k = self.rng.randrange(3)
        if k == 0:
            return Ball(self.vec(d, -3, 3), abs(self.rat(1, 5)) + Fraction(1, 2))
        if k == 1:
            lo = self.vec(d, -5, 1)
            hi = tuple(a + abs(self.rat(0, 6)) for a in lo)
            return Box(lo, hi)
        normal = tuple(Fraction(self.int(-2, 2)) for _ in range(d))
        if all(c == 0 for c in normal):
            normal = (Fraction(1),) + normal[1:]
        lo = self.rat(-6, 2)
        return Band(normal, lo, lo + abs(self.rat(0, 8)))

    def pattern(self, kind: str, d: int):
        region = self.region(d)
        if kind == "Patch":
            return self.patch(d, region)
        pts = self.points(d, self.int(0, 12))
        if kind == "PointSet":
            return PointSet.from_exact(pts, region, 5)
        if kind == "LabeledPointSet":
            return LabeledPointSet.from_exact(pts, [("A", "B", "C")[self.rng.randrange(3)]
                                                    for _ in pts], region, 5)
        weights = [complex(self.int(1, 3), self.int(-2, 2)) for _ in pts]
        return WeightedComb.from_exact(pts, weights, region, 5)

    def patch(self, d: int, region: Region) -> Patch:
        cuts = []
        for _ in range(d):
            c = [self.rat(-6, -2)]
            for _ in range(self.int(1, 4)):
                c.append(c[-1] + Fraction(self.int(1, 8), 4))
            cuts.append(c)
        tiles = []
        for idx in _grid(tuple(len(c) - 1 for c in cuts)):
            if self.rng.randrange(4) == 0:
                continue
            lo = tuple(cuts[k][i] for k, i in enumerate(idx))
            hi = tuple(cuts[k][i + 1] for k, i in enumerate(idx))
            tiles.append((lo, hi, ("a", "b", None)[self.rng.randrange(3)]))
        return Patch(tiles, region)


def _grid(shape):
    if not shape:
        yield ()
        return
    for i in range(shape[0]):
        for rest in _grid(shape[1:]):
            yield (i,) + rest


def _bounding_box(P):
    S = support(P)
    pts = []
    for part in getattr(S, "parts", (S,)):
        if hasattr(part, "points"):
            pts.extend(part.points)
        elif hasattr(part, "lo"):
            pts.extend([part.lo, part.hi])
    if not pts:
        return None
    d = len(pts[0])
    lo = tuple(min(p[k] for p in pts) - 1 for k in range(d))
    hi = tuple(max(p[k] for p in pts) + 1 for k in range(d))
    return Box(lo, hi)


def check_case(P, C1, C2, x) -> list:
    """Names of the axioms that fail on one case."""
    bad = []
    if P.wedge(intersect(C1, C2)) != P.wedge(C1).wedge(C2):
        bad.append("composition")
    full = P.wedge(C1) == P
    if full != contains_set(C1, support(P)):
        bad.append("support")
    elif P.wedge(support(P)) != P:
        bad.append("support")
    else:
        big = _bounding_box(P)
        if big is not None and P.wedge(big) != P:
            bad.append("support")
    if P.wedge(C1).translate(x) != P.translate(x).wedge(C1.translate(x)):
        bad.append("equivariance")
    return bad


def run_axioms(cases: int = 1000, seed: int = 0, kinds=IMPLEMENTATIONS) -> list:
    out = []
    for n, kind in enumerate(kinds):
        g = _Gen(seed * 1000003 + n)
        rep = AxiomReport(kind)
        t0 = time.perf_counter()
        for _ in range(cases):
            d = 1 + g.rng.randrange(2)
            P = g.pattern(kind, d)
            C1, C2 = g.closed(d), g.closed(d)
            x = g.vec(d, -3, 3)
            rep.cases += 1
            for name in check_case(P, C1, C2, x):
                setattr(rep, f"{name}_failures", getattr(rep, f"{name}_failures") + 1)
                if len(rep.examples) < 5:
                    rep.examples.append({"axiom": name, "pattern": repr(P),
                                         "C1": C1.to_json(), "C2": C2.to_json()})
        rep.seconds = time.perf_counter() - t0
        out.append(rep)
    return out
