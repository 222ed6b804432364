"""Acceptance run: one PASS/FAIL line per criterion AC-1..AC-10.

Run under pytest (lines are printed uncaptured) or directly with
``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import math
import sys
import time
from fractions import Fraction
from functools import lru_cache

import numpy as np
import pytest

from apk.cps import (ammann_beenker_scheme, check_pairing, dual_scheme, fibonacci_scheme,
                     same_lattice)
from apk.errors import ApkError, NotFound
from apk.exactnum import QuadReal
from apk.generators import (align_translation, fibonacci_labels, gen_fibonacci_cps,
                            gen_fibonacci_substitution, gen_lattice, mld_witness, to_delone)
from apk.patternspace import Region
from apk.patternspace.axioms import run_axioms
from apk.spectra import equivariance_modulus, vspace_rank
from apk.stripe import (StripeSpec, eigen_from_stripe, locator_derivability, locator_set,
                        stripe_search, stripe_verify, _central_point)

TAU = QuadReal(Fraction(1, 2), Fraction(1, 2), 5)
SQRT2 = QuadReal(0, 1, 2)
TARGETS = ((10, 0.5), (3, 0.2), (25, 1.0))
EPS = 0.05


@lru_cache(maxsize=None)
def fib_big():
    return gen_fibonacci_cps(Region((-10_000,), (10_000,)))


@lru_cache(maxsize=None)
def integers():
    return gen_lattice(1, [[1]], Region((-1000,), (1000,)))


@lru_cache(maxsize=None)
def ac2_run(T1, T2):
    """(certificate or exception, seconds)"""
    t0 = time.perf_counter()
    try:
        out = stripe_search(fib_big(), None, T1, T2, EPS)
    except ApkError as exc:
        out = exc
    return out, time.perf_counter() - t0


def ac1():
    t0 = time.perf_counter()
    reps = run_axioms(1000, seed=0)
    dt = time.perf_counter() - t0
    bad = {r.implementation: r.failures for r in reps}
    ok = all(v == 0 for v in bad.values()) and len(reps) == 4 and dt < 10
    return ok, f"failures {bad}, {dt:.1f} s"


def ac2():
    parts, ok = [], True
    for T1, T2 in TARGETS:
        cert, dt = ac2_run(T1, T2)
        if isinstance(cert, Exception):
            ok = False
            parts.append(f"({T1}, {T2}): {type(cert).__name__} after {dt:.1f} s")
            continue
        s = cert.spec
        good = (abs(s.L1 - T1) < EPS and abs(s.L2 - T2) < EPS and cert.violation_count == 0
                and cert.off_point_anchors >= 1000 and dt < 60)
        ok &= good
        parts.append(f"({T1}, {T2}): L1={s.L1:.4f} L2={s.L2:.3f} R={float(s.R):.1f} "
                     f"violations={cert.violation_count} on={cert.on_point_anchors} "
                     f"off={cert.off_point_anchors} {dt:.1f} s")
    return ok, "; ".join(parts)


def ac3():
    Z = integers()
    spec = StripeSpec((1.0,), math.sqrt(2), 0.1, 2)
    cert = stripe_verify(Z, spec)
    hit = [v for v in cert.violations
           if abs(abs(v[1][0] - v[0][0]) - 1) < 1e-12 and abs(v[2] - (math.sqrt(2) - 1)) < 1e-9]
    try:
        stripe_search(Z, None, math.sqrt(2), 0.1, 0.01)
        nf = False
    except NotFound:
        nf = True
    ok = cert.violation_count >= 1 and bool(hit) and nf
    return ok, (f"violations={cert.violation_count}, shift-1 at distance "
                f"{hit[0][2] if hit else None}, search NotFound={nf}")


def ac4():
    D = fib_big()
    parts, ok = [], True
    for T1, T2 in TARGETS:
        cert, _ = ac2_run(T1, T2)
        if isinstance(cert, Exception):
            ok = False
            parts.append(f"({T1}, {T2}): no certificate")
            continue
        try:
            res = eigen_from_stripe(D, cert)
        except ApkError as exc:
            ok = False
            parts.append(f"({T1}, {T2}): {type(exc).__name__}")
            continue
        ch = res.character
        perr = abs(1 / ch.norm() - cert.spec.L1)
        small = [w for R, w in zip(res.report_D.R_grid, res.report_D.omega)
                 if float(R) <= 50 and w is not None]
        rep50 = equivariance_modulus(D, ch, [10, 20, 30, 40, 50], allow_empty=True)
        small += [w for w in rep50.omega if w is not None]
        best = min(small) if small else None
        band_ok = res.band_max < 0.25
        good = perr < 0.1 and best is not None and best < 0.05 and band_ok
        ok &= good
        parts.append(f"({T1}, {T2}): period err {perr:.2e}, min omega(R<=50) "
                     f"{best if best is None else round(best, 4)}, "
                     f"band max {res.band_max:.3f} turns over |E|={res.locator.count}")
    return ok, "; ".join(parts)


def ac5():
    parts, ok = [], True
    for name, S in (("fibonacci", fibonacci_scheme()), ("ammann-beenker", ammann_beenker_scheme())):
        DS = dual_scheme(S)
        rep = check_pairing(S, DS, bound=20)
        dd = dual_scheme(DS.scheme)
        back = same_lattice(S, dd.scheme)
        ok &= rep.ok and back and S.exact
        parts.append(f"{name}: {rep.pairs_checked} pairs ({rep.mode}), {rep.failures} "
                     f"non-integer, dual-of-dual {'ok' if back else 'FAILED'}")
    return ok, "; ".join(parts)


def ac6():
    grid = (1, 0.5, 0.1, 0.02)
    out, ok = [], True
    for gens, want in (((1,), 0), ((1, TAU), 1)):
        t0 = time.perf_counter()
        r = vspace_rank(list(gens), grid, 10_000)
        dt = time.perf_counter() - t0
        ok &= r == want and dt < 5
        out.append(f"rank{tuple(str(g) for g in gens)}={r} ({dt:.2f} s)")
    return ok, ", ".join(out)


def ac7():
    reg = Region((-100,), (100,))
    A = gen_fibonacci_cps(reg)
    B = gen_fibonacci_substitution(20)
    t = align_translation(A, B, reg)
    return t is not None, f"alignment shift {None if t is None else str(t[0])}, |A|={len(A)}"


def ac8():
    D = fib_big()
    cert, _ = ac2_run(*TARGETS[0])
    grid = [5, 10, 15, 20, 25, 30, 35, 40, 45, 50]
    if isinstance(cert, Exception):
        part1, d1 = False, "no AC-2 certificate"
    else:
        rep = equivariance_modulus(D, cert.source_character, grid, allow_empty=True)
        w = [v for v in rep.omega if v is not None]
        part1 = rep.is_nonincreasing() and bool(w) and min(w) < 0.05
        d1 = (f"fibonacci omega(5..50) {w[0]:.4f}..{w[-1]:.4f} nonincreasing="
              f"{rep.is_nonincreasing()}")
    repZ = equivariance_modulus(integers(), (SQRT2,), grid, allow_empty=True)
    wz = [v for v in repZ.omega if v is not None]
    part2 = len(wz) == len(grid) and min(wz) >= 0.2
    return part1 and part2, f"{d1}; integers min omega {min(wz):.4f}"


def ac9():
    D = fib_big()
    x0 = _central_point(D, 5)
    E, info = locator_set(D, x0, 5)
    rep = locator_derivability(D, E, x0, 5, count=200)
    ok = (info.r_E is not None and info.r_E >= 1 and info.covering_radius is not None
          and math.isfinite(info.covering_radius) and rep.samples == 200 and rep.consistent)
    return ok, (f"|E|={info.count}, r_E={info.r_E:.3f}, covering {info.covering_radius:.3f}, "
                f"{rep.samples} samples, {rep.hypothesis_held} held, "
                f"{len(rep.falsifiers)} falsifiers")


def ac10():
    cert, _ = ac2_run(*TARGETS[0])
    if isinstance(cert, Exception):
        return False, "no AC-2 certificate"
    L = fibonacci_labels(fib_big())
    Dp = to_delone(L)
    R0 = 4
    wit = mld_witness(L, Dp, R0, count=100)
    s = cert.spec
    spec = StripeSpec(s.a, s.L1, s.L2, float(s.R) + R0)
    c2 = stripe_verify(Dp, spec)
    falsifiers = sum(len(r.falsifiers) for r in wit.values())
    ok = c2.violation_count == 0 and falsifiers == 0
    return ok, (f"R+R0={float(spec.R):.1f}, violations={c2.violation_count} over "
                f"{c2.on_point_anchors}+{c2.off_point_anchors} anchors, MLD falsifiers "
                f"{falsifiers}")


CRITERIA = [("AC-1", ac1), ("AC-2", ac2), ("AC-3", ac3), ("AC-4", ac4), ("AC-5", ac5),
            ("AC-6", ac6), ("AC-7", ac7), ("AC-8", ac8), ("AC-9", ac9), ("AC-10", ac10)]


def _line(name, fn):
    ok, detail = fn()
    return ok, f"{name} {'PASS' if ok else 'FAIL'}: {detail}"


@pytest.mark.parametrize("name,fn", CRITERIA, ids=[c[0] for c in CRITERIA])
def test_acceptance(name, fn, capsys):
    ok, line = _line(name, fn)
    with capsys.disabled():
        print(f"\n{line}")
    assert ok, line


if __name__ == "__main__":
    fails = 0
    for name, fn in CRITERIA:
        ok, line = _line(name, fn)
        fails += not ok
        print(line, flush=True)
    sys.exit(1 if fails else 0)
