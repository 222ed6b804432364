"""Stripe structure: band membership, matched sets, certificates, the
eigenvalue-driven search and the converse chain (locator sets, f-leveling,
band-to-character).

A band ``S(a, b, L1, L2)`` is the set of x with ``<x - b, a>`` within L2 of
``L1 Z``.  D has (L1, L2)-stripe structure at radius R when every position
whose R-patch equals the R-patch at x lies in ``S(a, x, L1, L2)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cps import (Character, CutProjectScheme, DualScheme, find_small_eigenvalue,
                  scheme_from_meta)
from .errors import (BandHypothesisFails, CocycleViolation, DimMismatch, NoDecay, NotFound,
                     NotRelativelyDense, PreconditionError, R0ExceedsWindow, R0TooSmall,
                     UsageError)
from .patternspace.index import as_radius, index_for
from .patternspace.local import covering_radius_of, local_derivability_check, matched_pairs
from .patternspace.patterns import PointSet
from .patternspace.region import Region, is_exact_vec, to_float_vec
from .rng import SplitMix64, halton
from .spectra import EquivarianceReport, band_counts, equivariance_modulus

__all__ = ["StripeSpec", "StripeCertificate", "stripe_membership", "band_distance",
           "matched_set", "stripe_verify", "stripe_search", "default_R_grid", "offpoint_anchors",
           "LocatorInfo", "locator_set", "locator_derivability", "LevelSetResult", "level_set_refine",
           "ConverseResult", "eigen_from_stripe", "EPS_GRID"]

EPS_GRID = (0.2, 0.1, 0.05, 0.02)
_SLACK = 1e-12
MAX_LISTED = 100


@dataclass(frozen=True)
class StripeSpec:
    a: tuple                 # unit direction
    L1: float
    L2: float
    R: float

    def __post_init__(self):
        a = np.asarray([float(v) for v in self.a])
        n = float(np.linalg.norm(a))
        if n == 0:
            raise UsageError("stripe direction must be nonzero")
        if abs(n - 1) > 1e-12:
            object.__setattr__(self, "a", tuple((a / n).tolist()))
        else:
            object.__setattr__(self, "a", tuple(a.tolist()))
        if not float(self.L1) > 0 or float(self.L2) < 0 or not float(self.R) > 0:
            raise UsageError("need L1 > 0, L2 >= 0, R > 0")

    @property
    def dim(self) -> int:
        return len(self.a)

    @property
    def band(self) -> float:
        """Half-width of the band in turns of the period."""
        return float(self.L2) / float(self.L1)

    def to_json(self) -> dict:
        return {"a": list(self.a), "L1": float(self.L1), "L2": float(self.L2),
                "R": float(self.R)}

    @classmethod
    def from_json(cls, obj: dict) -> "StripeSpec":
        return cls(tuple(obj["a"]), obj["L1"], obj["L2"], obj["R"])


def band_distance(spec: StripeSpec, b, x) -> float:
    """Distance from ``<x - b, a>`` to the nearest multiple of L1 (half-to-even rounding)."""
    bf, xf = to_float_vec(b), to_float_vec(x)
    if len(bf) != spec.dim or len(xf) != spec.dim:
        raise DimMismatch("point and stripe direction differ in dimension")
    u = float((xf - bf) @ np.asarray(spec.a))
    L1 = float(spec.L1)
    return abs(u - L1 * round(u / L1))


def stripe_membership(spec: StripeSpec, b, x) -> bool:
    return band_distance(spec, b, x) <= float(spec.L2) + _SLACK * max(1.0, float(spec.L1))


@dataclass
class StripeCertificate:
    spec: StripeSpec
    source_character: Character | None
    samples_checked: int
    pairs_checked: int
    violations: list             # (x, y, band distance), at most MAX_LISTED
    violation_count: int
    on_point_anchors: int = 0
    off_point_anchors: int = 0
    equivariance: EquivarianceReport | None = None
    extras: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.violation_count == 0

    def to_json(self) -> dict:
        return {"format": "apk-stripe-certificate-v1", "spec": self.spec.to_json(),
                "source_character": None if self.source_character is None
                else self.source_character.to_json(),
                "samples_checked": self.samples_checked,
                "on_point_anchors": self.on_point_anchors,
                "off_point_anchors": self.off_point_anchors,
                "pairs_checked": self.pairs_checked,
                "violation_count": self.violation_count,
                "violations": [{"x": list(x), "y": list(y), "band_distance": d}
                               for x, y, d in self.violations],
                "holds": self.holds,
                "equivariance": None if self.equivariance is None
                else self.equivariance.to_json(),
                **self.extras}

    @classmethod
    def from_json(cls, obj: dict) -> "StripeCertificate":
        ch = obj.get("source_character")
        return cls(StripeSpec.from_json(obj["spec"]),
                   None if ch is None else Character.from_json(ch),
                   obj.get("samples_checked", 0), obj.get("pairs_checked", 0),
                   [(tuple(v["x"]), tuple(v["y"]), v["band_distance"])
                    for v in obj.get("violations", [])],
                   obj.get("violation_count", len(obj.get("violations", []))),
                   obj.get("on_point_anchors", 0), obj.get("off_point_anchors", 0))


def matched_set(D: PointSet, x, R, search_radius=None) -> PointSet:
    """All y (within the covered window) whose R-patch equals the R-patch at x."""
    idx = index_for(D)
    anchor = _point_index(D, x)
    m = idx.matches(x, R, search_radius, anchor=anchor)
    inner = D.region.shrink(float(R))
    if D.exact and is_exact_vec(x):
        mask = np.zeros(len(D), dtype=bool)
        mask[m.qs] = True
        sub = D._like(mask=mask)
        shift = tuple(u - v for u, v in zip(x, D.vec(m.anchor)))
        out = sub.translate(shift) if any(s != 0 for s in shift) else sub
        return PointSet(inner, keys=out.keys, den=out.den, disc=out.disc, validate=False,
                        _sorted=True, meta={"R": float(R), "anchor": m.anchor})
    return PointSet.from_floats(m.ys, inner, tol=max(D.tol, 1e-9),
                                meta={"R": float(R), "anchor": m.anchor})


def _point_index(D: PointSet, x):
    if not len(D):
        return None
    xf = to_float_vec(x)
    j = int(np.argmin(np.linalg.norm(D.coords - xf, axis=1)))
    if D.exact and is_exact_vec(x):
        return j if all(u == v for u, v in zip(D.vec(j), x)) else None
    return j if float(np.linalg.norm(D.coords[j] - xf)) <= D.tol else None


def default_R_grid(D: PointSet, lo: float | None = None, ratio: float = 2 ** 0.25) -> list:
    """Geometric grid from about twice the covering bound to 45% of the window width."""
    idx = index_for(D)
    start = lo if lo is not None else max(1.0, 2 * idx.covering_bound())
    width = float(np.min(np.asarray(D.region.hi) - np.asarray(D.region.lo)))
    stop = 0.45 * width
    out = []
    R = start
    while R <= stop:
        out.append(Fraction(R).limit_denominator(1000))
        R *= ratio
    return out


def offpoint_anchors(D: PointSet, R, count: int = 1000, skip: int = 1) -> np.ndarray:
    """Halton positions inside the part of the window where R-patches are covered."""
    inner = D.region.shrink(float(R) * (1 + 1e-9))
    lo, hi = np.asarray(inner.lo), np.asarray(inner.hi)
    if np.any(hi <= lo):
        return np.zeros((0, D.dim))
    u = np.asarray(halton(count, D.dim, skip))
    return lo + u * (hi - lo)


def _class_violations(D: PointSet, spec: StripeSpec, R, search_radius, listed: list):
    """(anchors, pairs, violations) over on-point anchors, via exact patch classes."""
    idx = index_for(D)
    pc = idx.classes(R)
    anchors = int(np.count_nonzero(pc.label >= 0))
    a = np.asarray(spec.a)
    L1 = float(spec.L1)
    band = spec.band
    pairs = 0
    bad = 0
    for m in pc.members:
        k = len(m)
        if k < 2:
            continue
        pts = D.coords[m]
        u = pts @ a
        th = np.mod(u / L1, 1.0)
        if search_radius is None:
            pairs += k * (k - 1)
            cnt = band_counts(th, band)
            nb = int(k * k - cnt.sum())
            if nb == 0:
                continue
            bad += nb
            rows = np.flatnonzero(cnt < k)
        else:
            rows = np.arange(k)
        for s in range(0, len(rows), 256):
            r = rows[s:s + 256]
            dist = np.abs((u[None, :] - u[r, None]) - L1 * np.round((u[None, :] - u[r, None]) / L1))
            off = dist > float(spec.L2) + _SLACK * max(1.0, L1)
            if search_radius is not None:
                near = np.linalg.norm(pts[r, None, :] - pts[None, :, :], axis=2)
                near = (near <= float(search_radius)) & (near > 0)
                pairs += int(near.sum())
                off &= near
                bad += int(off.sum())
            if len(listed) < MAX_LISTED:
                for i, j in zip(*np.nonzero(off)):
                    listed.append((tuple(pts[r[i]].tolist()), tuple(pts[j].tolist()),
                                   float(dist[i, j])))
    return anchors, pairs, bad


def _offpoint_violations(D: PointSet, spec: StripeSpec, R, xs, search_radius, listed: list):
    idx = index_for(D)
    a = np.asarray(spec.a)
    L1 = float(spec.L1)
    used = pairs = bad = 0
    for x in xs:
        if not idx.region.covers(np.asarray(x, dtype=float)[None, :], float(R))[0]:
            continue
        m = idx.matches(x, R, search_radius)
        used += 1
        if len(m.qs) < 2:
            continue
        u = (m.ys - m.x) @ a
        dist = np.abs(u - L1 * np.round(u / L1))
        off = dist > float(spec.L2) + _SLACK * max(1.0, L1)
        pairs += len(m.qs) - 1
        nb = int(off.sum())
        bad += nb
        for j in np.flatnonzero(off):
            if len(listed) < MAX_LISTED:
                listed.append((tuple(m.x.tolist()), tuple(m.ys[j].tolist()), float(dist[j])))
    return used, pairs, bad


def stripe_verify(D: PointSet, spec: StripeSpec, sample_xs=None, search_radius=None,
                  on_point: bool = True, n_offpoint: int = 1000,
                  source: Character | None = None) -> StripeCertificate:
    """Check every matched position of every anchor against ``S(a, x, L1, L2)``.

    Anchors are all covered points of D (``on_point``) plus ``sample_xs``
    (default: ``n_offpoint`` Halton positions in the covered window).
    """
    if spec.dim != D.dim:
        raise DimMismatch(f"stripe is {spec.dim}-d, point set {D.dim}-d")
    R = as_radius(spec.R)
    if sample_xs is None:
        sample_xs = offpoint_anchors(D, R, n_offpoint)
    listed: list = []
    on_a = on_p = on_b = 0
    if on_point:
        on_a, on_p, on_b = _class_violations(D, spec, R, search_radius, listed)
    off_a, off_p, off_b = _offpoint_violations(D, spec, R, sample_xs, search_radius, listed)
    listed.sort()
    return StripeCertificate(spec, source, on_a + off_a, on_p + off_p, listed[:MAX_LISTED],
                             on_b + off_b, on_a, off_a)


def _pick_character(D: PointSet, source, T1: float, eps: float) -> Character:
    if source is None:
        source, _ = scheme_from_meta(D.meta)
        if source is None:
            raise UsageError("no character source: pass a scheme or characters")
    if isinstance(source, DualScheme):
        return find_small_eigenvalue(source.primal, T1, eps, dual=source)
    if isinstance(source, CutProjectScheme):
        return find_small_eigenvalue(source, T1, eps)
    chars = [c if isinstance(c, Character) else Character(tuple(c)) for c in source]
    good = [c for c in chars if c.norm() > 0 and abs(1.0 / c.norm() - T1) < eps]
    if not good:
        raise NotFound(f"no supplied character has period within {eps} of {T1}")
    good.sort(key=lambda c: (c.star_norm(), abs(1.0 / c.norm() - T1)))
    return good[0]


def stripe_search(D: PointSet, source, T1: float, T2: float, eps: float,
                  R_grid: Sequence | None = None, sample_xs=None, n_offpoint: int = 1000
                  ) -> StripeCertificate:
    """Forward direction: a character near period T1 gives (1/|a|, T2)-stripes.

    The radius is the smallest grid value whose on-point equivariance envelope
    is within the band ``r = T2 |a|``; it moves up the grid until the
    off-point anchors also verify.
    """
    ch = _pick_character(D, source, float(T1), float(eps))
    if ch.dim != D.dim:
        raise DimMismatch("character and point set differ in dimension")
    na = ch.norm()
    L1 = 1.0 / na
    L2 = float(T2)
    r = L2 * na
    grid = sorted(R_grid if R_grid is not None else default_R_grid(D), key=float)
    if not grid:
        raise NoDecay("empty radius grid: window too small")
    rep = equivariance_modulus(D, ch, grid, allow_empty=True)
    start = next((i for i, w in enumerate(rep.omega) if w is not None and w <= r), None)
    if start is None:
        raise NoDecay(f"omega never <= r = {r:.4g} on R grid up to {float(grid[-1]):g} "
                      f"(last reported {_last(rep.omega)}); window too small for this "
                      f"character (|a*| = {ch.star_norm():.4g})")
    a_unit = tuple((ch.a_float() / na).tolist())
    tried = []
    for R in grid[start:]:
        if rep.omega[grid.index(R)] is None:
            continue
        spec = StripeSpec(a_unit, L1, L2, float(R))
        xs = sample_xs if sample_xs is not None else offpoint_anchors(D, R, n_offpoint)
        cert = stripe_verify(D, spec, xs, source=ch)
        tried.append(float(R))
        if cert.holds:
            cert.equivariance = rep
            cert.extras = {"band_turns": r, "radii_tried": tried}
            return cert
    raise NoDecay(f"off-point anchors violate the band at every radius tried {tried}")


def _last(vals):
    for v in reversed(vals):
        if v is not None:
            return f"{v:.4g}"
    return "none"


# -- converse chain ----------------------------------------------------------------------


@dataclass
class LocatorInfo:
    R0: float
    x0: tuple
    count: int
    r_E: float | None
    covering_radius: float | None
    relative_density_radius: float
    repetitivity_radius: float | None
    r_D: float

    def to_json(self) -> dict:
        return dict(self.__dict__, x0=list(self.x0))


def locator_set(D: PointSet, x0, R0, region: Region | None = None
                ) -> tuple[PointSet, LocatorInfo]:
    """E = positions whose R0-patch equals the R0-patch at x0."""
    idx = index_for(D)
    R_D = idx.covering_bound()
    if float(R0) <= R_D:
        raise R0TooSmall(f"R0 = {float(R0)} must exceed the relative-density radius {R_D:.6g}")
    E = matched_set(D, x0, R0)
    if region is not None:
        E = E._like(mask=region.contains_coords(E.coords))
    r_D = D.min_distance()
    r_E = E.min_distance() if len(E) > 1 else None
    cov = covering_radius_of(E.coords, (E.region.lo, E.region.hi)) if len(E) > 1 else None
    info = LocatorInfo(float(R0), tuple(to_float_vec(x0).tolist()), len(E), r_E, cov,
                       R_D, cov, r_D)
    if len(E) <= 1:
        raise NotRelativelyDense(
            f"the {float(R0)}-patch at {info.x0} does not recur in the window")
    E.meta = dict(E.meta, locator=info.to_json())
    return E, info


def locator_derivability(D: PointSet, E: PointSet, x0, R0, count: int = 200, R: float = 1.0,
                         seed: int = 0):
    """Falsifier search for ``D ~> E`` at derivation radius R0.

    ``E`` is defined by the patch at x0, so equality of (R + R0)-patches of D
    at x and y must force equality of E's R-patches at x and y.
    """
    big = as_radius(R) + as_radius(R0)
    pairs = matched_pairs(D, big, count // 2, seed=seed)
    rng = SplitMix64(seed + 1)
    idx = index_for(D)
    cov = np.flatnonzero(idx.covered(big))
    while len(pairs) < count and len(cov):
        i = int(cov[rng.randrange(len(cov))])
        j = int(cov[rng.randrange(len(cov))])
        pairs.append((D.vec(i), D.vec(j)))
    Efull = matched_set(D, x0, R0)
    samples = [(x, y, as_radius(R)) for x, y in pairs]
    return local_derivability_check(D, Efull, as_radius(R0), samples)



@dataclass
class LevelSetResult:
    D_eps: PointSet
    spread: float
    eps: float
    a0: tuple
    b0: tuple
    c0: tuple
    R0: float
    quadruples_checked: int
    M: float

    def to_json(self) -> dict:
        return {"count": len(self.D_eps), "spread": self.spread, "eps": self.eps,
                "a0": list(self.a0), "b0": list(self.b0), "c0": list(self.c0),
                "R0": self.R0, "quadruples_checked": self.quadruples_checked, "M": self.M}


def _cocycle_check(D: PointSet, theta: np.ndarray, count: int, seed: int, tol: float) -> int:
    """Sample a - b = c - d among points of D; raise on f(a)-f(b) != f(c)-f(d)."""
    n = len(D)
    if n < 2:
        return 0
    lookup = {D.flat_keys[i].tobytes(): i for i in range(n)} if D.exact else None
    rng = SplitMix64(seed)
    checked = 0
    attempts = 0
    while checked < count and attempts < 50 * count:
        attempts += 1
        i, j, k = rng.randrange(n), rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        # l = k - (i - j)
        if lookup is not None:
            want = D.keys[k] - D.keys[i] + D.keys[j]
            l = lookup.get(np.ascontiguousarray(want).reshape(-1).tobytes())
        else:
            target = D.coords[k] - D.coords[i] + D.coords[j]
            dd = np.linalg.norm(D.coords - target, axis=1)
            l = int(np.argmin(dd)) if dd.min() <= max(D.tol, 1e-9) else None
        if l is None:
            continue
        checked += 1
        lhs = theta[i] - theta[j]
        rhs = theta[k] - theta[l]
        if abs(lhs - rhs) > tol:
            raise CocycleViolation(
                f"f(a)-f(b) = {lhs:.6g} but f(c)-f(d) = {rhs:.6g} for a-b = c-d "
                f"(a={D.coords[i].tolist()}, b={D.coords[j].tolist()}, "
                f"c={D.coords[k].tolist()}, d={D.coords[l].tolist()})")
    return checked


def level_set_refine(D: PointSet, theta, eps: float, quadruples: int = 200, seed: int = 0,
                     tol: float = 1e-9) -> LevelSetResult:
    """f-leveling: a Delone subset of D on which theta varies by less than eps.

    ``theta`` is a callable on points or an array aligned with D.  With a0,
    b0 near the sup and inf, translates of the patch containing both keep
    theta inside an eps-window around theta(a0)-sup.
    """
    th = np.asarray([theta(D.vec(i)) for i in range(len(D))] if callable(theta) else theta,
                    dtype=float)
    if th.shape != (len(D),):
        raise DimMismatch("theta must give one value per point of D")
    checked = _cocycle_check(D, th, quadruples, seed, tol)
    mid = (th.max() + th.min()) / 2
    f = th - mid
    M = float(f.max())
    A = np.flatnonzero(f >= M - eps / 2)
    B = np.flatnonzero(f <= -M + eps / 2)
    # smallest ball holding a witness pair, among balls inside the window
    idx = index_for(D)
    floor_R = idx.covering_bound()
    PA, PB = D.coords[A], D.coords[B]
    best = None
    for s in range(0, len(A), 512):
        dd = np.linalg.norm(PA[s:s + 512, None, :] - PB[None, :, :], axis=2)
        rad = np.maximum(dd / 2, floor_R) * (1 + 1e-9) + 1e-6
        mid = (PA[s:s + 512, None, :] + PB[None, :, :]) / 2
        ok = D.region.covers(mid.reshape(-1, D.dim), rad.reshape(-1, 1)).reshape(rad.shape)
        if not ok.any():
            continue
        rad = np.where(ok, rad, np.inf)
        i, j = np.unravel_index(np.argmin(rad), rad.shape)
        if best is None or rad[i, j] < best[0]:
            best = (float(rad[i, j]), int(A[s + i]), int(B[j]))
    if best is None:
        raise R0ExceedsWindow("no witness pair fits in a covered ball")
    _, ia, ib = best
    a0, b0 = D.vec(ia), D.vec(ib)
    c0 = _midpoint(a0, b0)
    R0 = Fraction(max(float(np.linalg.norm(D.coords[ia] - D.coords[ib])) / 2, floor_R)) \
        .limit_denominator(10 ** 6) + Fraction(1, 10 ** 6)
    if not D.region.covers(to_float_vec(c0)[None, :], float(R0))[0]:
        raise R0ExceedsWindow(f"patch radius {float(R0):.6g} around {to_float_vec(c0)} "
                              f"leaves the window")
    try:
        E, _ = locator_set(D, c0, R0)
    except NotRelativelyDense as exc:
        raise R0ExceedsWindow(str(exc)) from exc
    shift = tuple(u - v for u, v in zip(a0, c0))
    D_eps = E.translate(shift) if D.exact else E.translate(to_float_vec(shift))
    pos = [_point_index(D, D_eps.vec(i)) for i in range(len(D_eps))]
    vals = np.asarray([f[p] for p in pos if p is not None])
    spread = float(vals.max() - vals.min()) if len(vals) else 0.0
    return LevelSetResult(D_eps, spread, eps, _fv(a0), _fv(b0), _fv(c0), float(R0), checked, M)


def _midpoint(a, b):
    if is_exact_vec(a) and is_exact_vec(b):
        return tuple((u + v) * Fraction(1, 2) for u, v in zip(a, b))
    return tuple(((to_float_vec(a) + to_float_vec(b)) / 2).tolist())


def _fv(v) -> tuple:
    return tuple(to_float_vec(v).tolist())


@dataclass
class ConverseResult:
    character: Character
    report_D: EquivarianceReport
    report_E: EquivarianceReport | None
    locator: LocatorInfo
    band_max: float
    levels: list

    def to_json(self) -> dict:
        return {"character": self.character.to_json(), "equivariance_D": self.report_D.to_json(),
                "equivariance_E": None if self.report_E is None else self.report_E.to_json(),
                "locator": self.locator.to_json(), "band_max_turns": self.band_max,
                "levels": [lv.to_json() if hasattr(lv, "to_json") else lv
                           for lv in self.levels]}


def eigen_from_stripe(D: PointSet, cert: StripeCertificate, eps_grid: Sequence = EPS_GRID,
                      R_grid: Sequence | None = None) -> ConverseResult:
    """Converse direction: a held certificate yields the character a0 / L1."""
    spec = cert.spec
    L1, L2 = float(spec.L1), float(spec.L2)
    if not L1 > 4 * L2:
        raise PreconditionError(f"need L1 > 4 L2, got L1={L1}, L2={L2}")
    if not cert.holds:
        raise PreconditionError("certificate has violations")
    idx = index_for(D)
    R = as_radius(spec.R)
    x0 = _central_point(D, R)
    E, info = locator_set(D, x0, R)
    a0 = np.asarray(spec.a)
    # 1/4-band condition on E against b0 = x0
    u = (E.coords - to_float_vec(x0)) @ a0 / L1
    n = np.round(u)
    dev = np.abs(u - n)
    if np.any(dev >= 0.25):
        k = int(np.argmax(dev))
        raise BandHypothesisFails(f"E point {E.coords[k].tolist()} is {dev[k]:.4g} turns "
                                  f"from the lattice of bands")
    theta = u - n
    levels = []
    for e in eps_grid:
        try:
            levels.append(level_set_refine(E, theta, float(e)))
        except (R0ExceedsWindow, R0TooSmall, NotRelativelyDense) as exc:
            levels.append({"eps": float(e), "error": type(exc).__name__, "detail": str(exc)})
    ch = _recovered(cert, a0, L1)
    grid = sorted(R_grid if R_grid is not None else _converse_grid(D, R), key=float)
    rep_D = equivariance_modulus(D, ch, grid, allow_empty=True)
    r = L2 / L1
    if not any(w is not None and w <= r for w in rep_D.omega):
        raise NoDecay(f"omega on D never <= {r:.4g} on the grid")
    rep_E = None
    if len(E) > 2:
        try:
            rep_E = equivariance_modulus(E, ch, [g for g in grid if float(g) > 0][:3],
                                         allow_empty=True)
        except Exception:  # E may be too sparse for any covered anchor
            rep_E = None
    return ConverseResult(ch, rep_D, rep_E, info, float(dev.max()), levels)


def _central_point(D: PointSet, R):
    cov = np.flatnonzero(index_for(D).covered(R))
    if not len(cov):
        raise R0ExceedsWindow(f"no point of D has a covered {float(R)}-patch")
    c = (np.asarray(D.region.lo) + np.asarray(D.region.hi)) / 2
    j = int(cov[np.argmin(np.linalg.norm(D.coords[cov] - c, axis=1))])
    return D.vec(j)


def _recovered(cert: StripeCertificate, a0: np.ndarray, L1: float) -> Character:
    src = cert.source_character
    if src is not None and abs(src.norm() * L1 - 1) < 1e-12 and \
            np.allclose(src.a_float() / src.norm(), a0, atol=1e-12):
        return Character(src.a, src.a_star, "stripe-converse", src.coeffs)
    return Character(tuple((a0 / L1).tolist()), None, "stripe-converse")


def _converse_grid(D: PointSet, R) -> list:
    grid = default_R_grid(D)
    if not any(abs(float(g) - float(R)) < 1e-12 for g in grid):
        grid.append(as_radius(R))
    return grid
