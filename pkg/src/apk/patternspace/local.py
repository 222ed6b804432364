"""Local comparisons between patterns: patches, the local matching metric,
entourage tests, FLC census, repetitivity and empirical local derivability."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ..errors import DimMismatch, InsufficientWindow
from .index import as_radius, index_for, patch_close
from .patterns import LabeledPointSet, Patch, PointSet, WeightedComb
from .region import Ball, ClosedSet, Region, is_exact_vec, to_float_vec, vec_sub

RHO_CAP = 1 / math.sqrt(2)


def _neg(x):
    return tuple(-c for c in x)


def _base(P):
    return P.base if isinstance(P, (LabeledPointSet, WeightedComb)) else P


def _subset(P, idx: np.ndarray):
    if isinstance(P, PointSet):
        return P._like(mask=idx)
    if isinstance(P, LabeledPointSet):
        return LabeledPointSet(P.base._like(mask=idx), [P.labels[i] for i in idx])
    if isinstance(P, WeightedComb):
        return WeightedComb(P.base._like(mask=idx), [P.weights[i] for i in idx])
    raise TypeError(type(P).__name__)


def ball_part(P, x, R):
    """``P ^ B(x, R)`` using the patch index for point-based patterns."""
    if isinstance(P, Patch):
        return P.wedge(Ball(tuple(x), R))
    base = _base(P)
    if base.exact:
        return _subset(P, index_for(base).patch_indices(x, R))
    xf = to_float_vec(x)
    d = np.linalg.norm(base.coords - xf, axis=1) if len(base) else np.zeros(0)
    return _subset(P, np.flatnonzero(d <= float(R)))


def _positions(P) -> np.ndarray:
    if isinstance(P, Patch):
        return np.array([to_float_vec(t[0]) for t in P.tiles]).reshape(len(P), P.dim)
    return _base(P).coords


def _first_vec(P):
    if isinstance(P, Patch):
        return P.tiles[0][0]
    return _base(P).vec(0)


def _payload(P):
    if isinstance(P, LabeledPointSet):
        return P.labels
    if isinstance(P, WeightedComb):
        return P.weights
    return None


def _require(P, x, R):
    P.region.require_covered(to_float_vec(x), float(R))


def local_equal(P, x, y, R) -> bool:
    """``(P - x) ^ B(0, R) == (P - y) ^ B(0, R)``.

    Exact patterns with exact anchors are compared exactly.  With float
    anchors the exact shift between the two patches is recovered from their
    first elements and must agree with ``y - x`` to 1e-9 relative.
    """
    _require(P, x, R)
    _require(P, y, R)
    A = ball_part(P, x, R)
    B = ball_part(P, y, R)
    if len(A) != len(B):
        return False
    if not len(A):
        return True
    exact = P.exact if not isinstance(P, Patch) else P.exact
    if exact and is_exact_vec(x) and is_exact_vec(y):
        return A.translate(_neg(x)) == B.translate(_neg(y))
    if exact:
        t = vec_sub(_first_vec(B), _first_vec(A))
        tf = to_float_vec(t)
        gap = to_float_vec(y) - to_float_vec(x)
        if np.abs(tf - gap).max() > 1e-9 * (1.0 + np.abs(gap).max()):
            return False
        return A.translate(t) == B
    tol = max(_base(P).tol if not isinstance(P, Patch) else 0.0, 1e-12)
    if _payload(A) is not None:
        pa = _payload(A)
        pb = _payload(B)
        oa = np.lexsort((_positions(A) - to_float_vec(x)).T[::-1])
        ob = np.lexsort((_positions(B) - to_float_vec(y)).T[::-1])
        if [pa[i] for i in oa] != [pb[i] for i in ob]:
            return False
    return patch_close(_positions(A) - to_float_vec(x), _positions(B) - to_float_vec(y), tol)


def patch_at(D: PointSet, x, R) -> PointSet:
    """``(D - x) ^ B(0, R)`` centred at the origin."""
    if len(x) != D.dim:
        raise DimMismatch("anchor has the wrong dimension")
    _require(D, x, R)
    part = ball_part(D, x, R)
    region = Region(tuple(-float(R) for _ in range(D.dim)), tuple(float(R) for _ in range(D.dim)))
    if D.exact and is_exact_vec(x):
        out = part.translate(_neg(x))
        return PointSet(region, keys=out.keys, den=out.den, disc=out.disc, validate=False)
    coords = part.coords - to_float_vec(x)
    return PointSet(region, coords=coords, tol=max(D.tol, 1e-9), validate=False)


def patch_eq(P: PointSet, Q: PointSet, tol: float = 0.0) -> bool:
    """Exact set equality at ``tol = 0`` (exact sets), else greedy matching within tol."""
    if P.dim != Q.dim:
        raise DimMismatch("patches of different dimension")
    if tol == 0 and P.exact and Q.exact:
        return P == Q
    return patch_close(P.coords, Q.coords, max(tol, 0.0))


# -- local matching metric ------------------------------------------------------------


def _match_on_ball(D1: PointSet, D2: PointSet, t, R) -> bool:
    """``(D1 + t/2) ^ B(0,R) == (D2 - t/2) ^ B(0,R)``."""
    exact = D1.exact and D2.exact and is_exact_vec(t)
    if exact:
        half = tuple(c / 2 for c in t)
        c1, c2 = _neg(half), half
    else:
        tf = to_float_vec(t)
        c1, c2 = tuple(-tf / 2), tuple(tf / 2)
    A = ball_part(D1, c1, R)
    B = ball_part(D2, c2, R)
    if len(A) != len(B):
        return False
    if not len(A):
        return True
    if exact:
        return A.translate(t) == B
    tol = max(D1.tol, D2.tol, 1e-9)
    return patch_close(A.coords + to_float_vec(t), B.coords, tol)


def local_match_dist(D1: PointSet, D2: PointSet, r_grid: Sequence) -> float:
    """Smallest grid r (below the 1/sqrt2 cap) with a matching pair of shifts.

    Shifts are taken symmetric, ``x = t/2, y = -t/2``, with ``t`` running over
    zero and the difference vectors ``p2 - p1`` of length at most ``2r``.
    Returns the cap when no grid value works.
    """
    if D1.dim != D2.dim:
        raise DimMismatch("point sets of different dimension")
    grid = sorted(r for r in r_grid if 0 < float(r) < RHO_CAP)
    for r in grid:
        R = 1 / Fraction(r) if not isinstance(r, float) else 1.0 / r
        reach = float(R) + float(r)
        for D in (D1, D2):
            D.region.require_covered(np.zeros(D.dim), reach)
        if _match_on_ball(D1, D2, tuple(0 for _ in range(D1.dim)), R):
            return float(r)
        for t in _difference_shifts(D1, D2, 2 * float(r)):
            if _match_on_ball(D1, D2, t, R):
                return float(r)
    return RHO_CAP


def _difference_shifts(D1: PointSet, D2: PointSet, radius: float):
    """Exact (or float) vectors ``p2 - p1`` near the origin, ``|p2 - p1| <= radius``."""
    if not len(D1) or not len(D2):
        return
    # anchor p1 at the point of D1 nearest the origin
    i = int(np.argmin(np.linalg.norm(D1.coords, axis=1)))
    near = np.flatnonzero(np.linalg.norm(D2.coords - D1.coords[i], axis=1) <= radius + 1e-12)
    for j in near:
        if D1.exact and D2.exact:
            yield vec_sub(D2.vec(int(j)), D1.vec(i))
        else:
            yield tuple(D2.coords[j] - D1.coords[i])


# -- entourages -------------------------------------------------------------------------


def entourage_test(P, Q, K: ClosedSet, V: ClosedSet, grid_steps: int = 8) -> bool:
    """Is there x in V with ``P ^ K == (Q + x) ^ K``?

    Candidates: zero, the differences ``p - q`` between a fixed element of
    ``P ^ K`` and elements of Q, and a rational grid over V's bounding box.
    A True answer is a certificate; False only exhausts these candidates.
    """
    bb = K.bbox()
    if bb is None:
        raise InsufficientWindow("K must be bounded")
    lo, hi = bb
    if not (np.all(lo >= np.asarray(P.region.lo) - 1e-12)
            and np.all(hi <= np.asarray(P.region.hi) + 1e-12)):
        raise InsufficientWindow("K leaves the region of P")
    PK = P.wedge(K)
    exact = (P.exact and Q.exact)
    dim = P.dim

    def ok(x) -> bool:
        if not V.contains_vec(x):
            return False
        qlo = np.asarray(Q.region.lo) + to_float_vec(x)
        qhi = np.asarray(Q.region.hi) + to_float_vec(x)
        if not (np.all(lo >= qlo - 1e-12) and np.all(hi <= qhi + 1e-12)):
            raise InsufficientWindow("K leaves the shifted region of Q")
        QK = Q.translate(x).wedge(K)
        if exact:
            return PK == QK
        if len(PK) != len(QK):
            return False
        return patch_close(_positions(PK), _positions(QK), max(getattr(_base(Q), "tol", 0), 1e-9))

    zero = tuple(0 for _ in range(dim)) if exact else tuple(0.0 for _ in range(dim))
    if ok(zero):
        return True
    vb = V.bbox()
    if len(PK):
        p = _first_vec(PK)
        qpos = _positions(Q)
        pf = to_float_vec(p)
        cand = np.arange(len(qpos))
        if vb is not None:
            shifts = pf[None, :] - qpos
            cand = np.flatnonzero(np.all((shifts >= vb[0] - 1e-9) & (shifts <= vb[1] + 1e-9),
                                         axis=1))
        for j in cand:
            qv = Q.tiles[j][0] if isinstance(Q, Patch) else _base(Q).vec(int(j))
            x = vec_sub(p, qv) if exact else tuple(pf - qpos[j])
            if ok(x):
                return True
    if vb is not None:
        axes = []
        for a, b in zip(*vb):
            fa, fb = Fraction(float(a)), Fraction(float(b))
            vals = [fa + (fb - fa) * Fraction(k, grid_steps) for k in range(grid_steps + 1)]
            axes.append(vals if exact else [float(v) for v in vals])
        for x in _product(axes):
            if ok(x):
                return True
    return False


def _product(axes):
    if not axes:
        yield ()
        return
    for v in axes[0]:
        for rest in _product(axes[1:]):
            yield (v,) + rest


# -- FLC, repetitivity ----------------------------------------------------------------


def flc_census(D: PointSet, R, sample_xs) -> int:
    """Number of translation classes among the patches at the sample anchors."""
    idx = index_for(D)
    seen: dict[bytes, int] = {}
    float_reps: list = []
    for x in sample_xs:
        D.region.require_covered(to_float_vec(x), float(R))
        pi = idx.patch_indices(x, R)
        if D.exact:
            rel = idx.flat[pi] - (idx.flat[pi[0]] if len(pi) else 0)
            seen[rel.tobytes()] = 1
        else:
            rel = D.coords[pi] - (D.coords[pi[0]] if len(pi) else 0)
            if not any(patch_close(r, rel, max(D.tol, 1e-12)) for r in float_reps):
                float_reps.append(rel)
    return len(seen) if D.exact else len(float_reps)


def covering_radius_of(points: np.ndarray, within: tuple | None = None) -> float:
    """Empirical covering radius of a point cloud inside its own bounding box."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if len(pts) < 2:
        return math.inf
    if pts.shape[1] == 1:
        xs = np.sort(pts[:, 0])
        return float(np.diff(xs).max()) / 2
    lo, hi = within if within is not None else (pts.min(axis=0), pts.max(axis=0))
    region = Region(tuple(lo), tuple(hi))
    ps = PointSet(region, coords=pts[region.contains_coords(pts)], tol=0.0, validate=False)
    return ps.covering_radius(region)


def repetitivity_radius(D: PointSet, x0, R0) -> float | None:
    """Covering radius of the return positions of the R0-patch at x0, or None."""
    E = locator_points(D, x0, R0)
    if len(E) <= 1:
        return None
    return covering_radius_of(E)


def locator_points(D: PointSet, x0, R0) -> np.ndarray:
    idx = index_for(D)
    on = _point_index(D, x0)
    m = idx.matches(x0, R0, anchor=on)
    return m.ys


def _point_index(D: PointSet, x) -> int | None:
    """Index of x in D when x is an exact point of D."""
    if not (D.exact and is_exact_vec(x)) or not len(D):
        return None
    xf = to_float_vec(x)
    j = int(np.argmin(np.linalg.norm(D.coords - xf, axis=1)))
    if all(a == b for a, b in zip(D.vec(j), x)):
        return j
    return None


# -- local derivability --------------------------------------------------------------


@dataclass
class DerivabilityReport:
    R0: object
    samples: int = 0
    hypothesis_held: int = 0
    falsifiers: list = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return not self.falsifiers

    def to_json(self) -> dict:
        return {"R0": float(self.R0), "samples": self.samples,
                "hypothesis_held": self.hypothesis_held,
                "falsifiers": [[to_float_vec(x).tolist(), to_float_vec(y).tolist(), float(R)]
                               for x, y, R in self.falsifiers],
                "consistent": self.consistent}


def local_derivability_check(P1, P2, R0, samples) -> DerivabilityReport:
    """Falsifiers of ``P1 ~> P2`` at derivation radius R0 among (x, y, R) samples.

    A falsifier has ``(P1 - x) ^ B(0, R + R0) == (P1 - y) ^ B(0, R + R0)`` but
    ``(P2 - x) ^ B(0, R) != (P2 - y) ^ B(0, R)``.
    """
    rep = DerivabilityReport(R0)
    for x, y, R in samples:
        rep.samples += 1
        big = as_radius(R) + as_radius(R0) if _exactish(R, R0) else float(R) + float(R0)
        if not local_equal(P1, x, y, big):
            continue
        rep.hypothesis_held += 1
        if not local_equal(P2, x, y, R):
            rep.falsifiers.append((x, y, R))
    return rep


def _exactish(*vals) -> bool:
    return all(not isinstance(v, float) for v in vals)


def matched_pairs(D: PointSet, R, count: int, seed: int = 0, exclude_self: bool = True):
    """Sample ``(x, y)`` point pairs of D whose R-patches agree (exact classes)."""
    from ..rng import SplitMix64
    idx = index_for(D)
    pc = idx.classes(R)
    multi = [m for m in pc.members if len(m) > 1] if exclude_self else pc.members
    if not multi:
        return []
    rng = SplitMix64(seed)
    out = []
    for _ in range(count):
        m = multi[rng.randrange(len(multi))]
        i = int(m[rng.randrange(len(m))])
        j = int(m[rng.randrange(len(m))])
        if exclude_self:
            while j == i:
                j = int(m[rng.randrange(len(m))])
        out.append((D.vec(i), D.vec(j)))
    return out
