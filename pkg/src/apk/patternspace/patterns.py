"""Concrete abstract patterns: point sets, labeled point sets, box patches and
weighted Dirac combs, each with cutting-off, translation and support.

Exact point sets keep coordinates as integer keys ``(P, Q)`` meaning
``(P + Q*sqrt(disc))/den`` with one ``den`` per set; ``disc is None`` marks a
purely rational set.  Float sets carry a matching tolerance instead.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from ..errors import DimMismatch, DiscMismatch
from ..exactnum import QuadReal, as_quad, is_exact_scalar, keys_to_float
from .region import (Ball, Band, Box, ClosedSet, Empty, Everything, FiniteSet,
                     Intersection, Region, Union, is_exact_vec, to_float_vec)


# -- exact frame helpers --------------------------------------------------------


def _scalar_disc(v) -> int | None:
    if isinstance(v, QuadReal) and v.q != 0:
        return v.disc
    return None


def merge_disc(*discs) -> int | None:
    found = {d for d in discs if d is not None}
    if len(found) > 1:
        raise DiscMismatch(f"incompatible quadratic fields {sorted(found)}")
    return found.pop() if found else None


def vec_to_keys(v: Sequence, disc: int | None):
    """Exact vector -> ``(keys (d, 2) int64, den, disc)``."""
    disc = merge_disc(disc, *(_scalar_disc(c) for c in v))
    pq = []
    den = 1
    for c in v:
        if isinstance(c, QuadReal):
            p, q = c.p, c.q
        elif is_exact_scalar(c):
            p, q = Fraction(c), Fraction(0)
        else:
            raise TypeError(f"expected an exact coordinate, got {type(c).__name__}")
        pq.append((p, q))
        den = math.lcm(den, p.denominator, q.denominator)
    keys = np.array([[int(p * den), int(q * den)] for p, q in pq], dtype=np.int64)
    return keys.reshape(len(v), 2), den, disc


def key_scalar(P: int, Q: int, den: int, disc: int | None):
    if Q == 0 or disc is None:
        return Fraction(int(P), den)
    return QuadReal(Fraction(int(P), den), Fraction(int(Q), den), disc)


def align(keys_a: np.ndarray, den_a: int, keys_b: np.ndarray, den_b: int):
    den = math.lcm(den_a, den_b)
    return keys_a * (den // den_a), keys_b * (den // den_b), den


def _reduce_den(keys: np.ndarray, den: int):
    if keys.size == 0:
        return keys, 1
    g = math.gcd(den, int(np.gcd.reduce(np.abs(keys).ravel())))
    if g > 1:
        return keys // g, den // g
    return keys, den


def _lex_order(coords: np.ndarray) -> np.ndarray:
    if len(coords) == 0:
        return np.zeros(0, dtype=int)
    return np.lexsort(coords.T[::-1])


def _convex(C: ClosedSet) -> bool:
    if isinstance(C, (Ball, Box, Band, Everything, Empty)):
        return True
    if isinstance(C, Intersection):
        return all(_convex(p) for p in C.parts)
    return False


class PointSet:
    """Finite point set over a bounded region (exact keys or floats)."""

    def __init__(self, region: Region, coords=None, keys=None, den: int = 1,
                 disc: int | None = None, tol: float = 0.0, meta: dict | None = None,
                 validate: bool = True, _sorted: bool = False):
        self.region = region
        self.meta = dict(meta or {})
        if keys is not None:
            keys = np.asarray(keys, dtype=np.int64)
            if keys.ndim == 2:
                keys = keys.reshape(len(keys), -1, 2)
            if disc is None and keys.size and np.any(keys[..., 1] != 0):
                raise ValueError("irrational keys need a disc")
            if keys.size and not np.any(keys[..., 1] != 0):
                disc = None if disc is None else disc
            keys, den = _reduce_den(keys, int(den))
            coords = keys_to_float(keys, den, disc or 2).reshape(len(keys), -1) \
                if keys.size else np.zeros((0, region.dim))
            self.keys = keys
            self.den = den
            self.disc = disc
            self.tol = 0.0
        else:
            coords = np.asarray(coords, dtype=float)
            if coords.ndim == 1:
                coords = coords.reshape(-1, region.dim)
            self.keys = None
            self.den = 1
            self.disc = None
            self.tol = float(tol)
        if coords.shape[1] != region.dim:
            raise DimMismatch(f"points are {coords.shape[1]}-d, region is {region.dim}-d")
        self.input_order = None
        if not _sorted:
            order = _lex_order(coords)
            self.input_order = order
            coords = coords[order]
            if self.keys is not None:
                self.keys = self.keys[order]
        self.coords = coords
        if validate:
            self._validate()

    # -- constructors ---------------------------------------------------------------
    @classmethod
    def from_exact(cls, points: Iterable[Sequence], region: Region, disc: int | None = None,
                   **kw) -> "PointSet":
        pts = [tuple(p) for p in points]
        if not pts:
            return cls(region, keys=np.zeros((0, region.dim, 2), dtype=np.int64),
                       disc=disc, **kw)
        parts = [vec_to_keys(p, disc) for p in pts]
        disc = merge_disc(disc, *(d for _, _, d in parts))
        den = 1
        for _, dn, _ in parts:
            den = math.lcm(den, dn)
        keys = np.stack([k * (den // dn) for k, dn, _ in parts])
        return cls(region, keys=keys, den=den, disc=disc, **kw)

    @classmethod
    def from_floats(cls, coords, region: Region, tol: float = 1e-9, **kw) -> "PointSet":
        return cls(region, coords=coords, tol=tol, **kw)

    def _validate(self):
        if len(self.coords) and not np.all(self.region.contains_coords(self.coords)):
            raise ValueError("points outside region")
        if self.exact and len(self.keys) > 1:
            flat = self.keys.reshape(len(self.keys), -1)
            if len(np.unique(flat, axis=0)) != len(flat):
                raise ValueError("duplicate points")
        elif len(self.coords) > 1:
            from scipy.spatial import cKDTree
            if cKDTree(self.coords).query_pairs(max(self.tol, 0.0), output_type="ndarray").size:
                raise ValueError("points closer than the matching tolerance")

    def _like(self, coords=None, keys=None, den=None, region=None, mask=None) -> "PointSet":
        region = region or self.region
        if mask is not None:
            if self.exact:
                return PointSet(region, keys=self.keys[mask], den=self.den, disc=self.disc,
                                meta=self.meta, validate=False, _sorted=True)
            return PointSet(region, coords=self.coords[mask], tol=self.tol, meta=self.meta,
                            validate=False, _sorted=True)
        if keys is not None:
            return PointSet(region, keys=keys, den=den, disc=self.disc, meta=self.meta,
                            validate=False)
        return PointSet(region, coords=coords, tol=self.tol, meta=self.meta, validate=False)

    # -- basic properties ---------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.region.dim

    @property
    def exact(self) -> bool:
        return self.keys is not None

    @property
    def arith(self) -> str:
        return "exact" if self.exact else "float"

    def __len__(self):
        return len(self.coords)

    def vec(self, i: int) -> tuple:
        if self.exact:
            return tuple(key_scalar(P, Q, self.den, self.disc) for P, Q in self.keys[i])
        return tuple(float(c) for c in self.coords[i])

    @property
    def points(self) -> list:
        return [self.vec(i) for i in range(len(self))]

    @cached_property
    def flat_keys(self) -> np.ndarray:
        return self.keys.reshape(len(self.keys), self.dim * 2)

    def __repr__(self):
        return f"PointSet(n={len(self)}, dim={self.dim}, arith={self.arith}, disc={self.disc})"

    # -- pattern-space operations ---------------------------------------------------
    def wedge(self, C: ClosedSet) -> "PointSet":
        if C.dim != self.dim:
            raise DimMismatch(f"closed set dim {C.dim} vs pattern dim {self.dim}")
        mask = C.contains_points(self.coords, self.vec) if len(self) else np.zeros(0, bool)
        return self._like(mask=mask)

    def translate(self, x) -> "PointSet":
        if len(x) != self.dim:
            raise DimMismatch("translation vector has wrong dimension")
        region = self.region.translate(x)
        if self.exact:
            if not is_exact_vec(x):
                raise TypeError("exact point sets only translate by exact vectors")
            xk, xden, xdisc = vec_to_keys(x, self.disc)
            disc = merge_disc(self.disc, xdisc)
            k1, k2, den = align(self.keys, self.den, xk[None], xden)
            out = PointSet(region, keys=k1 + k2, den=den, disc=disc, meta=self.meta,
                           validate=False, _sorted=True)
            return out
        return PointSet(region, coords=self.coords + to_float_vec(x), tol=self.tol,
                        meta=self.meta, validate=False, _sorted=True)

    def support(self) -> ClosedSet:
        if not len(self):
            return Empty(self.dim)
        return FiniteSet(tuple(self.points), self.dim)

    def __add__(self, x):
        return self.translate(x)

    def __eq__(self, other):
        if not isinstance(other, PointSet) or other.dim != self.dim:
            return NotImplemented
        if len(self) != len(other):
            return False
        if self.exact and other.exact:
            if self.den != other.den:
                return False
            if self.disc != other.disc and np.any(self.keys[..., 1]):
                return False
            return bool(np.array_equal(self.keys, other.keys))
        tol = max(self.tol, other.tol)
        return bool(np.all(np.abs(self.coords - other.coords) <= tol))

    __hash__ = None

    # -- Delone certificates ----------------------------------------------------------
    def min_distance(self) -> float:
        if len(self) < 2:
            return math.inf
        if self.dim == 1:
            return float(np.diff(self.coords[:, 0]).min())
        from scipy.spatial import cKDTree
        d, _ = cKDTree(self.coords).query(self.coords, k=2)
        return float(d[:, 1].min())

    def covering_radius(self, within: Region | None = None) -> float:
        """Largest distance from a point of ``within`` (default: the region) to the set."""
        region = within or self.region
        if not len(self):
            return math.inf
        if self.dim == 1:
            xs = self.coords[:, 0]
            lo, hi = region.lo[0], region.hi[0]
            inner = xs[(xs >= lo) & (xs <= hi)]
            if not len(inner):
                return math.inf
            gaps = np.diff(np.concatenate([[inner[0]], inner, [inner[-1]]]))
            edge = max(inner[0] - lo, hi - inner[-1])
            # points just outside [lo, hi] may serve the edge; use all points for that
            below = xs[xs < lo]
            above = xs[xs > hi]
            left = inner[0] - lo if not len(below) else min(inner[0] - lo, (inner[0] - below[-1]) / 2)
            right = hi - inner[-1] if not len(above) else min(hi - inner[-1], (above[0] - inner[-1]) / 2)
            del edge
            return float(max(gaps.max() / 2 if len(gaps) else 0.0, left, right))
        from scipy.spatial import cKDTree
        tree = cKDTree(self.coords)
        lo = np.asarray(region.lo)
        hi = np.asarray(region.hi)
        steps = 64 if self.dim == 2 else 16
        axes = [np.linspace(a, b, steps) for a, b in zip(lo, hi)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        cand = [grid]
        if self.dim == 2 and len(self) >= 3:
            from scipy.spatial import Delaunay
            tri = Delaunay(self.coords)
            cc = _circumcenters(self.coords[tri.simplices])
            cand.append(cc[region.contains_coords(cc)])
        pts = np.concatenate(cand)
        d, _ = tree.query(pts)
        return float(d.max())

    def delone_certificate(self, within: Region | None = None) -> dict:
        """Empirical (R, r): covering radius and minimum separation in the window."""
        return {"r": self.min_distance(), "R": self.covering_radius(within)}


def _circumcenters(tris: np.ndarray) -> np.ndarray:
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    d = 2 * (a[:, 0] * (b[:, 1] - c[:, 1]) + b[:, 0] * (c[:, 1] - a[:, 1])
             + c[:, 0] * (a[:, 1] - b[:, 1]))
    d = np.where(np.abs(d) < 1e-300, np.nan, d)
    na, nb, nc = (a ** 2).sum(1), (b ** 2).sum(1), (c ** 2).sum(1)
    ux = (na * (b[:, 1] - c[:, 1]) + nb * (c[:, 1] - a[:, 1]) + nc * (a[:, 1] - b[:, 1])) / d
    uy = (na * (c[:, 0] - b[:, 0]) + nb * (a[:, 0] - c[:, 0]) + nc * (b[:, 0] - a[:, 0])) / d
    out = np.stack([ux, uy], axis=1)
    return out[np.all(np.isfinite(out), axis=1)]


class LabeledPointSet:
    """Point set with one label from a finite alphabet per point."""

    def __init__(self, base: PointSet, labels: Sequence, r: float | None = None):
        if len(labels) != len(base):
            raise ValueError("one label per point")
        self.base = base
        self.labels = tuple(labels)
        if r is not None and base.min_distance() <= r:
            raise ValueError(f"points closer than r={r}")

    @classmethod
    def from_exact(cls, points, labels, region: Region, disc=None) -> "LabeledPointSet":
        ps = PointSet.from_exact(points, region, disc)
        labels = list(labels)
        return cls(ps, [labels[i] for i in ps.input_order])

    @property
    def dim(self):
        return self.base.dim

    @property
    def region(self):
        return self.base.region

    @property
    def exact(self):
        return self.base.exact

    def __len__(self):
        return len(self.base)

    def wedge(self, C: ClosedSet) -> "LabeledPointSet":
        if C.dim != self.dim:
            raise DimMismatch(f"closed set dim {C.dim} vs pattern dim {self.dim}")
        mask = C.contains_points(self.base.coords, self.base.vec) if len(self) \
            else np.zeros(0, bool)
        return LabeledPointSet(self.base._like(mask=mask),
                               [l for l, m in zip(self.labels, mask) if m])

    def translate(self, x) -> "LabeledPointSet":
        return LabeledPointSet(self.base.translate(x), self.labels)

    def support(self) -> ClosedSet:
        return self.base.support()

    def __eq__(self, other):
        if not isinstance(other, LabeledPointSet):
            return NotImplemented
        return self.base == other.base and self.labels == other.labels

    __hash__ = None

    def __repr__(self):
        return f"LabeledPointSet(n={len(self)}, labels={sorted(set(self.labels))})"


class WeightedComb:
    """Weighted Dirac comb: atoms (position, nonzero weight)."""

    def __init__(self, base: PointSet, weights: Sequence):
        if len(weights) != len(base):
            raise ValueError("one weight per atom")
        if any(w == 0 for w in weights):
            raise ValueError("weights must be nonzero")
        self.base = base
        self.weights = tuple(weights)

    @classmethod
    def from_exact(cls, positions, weights, region: Region, disc=None) -> "WeightedComb":
        ps = PointSet.from_exact(positions, region, disc)
        weights = list(weights)
        return cls(ps, [weights[i] for i in ps.input_order])

    @property
    def dim(self):
        return self.base.dim

    @property
    def region(self):
        return self.base.region

    @property
    def exact(self):
        return self.base.exact

    def __len__(self):
        return len(self.base)

    def wedge(self, C: ClosedSet) -> "WeightedComb":
        if C.dim != self.dim:
            raise DimMismatch(f"closed set dim {C.dim} vs pattern dim {self.dim}")
        mask = C.contains_points(self.base.coords, self.base.vec) if len(self) \
            else np.zeros(0, bool)
        return WeightedComb(self.base._like(mask=mask),
                            [w for w, m in zip(self.weights, mask) if m])

    def translate(self, x) -> "WeightedComb":
        return WeightedComb(self.base.translate(x), self.weights)

    def support(self) -> ClosedSet:
        return self.base.support()

    def __eq__(self, other):
        if not isinstance(other, WeightedComb):
            return NotImplemented
        return self.base == other.base and self.weights == other.weights

    __hash__ = None

    def __repr__(self):
        return f"WeightedComb(n={len(self)})"


class Patch:
    """Finite collection of closed axis-aligned boxes with disjoint interiors.

    Tiles are stored as exact ``(lo, hi)`` corner vectors plus an optional
    label.  ``P ^ C`` keeps the tiles contained in ``C``.
    """

    def __init__(self, tiles: Sequence, region: Region, validate: bool = True):
        # tiles: sequence of (lo_vec, hi_vec, label)
        norm = []
        for t in tiles:
            lo, hi = tuple(t[0]), tuple(t[1])
            label = t[2] if len(t) > 2 else None
            if len(lo) != region.dim or len(hi) != region.dim:
                raise DimMismatch("tile dimension does not match region")
            norm.append((lo, hi, label))
        norm.sort(key=lambda t: (tuple(float(v) for v in t[0]), tuple(float(v) for v in t[1]),
                                 str(t[2])))
        self.tiles = tuple(norm)
        self.region = region
        if validate:
            self._validate()

    def _validate(self):
        for lo, hi, _ in self.tiles:
            if not all(a < b for a, b in zip(lo, hi)):
                raise ValueError("tiles need nonempty interior (lo < hi on every axis)")
        if self.dim == 1:
            for (lo1, hi1, _), (lo2, hi2, _) in zip(self.tiles, self.tiles[1:]):
                if lo2[0] < hi1[0]:
                    raise ValueError("tile interiors overlap")
            return
        n = len(self.tiles)
        for i in range(n):
            for j in range(i + 1, n):
                a, b = self.tiles[i], self.tiles[j]
                if all(a[0][k] < b[1][k] and b[0][k] < a[1][k] for k in range(self.dim)):
                    raise ValueError("tile interiors overlap")

    @property
    def dim(self):
        return self.region.dim

    @cached_property
    def exact(self):
        return all(is_exact_vec(t[0]) and is_exact_vec(t[1]) for t in self.tiles)

    @cached_property
    def lo_coords(self) -> np.ndarray:
        return np.array([to_float_vec(t[0]) for t in self.tiles]).reshape(len(self), self.dim)

    @cached_property
    def hi_coords(self) -> np.ndarray:
        return np.array([to_float_vec(t[1]) for t in self.tiles]).reshape(len(self), self.dim)

    def __len__(self):
        return len(self.tiles)

    def wedge(self, C: ClosedSet) -> "Patch":
        if C.dim != self.dim:
            raise DimMismatch(f"closed set dim {C.dim} vs pattern dim {self.dim}")
        if not self.tiles:
            return self
        keep = []
        if _convex(C):
            lo, hi = self.lo_coords, self.hi_coords
            corners = []
            for bits in np.ndindex(*(2,) * self.dim):
                corners.append(np.where(np.array(bits, bool), hi, lo))
            margins = np.min([C.margin(c) for c in corners], axis=0)
            scale = 1.0 + np.maximum(np.abs(lo).max(1), np.abs(hi).max(1))
            for i, t in enumerate(self.tiles):
                m = margins[i]
                if m > 1e-9 * scale[i]:
                    keep.append(t)
                elif m >= -1e-9 * scale[i] and C.contains_box(t[0], t[1]):
                    keep.append(t)
        else:
            keep = [t for t in self.tiles if C.contains_box(t[0], t[1])]
        return Patch(keep, self.region, validate=False)

    def translate(self, x) -> "Patch":
        if len(x) != self.dim:
            raise DimMismatch("translation vector has wrong dimension")
        if self.exact and not is_exact_vec(x):
            raise TypeError("exact patches only translate by exact vectors")
        tiles = [(tuple(a + b for a, b in zip(lo, x)), tuple(a + b for a, b in zip(hi, x)), l)
                 for lo, hi, l in self.tiles]
        return Patch(tiles, self.region.translate(x), validate=False)

    def support(self) -> ClosedSet:
        if not self.tiles:
            return Empty(self.dim)
        return Union(tuple(Box(lo, hi) for lo, hi, _ in self.tiles))

    def __eq__(self, other):
        if not isinstance(other, Patch):
            return NotImplemented
        if len(self) != len(other):
            return False
        return all(a[2] == b[2] and all(x == y for x, y in zip(a[0], b[0]))
                   and all(x == y for x, y in zip(a[1], b[1]))
                   for a, b in zip(self.tiles, other.tiles))

    __hash__ = None

    def __repr__(self):
        return f"Patch(n={len(self)}, dim={self.dim})"


def wedge(P, C: ClosedSet):
    return P.wedge(C)


def translate(P, x):
    return P.translate(x)


def support(P) -> ClosedSet:
    return P.support()


def contains_set(C: ClosedSet, S: ClosedSet) -> bool:
    """Exact ``S subset C`` for S a support descriptor (finite set or union of boxes)."""
    if isinstance(S, Empty):
        return True
    if isinstance(S, FiniteSet):
        return all(C.contains_vec(p) for p in S.points)
    if isinstance(S, Box):
        return C.contains_box(S.lo, S.hi)
    if isinstance(S, Union):
        return all(contains_set(C, p) for p in S.parts)
    raise NotImplementedError(f"containment of {type(S).__name__}")


def coerce_point(x, disc):
    return tuple(as_quad(c, disc) if disc is not None and is_exact_scalar(c) else c for c in x)
