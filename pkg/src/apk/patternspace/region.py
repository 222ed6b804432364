"""Finite windows and closed-set descriptors.

A :class:`Region` is the axis-aligned box inside which a pattern is known.
Descriptors (:class:`Ball`, :class:`Box`, :class:`Band`, :class:`FiniteSet`,
:class:`Union`, :class:`Intersection`, :class:`Empty`, :class:`Everything`)
stand in for closed subsets of R^d in the cutting-off operation.

Membership is decided on exact coordinates whenever both the point and the
descriptor parameters are exact.  The vectorised float ``margin`` is only a
prefilter: points whose margin lies within a small tolerance of zero are
re-decided exactly.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..errors import DimMismatch, InsufficientWindow
from ..exactnum import QuadReal, as_quad, is_exact_scalar, parse_exact

_AMBIGUOUS = 1e-9


def to_float_vec(v) -> np.ndarray:
    return np.array([float(c) for c in v], dtype=float)


def vec_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def vec_sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def vec_dot(a, b):
    total = a[0] * b[0]
    for x, y in zip(a[1:], b[1:]):
        total = total + x * y
    return total


def is_exact_vec(v) -> bool:
    return all(is_exact_scalar(c) for c in v)


def _sq(x):
    return x * x


@dataclass(frozen=True)
class Region:
    """Axis-aligned box ``[lo, hi]`` in which a pattern is fully known."""

    lo: tuple
    hi: tuple
    margin: float = 0.0

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or not lo:
            raise DimMismatch("region lo/hi must have the same positive length")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError(f"region needs lo <= hi, got {lo} {hi}")
        if self.margin < 0:
            raise ValueError("margin must be nonnegative")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def interval(cls, lo, hi, margin: float = 0.0) -> "Region":
        return cls((lo,), (hi,), margin)

    @classmethod
    def cube(cls, lo, hi, dim: int, margin: float = 0.0) -> "Region":
        return cls((lo,) * dim, (hi,) * dim, margin)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def _slack(self) -> float:
        return 1e-12 * max(1.0, max(abs(v) for v in self.lo + self.hi))

    def covers(self, centers, R: float) -> np.ndarray:
        """Vectorised ``B(x, R) subset [lo, hi]`` for an ``(n, d)`` array."""
        c = np.atleast_2d(np.asarray(centers, dtype=float))
        if c.shape[1] != self.dim:
            raise DimMismatch(f"expected {self.dim}-vectors")
        s = self._slack()
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.all((c - R >= lo - s) & (c + R <= hi + s), axis=1)

    def require_covered(self, center, R: float) -> None:
        if not self.covers(np.asarray(center, dtype=float)[None, :], float(R))[0]:
            raise InsufficientWindow(
                f"ball B({np.asarray(center, dtype=float).tolist()}, {float(R)}) "
                f"leaves region {self.lo}..{self.hi}")

    def shrink(self, R: float) -> "Region":
        lo = tuple(v + R for v in self.lo)
        hi = tuple(v - R for v in self.hi)
        if any(a > b for a, b in zip(lo, hi)):
            raise InsufficientWindow(f"region too small to shrink by {R}")
        return Region(lo, hi, self.margin)

    def translate(self, x) -> "Region":
        xf = to_float_vec(x)
        return Region(tuple(np.asarray(self.lo) + xf), tuple(np.asarray(self.hi) + xf),
                      self.margin)

    def contains_coords(self, coords) -> np.ndarray:
        c = np.atleast_2d(np.asarray(coords, dtype=float))
        s = self._slack()
        return np.all((c >= np.asarray(self.lo) - s) & (c <= np.asarray(self.hi) + s), axis=1)

    def volume(self) -> float:
        return float(np.prod(np.asarray(self.hi) - np.asarray(self.lo)))

    def to_json(self) -> dict:
        return {"lo": list(self.lo), "hi": list(self.hi), "margin": self.margin}

    @classmethod
    def from_json(cls, obj: dict) -> "Region":
        return cls(tuple(obj["lo"]), tuple(obj["hi"]), float(obj.get("margin", 0.0)))


# -- closed-set descriptors ---------------------------------------------------------


class ClosedSet:
    """A closed subset of R^d with decidable membership."""

    dim: int

    def contains_vec(self, v) -> bool:
        raise NotImplementedError

    def margin(self, coords: np.ndarray) -> np.ndarray:
        """Approximate signed distance-like margin (>= 0 inside)."""
        raise NotImplementedError

    def contains_points(self, coords: np.ndarray, getvec: Callable[[int], tuple]) -> np.ndarray:
        """Membership of many points: float prefilter, exact decision near the boundary."""
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        if coords.shape[0] == 0:
            return np.zeros(0, dtype=bool)
        m = self.margin(coords)
        scale = 1.0 + np.abs(coords).max(axis=1)
        tol = _AMBIGUOUS * scale
        out = m > tol
        for i in np.flatnonzero(np.abs(m) <= tol):
            out[i] = self.contains_vec(getvec(int(i)))
        return out

    def contains_box(self, lo, hi) -> bool:
        raise NotImplementedError

    def translate(self, x) -> "ClosedSet":
        raise NotImplementedError

    def bbox(self):
        """Float bounding box ``(lo, hi)`` or None when unbounded."""
        return None

    def to_json(self) -> dict:
        raise NotImplementedError

    def _check_dim(self, v):
        if len(v) != self.dim:
            raise DimMismatch(f"expected a {self.dim}-vector, got {len(v)}")


def _corners(lo, hi):
    return itertools.product(*zip(lo, hi))


@dataclass(frozen=True)
class Ball(ClosedSet):
    center: tuple
    radius: object

    @property
    def dim(self):
        return len(self.center)

    def contains_vec(self, v) -> bool:
        self._check_dim(v)
        if not (is_exact_vec(v) and is_exact_vec(self.center) and is_exact_scalar(self.radius)):
            gap = to_float_vec(v) - to_float_vec(self.center)
            return float(np.sqrt(gap @ gap)) <= float(self.radius)
        d2 = None
        for a, c in zip(v, self.center):
            t = _sq(a - c)
            d2 = t if d2 is None else d2 + t
        return d2 <= _sq(self.radius)

    def margin(self, coords):
        c = to_float_vec(self.center)
        return float(self.radius) - np.linalg.norm(coords - c, axis=1)

    def contains_box(self, lo, hi) -> bool:
        return all(self.contains_vec(corner) for corner in _corners(lo, hi))

    def translate(self, x):
        return Ball(vec_add(self.center, x), self.radius)

    def bbox(self):
        c = to_float_vec(self.center)
        r = float(self.radius)
        return c - r, c + r

    def to_json(self):
        return {"kind": "ball", "center": [_num_json(v) for v in self.center],
                "radius": _num_json(self.radius)}


@dataclass(frozen=True)
class Box(ClosedSet):
    lo: tuple
    hi: tuple

    @property
    def dim(self):
        return len(self.lo)

    def contains_vec(self, v) -> bool:
        self._check_dim(v)
        if not (is_exact_vec(v) and is_exact_vec(self.lo) and is_exact_vec(self.hi)):
            x, a, b = to_float_vec(v), to_float_vec(self.lo), to_float_vec(self.hi)
            return bool(np.all((a <= x) & (x <= b)))
        return all(a <= x <= b for x, a, b in zip(v, self.lo, self.hi))

    def margin(self, coords):
        lo = to_float_vec(self.lo)
        hi = to_float_vec(self.hi)
        return np.minimum(coords - lo, hi - coords).min(axis=1)

    def contains_box(self, lo, hi) -> bool:
        return self.contains_vec(lo) and self.contains_vec(hi)

    def translate(self, x):
        return Box(vec_add(self.lo, x), vec_add(self.hi, x))

    def bbox(self):
        return to_float_vec(self.lo), to_float_vec(self.hi)

    def is_empty(self) -> bool:
        return any(a > b for a, b in zip(self.lo, self.hi))

    def to_json(self):
        return {"kind": "box", "lo": [_num_json(v) for v in self.lo],
                "hi": [_num_json(v) for v in self.hi]}


@dataclass(frozen=True)
class Band(ClosedSet):
    """``{x : lo <= <x, normal> <= hi}``; a missing bound (None) gives a halfspace."""

    normal: tuple
    lo: object = None
    hi: object = None

    @property
    def dim(self):
        return len(self.normal)

    def contains_vec(self, v) -> bool:
        self._check_dim(v)
        bounds = [b for b in (self.lo, self.hi) if b is not None]
        if not (is_exact_vec(v) and is_exact_vec(self.normal) and is_exact_vec(bounds)):
            s = float(to_float_vec(v) @ to_float_vec(self.normal))
            return ((self.lo is None or float(self.lo) <= s)
                    and (self.hi is None or s <= float(self.hi)))
        s = vec_dot(v, self.normal)
        return (self.lo is None or self.lo <= s) and (self.hi is None or s <= self.hi)

    def margin(self, coords):
        n = to_float_vec(self.normal)
        s = coords @ n
        m = np.full(len(coords), np.inf)
        if self.lo is not None:
            m = np.minimum(m, s - float(self.lo))
        if self.hi is not None:
            m = np.minimum(m, float(self.hi) - s)
        return m

    def contains_box(self, lo, hi) -> bool:
        return all(self.contains_vec(c) for c in _corners(lo, hi))

    def translate(self, x):
        shift = vec_dot(x, self.normal)
        return Band(self.normal,
                    None if self.lo is None else self.lo + shift,
                    None if self.hi is None else self.hi + shift)

    def to_json(self):
        return {"kind": "band", "normal": [_num_json(v) for v in self.normal],
                "lo": None if self.lo is None else _num_json(self.lo),
                "hi": None if self.hi is None else _num_json(self.hi)}


@dataclass(frozen=True)
class FiniteSet(ClosedSet):
    points: tuple
    dim_: int = 0

    @property
    def dim(self):
        return self.dim_ or (len(self.points[0]) if self.points else 0)

    def contains_vec(self, v) -> bool:
        return any(all(a == b for a, b in zip(v, p)) for p in self.points)

    def margin(self, coords):
        if not self.points:
            return np.full(len(coords), -np.inf)
        pts = np.array([to_float_vec(p) for p in self.points])
        dist = np.linalg.norm(coords[:, None, :] - pts[None, :, :], axis=2).min(axis=1)
        return -dist

    def contains_box(self, lo, hi) -> bool:
        # boxes with nonempty interior are never inside a finite set
        return all(a == b for a, b in zip(lo, hi)) and self.contains_vec(lo)

    def translate(self, x):
        return FiniteSet(tuple(vec_add(p, x) for p in self.points), self.dim)

    def bbox(self):
        if not self.points:
            return None
        pts = np.array([to_float_vec(p) for p in self.points])
        return pts.min(axis=0), pts.max(axis=0)

    def to_json(self):
        return {"kind": "finite", "dim": self.dim,
                "points": [[_num_json(v) for v in p] for p in self.points]}


@dataclass(frozen=True)
class Empty(ClosedSet):
    dim_: int = 1

    @property
    def dim(self):
        return self.dim_

    def contains_vec(self, v):
        return False

    def margin(self, coords):
        return np.full(len(coords), -np.inf)

    def contains_box(self, lo, hi):
        return False

    def translate(self, x):
        return self

    def to_json(self):
        return {"kind": "empty", "dim": self.dim}


@dataclass(frozen=True)
class Everything(ClosedSet):
    dim_: int = 1

    @property
    def dim(self):
        return self.dim_

    def contains_vec(self, v):
        return True

    def margin(self, coords):
        return np.full(len(coords), np.inf)

    def contains_box(self, lo, hi):
        return True

    def translate(self, x):
        return self

    def to_json(self):
        return {"kind": "everything", "dim": self.dim}


@dataclass(frozen=True)
class Intersection(ClosedSet):
    parts: tuple

    @property
    def dim(self):
        return self.parts[0].dim

    def contains_vec(self, v):
        return all(p.contains_vec(v) for p in self.parts)

    def margin(self, coords):
        return np.min([p.margin(coords) for p in self.parts], axis=0)

    def contains_points(self, coords, getvec):
        out = np.ones(len(np.atleast_2d(coords)), dtype=bool)
        for p in self.parts:
            out &= p.contains_points(coords, getvec)
        return out

    def contains_box(self, lo, hi):
        return all(p.contains_box(lo, hi) for p in self.parts)

    def translate(self, x):
        return Intersection(tuple(p.translate(x) for p in self.parts))

    def bbox(self):
        boxes = [p.bbox() for p in self.parts if p.bbox() is not None]
        if not boxes:
            return None
        return np.max([b[0] for b in boxes], axis=0), np.min([b[1] for b in boxes], axis=0)

    def to_json(self):
        return {"kind": "intersection", "parts": [p.to_json() for p in self.parts]}


@dataclass(frozen=True)
class Union(ClosedSet):
    parts: tuple

    @property
    def dim(self):
        return self.parts[0].dim

    def contains_vec(self, v):
        return any(p.contains_vec(v) for p in self.parts)

    def margin(self, coords):
        return np.max([p.margin(coords) for p in self.parts], axis=0)

    def contains_points(self, coords, getvec):
        out = np.zeros(len(np.atleast_2d(coords)), dtype=bool)
        for p in self.parts:
            out |= p.contains_points(coords, getvec)
        return out

    def contains_box(self, lo, hi) -> bool:
        solid = [p for p in _flatten_union(self) if not isinstance(p, (FiniteSet, Empty))]
        if any(p.contains_box(lo, hi) for p in solid):
            return True
        boxes = [_as_box(p) for p in solid]
        if all(b is not None for b in boxes):
            return _boxes_cover(lo, hi, boxes)
        if len(solid) <= 1:
            return False
        raise NotImplementedError(
            "tile containment in a union is only decided for unions of boxes")

    def translate(self, x):
        return Union(tuple(p.translate(x) for p in self.parts))

    def bbox(self):
        boxes = [p.bbox() for p in self.parts]
        if any(b is None for b in boxes):
            return None
        return np.min([b[0] for b in boxes], axis=0), np.max([b[1] for b in boxes], axis=0)

    def to_json(self):
        return {"kind": "union", "parts": [p.to_json() for p in self.parts]}


def _flatten_union(u: Union):
    for p in u.parts:
        if isinstance(p, Union):
            yield from _flatten_union(p)
        else:
            yield p


def _as_box(p):
    if isinstance(p, Box):
        return p
    if isinstance(p, Everything):
        return None
    if isinstance(p, Intersection) and all(isinstance(q, Box) for q in p.parts):
        lo = tuple(max(vals) for vals in zip(*(q.lo for q in p.parts)))
        hi = tuple(min(vals) for vals in zip(*(q.hi for q in p.parts)))
        return Box(lo, hi)
    return None


def _boxes_cover(lo, hi, boxes) -> bool:
    """Exact test that the closed box [lo, hi] lies in a union of closed boxes."""
    boxes = [b for b in boxes if not b.is_empty()]
    axes = []
    for k in range(len(lo)):
        cuts = {lo[k], hi[k]}
        for b in boxes:
            for v in (b.lo[k], b.hi[k]):
                if lo[k] < v < hi[k]:
                    cuts.add(v)
        axes.append(sorted(cuts))
    # every open cell (or degenerate axis) must have its midpoint in some box
    mids = []
    for cuts in axes:
        if len(cuts) == 1:
            mids.append([cuts[0]])
        else:
            mids.append([(a + b) / 2 for a, b in zip(cuts[:-1], cuts[1:])])
    for m in itertools.product(*mids):
        if not any(b.contains_vec(m) for b in boxes):
            return False
    return True


def intersect(a: ClosedSet, b: ClosedSet) -> ClosedSet:
    if a.dim != b.dim:
        raise DimMismatch(f"closed sets of dim {a.dim} and {b.dim}")
    if isinstance(a, Everything):
        return b
    if isinstance(b, Everything):
        return a
    if isinstance(a, Box) and isinstance(b, Box):
        lo = tuple(max(x, y) for x, y in zip(a.lo, b.lo))
        hi = tuple(min(x, y) for x, y in zip(a.hi, b.hi))
        return Box(lo, hi)
    return Intersection((a, b))


# -- (de)serialisation ------------------------------------------------------------------


def _num_json(v):
    if isinstance(v, QuadReal):
        return v.to_json()
    if is_exact_scalar(v):
        return str(v)
    return float(v)


def num_from_json(v):
    if isinstance(v, dict):
        return QuadReal.from_json(v)
    if isinstance(v, str):
        return parse_exact(v)
    return float(v)


def closed_set_from_json(obj: dict) -> ClosedSet:
    kind = obj["kind"]
    vec = lambda xs: tuple(num_from_json(v) for v in xs)  # noqa: E731
    if kind == "ball":
        return Ball(vec(obj["center"]), num_from_json(obj["radius"]))
    if kind == "box":
        return Box(vec(obj["lo"]), vec(obj["hi"]))
    if kind == "band":
        return Band(vec(obj["normal"]),
                    None if obj.get("lo") is None else num_from_json(obj["lo"]),
                    None if obj.get("hi") is None else num_from_json(obj["hi"]))
    if kind == "finite":
        return FiniteSet(tuple(vec(p) for p in obj["points"]), int(obj.get("dim", 0)))
    if kind == "empty":
        return Empty(int(obj.get("dim", 1)))
    if kind == "everything":
        return Everything(int(obj.get("dim", 1)))
    if kind == "union":
        return Union(tuple(closed_set_from_json(p) for p in obj["parts"]))
    if kind == "intersection":
        return Intersection(tuple(closed_set_from_json(p) for p in obj["parts"]))
    raise ValueError(f"unknown closed-set kind {kind!r}")


def exact_vec(values: Sequence, disc: int | None = None) -> tuple:
    """Coerce a vector of strings / rationals / QuadReals to exact scalars."""
    out = []
    for v in values:
        if isinstance(v, str):
            v = parse_exact(v)
        if disc is not None and is_exact_scalar(v):
            v = as_quad(v, disc)
        out.append(v)
    return tuple(out)
