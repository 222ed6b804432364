"""Point-set families with known ground truth, negative controls and the
conversion of richer patterns to Delone sets."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .cps import (TAU, ammann_beenker_scheme, ammann_beenker_window, fibonacci_scheme,
                  fibonacci_window, lattice_scheme, model_set, silver_scheme, silver_window,
                  Window)
from .errors import (InfeasibleParams, NotDeloneSupport, PreconditionError, TooManyClasses,
                     UsageError)
from .exactnum import parse_exact
from .patternspace.index import as_radius
from .patternspace.local import local_derivability_check, matched_pairs
from .patternspace.patterns import LabeledPointSet, Patch, PointSet, WeightedComb
from .patternspace.region import Region, is_exact_vec, to_float_vec
from .rng import SplitMix64

__all__ = ["FAMILIES", "GeneratorConfig", "generate", "gen_lattice", "gen_fibonacci_cps",
           "gen_fibonacci_substitution", "fibonacci_substitution_labeled", "fibonacci_word", "gen_silver_mean",
           "gen_ammann_beenker", "gen_poisson_delone", "to_delone", "mld_witness",
           "align_translation", "fibonacci_labels"]

FAMILIES = ("lattice", "fibonacci-cps", "fibonacci-substitution", "silver-mean",
            "ammann-beenker", "poisson-control")


@dataclass
class GeneratorConfig:
    family: str
    region: tuple            # (lo, hi) per axis flattened as ((lo...), (hi...))
    seed: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UsageError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.family == "poisson-control" and self.seed is None:
            raise UsageError("poisson-control needs a seed")

    @property
    def region_obj(self) -> Region:
        lo, hi = self.region
        return Region(tuple(lo), tuple(hi))

    def to_json(self) -> dict:
        return {"family": self.family, "region": [list(self.region[0]), list(self.region[1])],
                "seed": self.seed, "params": self.params}

    @classmethod
    def from_json(cls, obj: dict) -> "GeneratorConfig":
        lo, hi = obj["region"]
        return cls(obj["family"], (tuple(lo), tuple(hi)), obj.get("seed"),
                   dict(obj.get("params") or {}))

    @classmethod
    def load(cls, path) -> "GeneratorConfig":
        return cls.from_json(json.loads(Path(path).read_text()))


def generate(cfg: GeneratorConfig) -> PointSet:
    reg = cfg.region_obj
    p = cfg.params
    if cfg.family == "lattice":
        basis = p.get("basis") or [[1 if i == j else 0 for j in range(reg.dim)]
                                   for i in range(reg.dim)]
        basis = [[parse_exact(v) if isinstance(v, str) else v for v in row] for row in basis]
        off = p.get("offset")
        if off is not None:
            off = [parse_exact(v) if isinstance(v, str) else v for v in off]
        return gen_lattice(reg.dim, basis, reg, off)
    if cfg.family == "fibonacci-cps":
        return gen_fibonacci_cps(reg, _window_param(p, fibonacci_window))
    if cfg.family == "fibonacci-substitution":
        D = gen_fibonacci_substitution(int(p.get("iterations", 10)), p.get("seed_tile", "a"))
        if p.get("clip"):
            return D._like(mask=reg.contains_coords(D.coords), region=reg)
        return D
    if cfg.family == "silver-mean":
        return gen_silver_mean(reg, _window_param(p, silver_window))
    if cfg.family == "ammann-beenker":
        return gen_ammann_beenker(reg)
    return gen_poisson_delone(reg, float(p.get("r", 0.5)), float(p.get("R", 1.5)), cfg.seed)


def _window_param(p: dict, default):
    if "window" not in p:
        return default()
    lo, hi = (parse_exact(v) if isinstance(v, str) else v for v in p["window"])
    return default(lo, hi)


def gen_lattice(d: int, basis, region: Region, perturbation=None) -> PointSet:
    """Lattice points in the region, shifted by one global offset vector."""
    if region.dim != d:
        raise UsageError("region dimension differs from d")
    basis = [list(r) if isinstance(r, (list, tuple)) else [r] for r in basis]
    S = lattice_scheme(basis, d)
    off = None
    if perturbation is not None:
        off = tuple(perturbation) if isinstance(perturbation, (list, tuple)) \
            else (perturbation,) + (0,) * (d - 1)
        if all(v == 0 for v in off):
            off = None
    base_region = region if off is None else region.translate(tuple(-float(v) for v in off))
    D = model_set(S, Window.point(), base_region, check_window=False,
                  meta={"family": "lattice"})
    if off is None:
        return D
    r = D.min_distance()
    if float(np.linalg.norm(to_float_vec(off))) >= r / 2 and math.isfinite(r):
        raise PreconditionError(f"offset must be smaller than r/2 = {r / 2}")
    out = D.translate(off) if (D.exact and is_exact_vec(off)) else \
        PointSet.from_floats(D.coords + to_float_vec(off), region, meta=D.meta)
    out.meta = dict(D.meta, offset=[float(v) for v in off])
    return out._like(region=region, mask=region.contains_coords(out.coords))


def gen_fibonacci_cps(region: Region, window: Window | None = None) -> PointSet:
    W = window or fibonacci_window()
    return model_set(fibonacci_scheme(), W, region, meta={"family": "fibonacci-cps"})


def gen_silver_mean(region: Region, window: Window | None = None) -> PointSet:
    W = window or silver_window()
    return model_set(silver_scheme(), W, region, meta={"family": "silver-mean"})


def gen_ammann_beenker(region: Region) -> PointSet:
    S = ammann_beenker_scheme()
    return model_set(S, ammann_beenker_window(S), region, meta={"family": "ammann-beenker"})


def fibonacci_word(iterations: int, seed_tile: str = "a") -> str:
    if iterations < 1:
        raise UsageError("iterations must be >= 1")
    if seed_tile not in ("a", "b"):
        raise UsageError("seed tile must be 'a' or 'b'")
    w = seed_tile
    for _ in range(iterations):
        w = "".join("ab" if c == "a" else "a" for c in w)
    return w


def gen_fibonacci_substitution(iterations: int, seed_tile: str = "a") -> PointSet:
    """Left endpoints of the tiles of a -> ab, b -> a (lengths tau, 1)."""
    return fibonacci_substitution_labeled(iterations, seed_tile).base


def fibonacci_substitution_labeled(iterations: int, seed_tile: str = "a") -> LabeledPointSet:
    """Tile left endpoints labeled by tile type."""
    w = fibonacci_word(iterations, seed_tile)
    na = 0
    pts = []
    for i, c in enumerate(w):
        # endpoint = (#a)*tau + (#b)
        pts.append((na * TAU + (i - na),))
        na += c == "a"
    total = na * TAU + (len(w) - na)
    region = Region.interval(0.0, float(total))
    ps = PointSet.from_exact(pts, region, 5, meta={"family": "fibonacci-substitution",
                                                  "iterations": iterations,
                                                  "length": str(total)})
    return LabeledPointSet(ps, [w[i] for i in ps.input_order])


def gen_poisson_delone(region: Region, r: float, R: float, seed: int,
                       max_points: int = 2_000_000) -> PointSet:
    """Random r-discrete points, greedily filled until every probe is within R.

    Draws come from SplitMix64, so output is identical for a fixed seed.
    """
    if seed is None:
        raise UsageError("poisson-control needs a seed")
    if not 0 < r < R:
        raise InfeasibleParams(f"need 0 < r < R, got r={r}, R={R}")
    d = region.dim
    lo, hi = np.asarray(region.lo), np.asarray(region.hi)
    vol = float(np.prod(np.maximum(hi - lo, 1e-300)))
    rng = SplitMix64(seed)
    thresh = (r + R) / 2
    h = (R - thresh) / math.sqrt(d)
    probes_per_axis = np.ceil((hi - lo) / h).astype(int) + 1
    if float(np.prod(probes_per_axis.astype(float))) > max_points:
        raise InfeasibleParams(f"r={r} too close to R={R}: probe grid exceeds {max_points}")
    # thinning: uniform draws kept when farther than r from all kept ones
    n_draws = int(2 * vol / (r ** d)) + 1
    if n_draws > max_points:
        raise InfeasibleParams("region too large for the requested r")
    grid: dict = {}
    pts: list = []

    def cell(p):
        return tuple(np.floor((p - lo) / r).astype(int))

    def far(p, dist):
        c = cell(p)
        span = int(math.ceil(dist / r))
        for off in np.ndindex(*(2 * span + 1,) * d):
            for j in grid.get(tuple(ci + o - span for ci, o in zip(c, off)), ()):
                if np.linalg.norm(pts[j] - p) <= dist:
                    return False
        return True

    def add(p):
        grid.setdefault(cell(p), []).append(len(pts))
        pts.append(p)

    for _ in range(n_draws):
        p = np.array([rng.uniform(lo[k], hi[k]) for k in range(d)])
        if far(p, r):
            add(p)
    axes = [np.linspace(lo[k], hi[k], probes_per_axis[k]) for k in range(d)]
    for idx in np.ndindex(*probes_per_axis):
        p = np.array([axes[k][idx[k]] for k in range(d)])
        if far(p, thresh):
            # jitter stays inside the hole so r-separation survives
            q = p + np.array([rng.uniform(-1, 1) for _ in range(d)]) * (thresh - r) / (4 * d)
            q = np.clip(q, lo, hi)
            add(q)
    D = PointSet.from_floats(np.asarray(pts).reshape(-1, d), region,
                             meta={"family": "poisson-control", "seed": seed, "r": r, "R": R})
    return D


# -- conversions to Delone sets -----------------------------------------------------------


def _exact_floor(r: float) -> Fraction:
    q = Fraction(r).limit_denominator(10 ** 6)
    return q if q <= r else q - Fraction(1, 10 ** 6)


def _offset_points(base: PointSet, classes: list, order: list) -> PointSet:
    """Shift each point along the first axis by k r/(4(K-1)) for class index k."""
    K = len(order)
    if K == 1:
        return base
    r = base.min_distance()
    if not math.isfinite(r) or r <= 0:
        raise NotDeloneSupport("support is not uniformly discrete")
    step = _exact_floor(r) / (4 * (K - 1)) if base.exact else r / (4 * (K - 1))
    if float(step) < 1e-9 * max(1.0, float(np.abs(base.coords).max(initial=1.0))):
        raise TooManyClasses(f"{K} classes need offsets finer than float resolution")
    rank = {c: i for i, c in enumerate(order)}
    if base.exact:
        pts = []
        for i in range(len(base)):
            v = list(base.vec(i))
            v[0] = v[0] + rank[classes[i]] * step
            pts.append(tuple(v))
        return PointSet.from_exact(pts, base.region, base.disc,
                                   meta={"class_order": [str(c) for c in order],
                                         "offset_step": str(step)})
    coords = base.coords.copy()
    coords[:, 0] += np.array([rank[c] for c in classes]) * step
    return PointSet.from_floats(coords, base.region, tol=base.tol,
                                meta={"class_order": [str(c) for c in order],
                                      "offset_step": step})


def to_delone(P, max_classes: int = 1024) -> PointSet:
    """Delone set MLD to P: reference points, with class offsets below r/4."""
    if isinstance(P, PointSet):
        return P
    if isinstance(P, LabeledPointSet):
        order = sorted(set(P.labels), key=str)
        if len(order) > max_classes:
            raise TooManyClasses(f"{len(order)} labels exceed {max_classes}")
        return _offset_points(P.base, list(P.labels), order)
    if isinstance(P, WeightedComb):
        base = P.base
        if len(base) >= 2 and base.min_distance() > 0:
            return base
        raise NotDeloneSupport("comb support needs at least two separated atoms")
    if isinstance(P, Patch):
        if not P.tiles:
            raise NotDeloneSupport("empty patch")
        shapes = []
        pts = []
        for lo, hi, lab in P.tiles:
            shapes.append((tuple(float(h) - float(l) for l, h in zip(lo, hi)), str(lab)))
            pts.append(tuple(lo))
        order = sorted(set(shapes))
        if len(order) > max_classes:
            raise TooManyClasses(f"{len(order)} tile shapes exceed {max_classes}")
        base = PointSet.from_exact(pts, P.region) if P.exact else \
            PointSet.from_floats(np.asarray(pts, dtype=float), P.region)
        classes = [shapes[i] for i in base.input_order] if base.input_order is not None \
            else shapes
        return _offset_points(base, classes, order)
    raise NotDeloneSupport(f"cannot convert {type(P).__name__} to a Delone set")


def fibonacci_labels(D: PointSet) -> LabeledPointSet:
    """Label each point by its tile: the gap to the right neighbour (long a, short b).

    The last point has no right neighbour and takes the label of its left gap.
    """
    xs = D.coords[:, 0]
    gaps = np.diff(xs)
    if not len(gaps):
        return LabeledPointSet(D, ["a"] * len(D))
    mid = (gaps.max() + gaps.min()) / 2
    labels = ["a" if g > mid else "b" for g in gaps]
    return LabeledPointSet(D, labels + labels[-1:])


def mld_witness(P, D: PointSet, R0, count: int = 200, R=1, seed: int = 0) -> dict:
    """Falsifier search for ``P ~> D`` and ``D ~> P`` on sampled position pairs."""
    base = P.base if isinstance(P, (LabeledPointSet, WeightedComb)) else P
    if not isinstance(base, PointSet):
        raise UsageError("mld_witness needs a point-based pattern")
    big = as_radius(R) + as_radius(R0)
    out = {}
    for name, A, B, src in (("P->D", P, D, base), ("D->P", D, P, D)):
        pairs = matched_pairs(src, big, count, seed=seed)
        rep = local_derivability_check(A, B, as_radius(R0),
                                       [(x, y, as_radius(R)) for x, y in pairs])
        out[name] = rep
    return out


def align_translation(A: PointSet, B: PointSet, region: Region):
    """Translation t with ``(B - t) ∩ region == A ∩ region`` exactly, or None.

    Candidates are ``b - a0`` for a fixed point a0 of A in the region and all
    b in B (the zero-size entourage); a sorted float comparison prefilters
    before the exact check.
    """
    ia = np.flatnonzero(region.contains_coords(A.coords))
    if not len(ia):
        return None
    a0 = int(ia[0])
    ref = A.coords[ia, 0] if A.dim == 1 else None
    n = len(ia)
    for j in range(len(B)):
        t = B.coords[j] - A.coords[a0]
        Bt = B.coords - t
        inside = np.flatnonzero(region.contains_coords(Bt))
        if len(inside) != n:
            continue
        if A.dim == 1:
            if not np.allclose(np.sort(Bt[inside, 0]), ref, atol=1e-9, rtol=0):
                continue
        shift = tuple(u - v for u, v in zip(B.vec(j), A.vec(a0)))
        cand = B.translate(tuple(-s for s in shift))
        if _exact_window_equal(A, cand, region):
            return shift
    return None


def _exact_window_equal(A: PointSet, B: PointSet, region: Region) -> bool:
    ma = region.contains_coords(A.coords)
    mb = region.contains_coords(B.coords)
    if ma.sum() != mb.sum():
        return False
    va = {A.vec(i) for i in np.flatnonzero(ma)}
    vb = {B.vec(i) for i in np.flatnonzero(mb)}
    return va == vb
