"""Cut-and-project schemes with G = R^d, H = R^m.

A scheme is a nonsingular ``n x n`` basis (``n = d + m``) whose rows generate
the lattice; the first d columns are the physical part, the last m the
internal part.  Exact schemes keep every basis entry in one real quadratic
field and do all lattice arithmetic on integer keys ``(P, Q)`` over a common
denominator, so window membership and pairings are decided exactly.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (DensityNotWitnessed, EnumerationTooSmall, InjectivityViolation, NotFound,
                     SingularBasis, UsageError)
from .exactnum import (QuadReal, as_quad, is_exact_scalar, parse_exact, qmat_det, qmat_inv,
                       sq_norm_le)
from .patternspace.patterns import PointSet, key_scalar, merge_disc, vec_to_keys
from .patternspace.region import Region, num_from_json, to_float_vec, _num_json

TAU = QuadReal.golden()
SQRT2 = QuadReal.sqrt(2)
SQRT5 = QuadReal.sqrt(5)

def _scalar_disc(v):
    return v.disc if isinstance(v, QuadReal) and v.q != 0 else None


def _exact_matrix(rows) -> bool:
    return all(is_exact_scalar(v) for r in rows for v in r)


def _matrix_keys(rows, disc):
    """Exact matrix -> ``(keys (n, k, 2) int64, den)``."""
    flat = [v for r in rows for v in r]
    keys, den, _ = vec_to_keys(flat, disc)
    return keys.reshape(len(rows), len(rows[0]), 2), den


def _keys_float(keys, den, disc) -> np.ndarray:
    keys = np.asarray(keys)
    return (keys[..., 0].astype(float) + keys[..., 1].astype(float) * math.sqrt(disc or 2)) / den


# -- windows ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Window:
    """Compact window in H: an interval (m = 1), a convex polygon (m = 2) or the
    single point of R^0 (m = 0)."""

    kind: str
    lo: object = None
    hi: object = None
    vertices: tuple = ()

    @classmethod
    def interval(cls, lo, hi) -> "Window":
        return cls("interval", lo=lo, hi=hi)

    @classmethod
    def polygon(cls, vertices) -> "Window":
        vs = tuple(tuple(v) for v in vertices)
        # orient counter-clockwise
        area = _shoelace([to_float_vec(v) for v in vs])
        if area < 0:
            vs = vs[::-1]
        return cls("polygon", vertices=vs)

    @classmethod
    def point(cls) -> "Window":
        return cls("point")

    @property
    def m(self) -> int:
        return {"interval": 1, "polygon": 2, "point": 0}[self.kind]

    @property
    def exact(self) -> bool:
        if self.kind == "interval":
            return is_exact_scalar(self.lo) and is_exact_scalar(self.hi)
        if self.kind == "polygon":
            return all(is_exact_scalar(c) for v in self.vertices for c in v)
        return True

    @property
    def disc(self):
        vals = [self.lo, self.hi] if self.kind == "interval" else \
            [c for v in self.vertices for c in v]
        return merge_disc(*(_scalar_disc(v) for v in vals))

    def bbox(self):
        if self.kind == "interval":
            return np.array([float(self.lo)]), np.array([float(self.hi)])
        if self.kind == "polygon":
            pts = np.array([to_float_vec(v) for v in self.vertices])
            return pts.min(axis=0), pts.max(axis=0)
        return np.zeros(0), np.zeros(0)

    def diameter(self) -> float:
        if self.kind == "interval":
            return float(self.hi) - float(self.lo)
        if self.kind == "polygon":
            pts = np.array([to_float_vec(v) for v in self.vertices])
            return float(max(np.linalg.norm(a - b) for a in pts for b in pts))
        return 0.0

    def measure(self) -> float:
        if self.kind == "interval":
            return max(0.0, float(self.hi) - float(self.lo))
        if self.kind == "polygon":
            return abs(_shoelace([to_float_vec(v) for v in self.vertices]))
        return 1.0

    def interior_nonempty(self) -> bool:
        if self.kind == "interval":
            return self.lo < self.hi
        if self.kind == "polygon":
            return len(self.vertices) >= 3 and self.measure() > 0
        return True

    def contains(self, y) -> bool:
        """Exact membership of one internal vector (floats fall back to float tests)."""
        if self.kind == "point":
            return True
        exact = self.exact and all(is_exact_scalar(c) for c in y)
        if self.kind == "interval":
            if exact:
                return self.lo <= y[0] <= self.hi
            return float(self.lo) <= float(y[0]) <= float(self.hi)
        vs = self.vertices
        for a, b in zip(vs, vs[1:] + vs[:1]):
            if exact:
                cr = (b[0] - a[0]) * (y[1] - a[1]) - (b[1] - a[1]) * (y[0] - a[0])
                if cr < 0:
                    return False
            else:
                af, bf, yf = to_float_vec(a), to_float_vec(b), to_float_vec(y)
                if (bf[0] - af[0]) * (yf[1] - af[1]) - (bf[1] - af[1]) * (yf[0] - af[0]) < 0:
                    return False
        return True

    def on_boundary(self, y) -> bool:
        if self.kind == "point":
            return False
        if self.kind == "interval":
            return y[0] == self.lo or y[0] == self.hi
        if not self.contains(y):
            return False
        vs = self.vertices
        for a, b in zip(vs, vs[1:] + vs[:1]):
            cr = (b[0] - a[0]) * (y[1] - a[1]) - (b[1] - a[1]) * (y[0] - a[0])
            if cr == 0:
                return True
        return False

    def margin(self, Y: np.ndarray) -> np.ndarray:
        """Float signed margin (>= 0 inside) for internal coordinates ``(N, m)``."""
        if self.kind == "point":
            return np.full(len(Y), np.inf)
        if self.kind == "interval":
            return np.minimum(Y[:, 0] - float(self.lo), float(self.hi) - Y[:, 0])
        vs = [to_float_vec(v) for v in self.vertices]
        out = np.full(len(Y), np.inf)
        for a, b in zip(vs, vs[1:] + vs[:1]):
            e = b - a
            cr = (e[0] * (Y[:, 1] - a[1]) - e[1] * (Y[:, 0] - a[0])) / np.linalg.norm(e)
            out = np.minimum(out, cr)
        return out

    def shrink(self, amount) -> "Window":
        if self.kind != "interval":
            raise UsageError("only interval windows shrink by a length")
        return Window.interval(self.lo + amount, self.hi - amount)

    def translate(self, h) -> "Window":
        if self.kind == "interval":
            return Window.interval(self.lo + h[0], self.hi + h[0])
        if self.kind == "polygon":
            return Window.polygon([(v[0] + h[0], v[1] + h[1]) for v in self.vertices])
        return self

    def to_json(self) -> dict:
        if self.kind == "interval":
            return {"format": "apk-window-v1", "kind": "interval",
                    "lo": _num_json(self.lo), "hi": _num_json(self.hi)}
        if self.kind == "polygon":
            return {"format": "apk-window-v1", "kind": "polygon",
                    "vertices": [[_num_json(c) for c in v] for v in self.vertices]}
        return {"format": "apk-window-v1", "kind": "point"}

    @classmethod
    def from_json(cls, obj: dict) -> "Window":
        if obj["kind"] == "interval":
            return cls.interval(num_from_json(obj["lo"]), num_from_json(obj["hi"]))
        if obj["kind"] == "polygon":
            return cls.polygon([tuple(num_from_json(c) for c in v) for v in obj["vertices"]])
        return cls.point()


def _shoelace(pts) -> float:
    s = 0.0
    for a, b in zip(pts, pts[1:] + pts[:1]):
        s += a[0] * b[1] - a[1] * b[0]
    return s / 2


# -- schemes ------------------------------------------------------------------------------


@dataclass
class CutProjectScheme:
    """Lattice basis with physical/internal split and recorded certificates."""

    d: int
    m: int
    basis: tuple                   # rows, each a tuple of n entries
    name: str = "custom"
    enum_bound: int = 0
    density_eps: float | None = None
    certificates: dict = field(default_factory=dict)
    tol: float = 1e-9

    def __post_init__(self):
        self.basis = tuple(tuple(r) for r in self.basis)
        n = self.d + self.m
        if len(self.basis) != n or any(len(r) != n for r in self.basis):
            raise UsageError(f"basis must be {n}x{n} for d={self.d}, m={self.m}")
        self.exact = _exact_matrix(self.basis)
        if self.exact:
            self.disc = merge_disc(*(_scalar_disc(v) for r in self.basis for v in r))
            self.bkeys, self.bden = _matrix_keys(self.basis, self.disc)
            self.bfloat = _keys_float(self.bkeys, self.bden, self.disc)
        else:
            self.disc = None
            self.bfloat = np.array([[float(v) for v in r] for r in self.basis])

    @property
    def n(self) -> int:
        return self.d + self.m

    def lattice_point(self, coeffs) -> tuple:
        out = []
        for k in range(self.n):
            s = 0
            for c, row in zip(coeffs, self.basis):
                s = s + int(c) * row[k]
            out.append(s)
        return tuple(out)

    def physical(self, coeffs) -> tuple:
        return self.lattice_point(coeffs)[: self.d]

    def internal(self, coeffs) -> tuple:
        return self.lattice_point(coeffs)[self.d:]

    def det(self):
        if self.exact:
            return qmat_det([[as_quad(v, self.disc or 5) for v in r] for r in self.basis])
        return float(np.linalg.det(self.bfloat))

    def inverse(self):
        if self.exact:
            inv = qmat_inv([[as_quad(v, self.disc or 5) for v in r] for r in self.basis])
            return [[_simplify(v) for v in r] for r in inv]
        return np.linalg.inv(self.bfloat)

    def contains(self, v) -> bool:
        """Is v (exact n-vector) a lattice point?  Exact coefficient test."""
        c = self.coefficients(v)
        if self.exact:
            return all(_is_integer(x) for x in c)
        return bool(np.all(np.abs(np.asarray(c) - np.round(c)) < 1e-9))

    def coefficients(self, v):
        inv = self.inverse()
        if self.exact:
            out = []
            for j in range(self.n):
                s = 0
                for k in range(self.n):
                    s = s + v[k] * inv[k][j]
                out.append(_simplify(s))
            return out
        return np.asarray(to_float_vec(v)) @ inv

    def to_json(self) -> dict:
        return {"format": "apk-cps-v1", "name": self.name, "d": self.d, "m": self.m,
                "arith": "exact" if self.exact else "float", "disc": self.disc,
                "basis": [[_num_json(v) for v in r] for r in self.basis],
                "enum_bound": self.enum_bound, "density_eps": self.density_eps}

    @classmethod
    def from_json(cls, obj: dict) -> "CutProjectScheme":
        basis = [[num_from_json(v) for v in r] for r in obj["basis"]]
        return cls(int(obj["d"]), int(obj["m"]), basis, name=obj.get("name", "custom"),
                   enum_bound=int(obj.get("enum_bound", 0)),
                   density_eps=obj.get("density_eps"))


def _simplify(v):
    if isinstance(v, QuadReal) and v.q == 0:
        return v.p
    return v


def _is_integer(x) -> bool:
    if isinstance(x, QuadReal):
        return x.q == 0 and x.p.denominator == 1
    return Fraction(x).denominator == 1


def _coeff_box(n: int, bound: int) -> np.ndarray:
    rng = np.arange(-bound, bound + 1, dtype=np.int64)
    grids = np.meshgrid(*([rng] * n), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def build_scheme(basis, d: int, m: int, enum_bound: int = 20, name: str = "custom",
                 density_threshold: float = 0.25, check_density: bool = True
                 ) -> CutProjectScheme:
    """Validate a basis: nonsingular, injective on the box, internal image eps-dense."""
    S = CutProjectScheme(d, m, basis, name=name, enum_bound=enum_bound)
    det = S.det()
    if (S.exact and det == 0) or (not S.exact and abs(det) < 1e-12):
        raise SingularBasis(f"basis determinant is zero ({det})")
    n = S.n
    box_bound = enum_bound if n <= 2 else max(1, min(enum_bound, int(round(2e6 ** (1 / n) / 2))))
    C = _coeff_box(n, box_bound)
    C = C[np.any(C != 0, axis=1)]
    if m > 0:
        phys_zero = _phys_zero(S, C)
        if phys_zero.any():
            c = C[np.flatnonzero(phys_zero)[0]]
            raise InjectivityViolation(
                f"lattice point {c.tolist()} has zero physical part and nonzero internal part")
    S.certificates["injectivity"] = {"verified_up_to": int(box_bound), "violations": 0}
    if m > 0 and check_density:
        eps = _density_eps(S, C)
        S.density_eps = eps
        S.certificates["density"] = {"eps": eps, "bound": int(box_bound),
                                     "test_set": "unit cube [-1,1]^m"}
        if not eps < density_threshold:
            raise DensityNotWitnessed(
                f"internal projections leave gaps of {eps:.3g} in [-1,1]^{m} at bound {box_bound}")
    S.certificates["det"] = str(det) if S.exact else float(det)
    return S


def _lattice_keys(S: CutProjectScheme, C: np.ndarray) -> np.ndarray:
    """Integer keys ``(M, n, 2)`` of ``C @ basis`` (denominator ``S.bden``)."""
    return np.einsum("mi,ikt->mkt", C, S.bkeys)


def _phys_zero(S: CutProjectScheme, C: np.ndarray) -> np.ndarray:
    if S.exact:
        K = _lattice_keys(S, C)[:, : S.d, :]
        return np.all(K == 0, axis=(1, 2))
    X = C @ S.bfloat[:, : S.d]
    return np.all(np.abs(X) < S.tol, axis=1)


def _density_eps(S: CutProjectScheme, C: np.ndarray) -> float:
    Y = C.astype(float) @ S.bfloat[:, S.d:]
    Y = Y[np.all(np.abs(Y) <= 1.0, axis=1)]
    if S.m == 1:
        ys = np.unique(np.concatenate([Y[:, 0], [-1.0, 1.0]]))
        return float(np.diff(ys).max())
    from scipy.spatial import cKDTree
    if not len(Y):
        return math.inf
    axes = [np.linspace(-1, 1, 41)] * S.m
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, S.m)
    dist, _ = cKDTree(Y).query(grid)
    return float(2 * dist.max())


# -- dual schemes --------------------------------------------------------------------------


@dataclass
class DualScheme:
    scheme: CutProjectScheme          # lattice = dual lattice
    primal: CutProjectScheme


def dual_scheme(S: CutProjectScheme, enum_bound: int | None = None) -> DualScheme:
    inv = S.inverse()
    if S.exact:
        dual_rows = [[inv[k][i] for k in range(S.n)] for i in range(S.n)]
    else:
        dual_rows = np.asarray(inv).T.tolist()
    D = build_scheme(dual_rows, S.d, S.m, enum_bound or S.enum_bound or 10,
                     name=f"dual({S.name})")
    return DualScheme(D, S)


def pairing_matrix(S: CutProjectScheme, T: CutProjectScheme):
    """Gram matrix of the two bases under the standard inner product on R^n."""
    out = []
    for r in S.basis:
        row = []
        for s in T.basis:
            v = 0
            for a, b in zip(r, s):
                v = v + a * b
            row.append(_simplify(v) if S.exact and T.exact else float(v))
        out.append(row)
    return out


@dataclass
class PairingReport:
    pairs_checked: int
    failures: int
    mode: str
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.failures == 0


def _pair_products(LA: np.ndarray, LB: np.ndarray, disc: int):
    """Exact inner products of key rows ``(M, n, 2)`` against ``(K, n, 2)``.

    Returns ``(rational part, sqrt part)`` integer arrays of shape (M, K),
    scaled by ``den_a * den_b``.
    """
    P1, Q1 = LA[..., 0], LA[..., 1]
    P2, Q2 = LB[..., 0], LB[..., 1]
    rat = P1 @ P2.T + disc * (Q1 @ Q2.T)
    irr = P1 @ Q2.T + Q1 @ P2.T
    return rat, irr


def check_pairing(S: CutProjectScheme, DS: DualScheme, bound: int = 20,
                  max_pairs: int = 4_000_000, seed: int = 1) -> PairingReport:
    """Exact integrality of <l, l*> over coefficient boxes |coeff| <= bound.

    Lattice points are built independently from each basis, then paired.
    When the full box of pairs exceeds ``max_pairs`` (rank-4 lattices), every
    point of each box is paired with all generators of the other lattice and
    a deterministic sample of full pairs is added; integrality of all pairs
    then follows from bilinearity.
    """
    T = DS.scheme
    if not (S.exact and T.exact):
        return _pairing_float(S, T, bound)
    disc = merge_disc(S.disc, T.disc) or 2
    sk = S.bkeys if S.disc == disc or S.disc is None else None
    tk = T.bkeys
    if sk is None:
        raise UsageError("schemes live in different fields")
    n = S.n
    C = _coeff_box(n, bound) if (2 * bound + 1) ** n <= 3_000_000 else None
    failures = 0
    checked = 0
    den = S.bden * T.bden

    def pair(CA, CB):
        nonlocal failures, checked
        LA = np.einsum("mi,ikt->mkt", CA, sk)
        LB = np.einsum("mi,ikt->mkt", CB, tk)
        rat, irr = _pair_products(LA, LB, disc)
        bad = (irr != 0) | (rat % den != 0)
        failures += int(bad.sum())
        checked += bad.size

    eye = np.eye(n, dtype=np.int64)
    if C is not None and len(C) ** 2 <= max_pairs:
        for s in range(0, len(C), 512):
            pair(C[s:s + 512], C)
        mode = "all pairs"
    else:
        if C is None:
            C = _sample_box(n, bound, 200_000, seed)
        for s in range(0, len(C), 100_000):
            pair(C[s:s + 100_000], eye)
            pair(eye, C[s:s + 100_000])
        from .rng import SplitMix64
        rng = SplitMix64(seed)
        A = np.array([[rng.randrange(2 * bound + 1) - bound for _ in range(n)]
                      for _ in range(2000)], dtype=np.int64)
        B = np.array([[rng.randrange(2 * bound + 1) - bound for _ in range(n)]
                      for _ in range(2000)], dtype=np.int64)
        for s in range(0, len(A), 250):
            pair(A[s:s + 250], B)
        mode = "box x generators + sampled pairs (bilinearity)"
    gram = pairing_matrix(S, T)
    return PairingReport(checked, failures, mode,
                         {"bound": bound, "gram": [[str(v) for v in r] for r in gram]})


def _sample_box(n, bound, count, seed):
    from .rng import SplitMix64
    rng = SplitMix64(seed)
    return np.array([[rng.randrange(2 * bound + 1) - bound for _ in range(n)]
                     for _ in range(count)], dtype=np.int64)


def _pairing_float(S, T, bound) -> PairingReport:
    C = _coeff_box(S.n, min(bound, 6))
    LA = C @ S.bfloat
    LB = C @ T.bfloat
    G = LA @ LB.T
    bad = np.abs(G - np.round(G)) >= 1e-9 * np.maximum(1.0, np.abs(G))
    return PairingReport(G.size, int(bad.sum()), "float all pairs", {"bound": min(bound, 6)})


def same_lattice(S: CutProjectScheme, T: CutProjectScheme) -> bool:
    """Mutual membership of generators (exact)."""
    return all(T.contains(r) for r in S.basis) and all(S.contains(r) for r in T.basis)


# -- window checks -----------------------------------------------------------------------


@dataclass
class WindowReport:
    interior_nonempty: bool
    regular_closed: bool
    trivial_stabilizer: bool
    boundary_null: bool
    boundary_hits: list
    verified_up_to: int

    @property
    def generic(self) -> bool:
        return not self.boundary_hits

    @property
    def passed(self) -> bool:
        return (self.interior_nonempty and self.regular_closed and self.trivial_stabilizer
                and self.boundary_null and self.generic)

    def to_json(self) -> dict:
        return {"condition_1_regular_closed": self.regular_closed,
                "interior_nonempty": self.interior_nonempty,
                "condition_2_trivial_stabilizer": self.trivial_stabilizer,
                "condition_3_boundary_null": self.boundary_null,
                "condition_4_generic": {"holds": self.generic, "hits": self.boundary_hits,
                                        "verified_up_to": self.verified_up_to,
                                        "note": "verified up to bound"},
                "passed": self.passed}


def window_checks(S: CutProjectScheme, W: Window, enum_bound: int = 20) -> WindowReport:
    if W.m != S.m:
        raise UsageError(f"window is {W.m}-dimensional, internal space is {S.m}-dimensional")
    nonempty = W.interior_nonempty()
    # intervals and convex polygons with interior are regular closed, have null
    # boundary and (being compact with interior) only the trivial stabilizer
    regular = nonempty
    hits = []
    if nonempty and S.m > 0:
        n = S.n
        bound = enum_bound if n <= 2 else max(1, min(enum_bound, int(round(2e6 ** (1 / n) / 2))))
        C = _coeff_box(n, bound)
        Y = C.astype(float) @ S.bfloat[:, S.d:]
        mar = W.margin(Y)
        scale = 1.0 + np.abs(Y).max(axis=1)
        for i in np.flatnonzero(np.abs(mar) <= 1e-9 * scale):
            y = S.internal(C[i])
            if S.exact and W.exact:
                if W.on_boundary(y):
                    hits.append({"coeffs": C[i].tolist(), "internal": [str(v) for v in y]})
            else:
                hits.append({"coeffs": C[i].tolist(), "internal": [float(v) for v in y],
                             "approximate": True})
    else:
        bound = enum_bound
    return WindowReport(nonempty, regular, nonempty, True, hits, int(bound))


# -- model sets ---------------------------------------------------------------------------


def _coeff_ranges(Binv: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> tuple:
    """Integer bounds for c = l B^{-1} over the box lo <= l <= hi."""
    pos = np.clip(Binv, 0, None)
    neg = np.clip(Binv, None, 0)
    cmin = lo @ pos + hi @ neg
    cmax = hi @ pos + lo @ neg
    return np.floor(cmin - 1).astype(np.int64), np.ceil(cmax + 1).astype(np.int64)


def enumerate_box(S: CutProjectScheme, lo: np.ndarray, hi: np.ndarray,
                  coeff_bound: int | None = None, chunk: int = 2_000_000) -> np.ndarray:
    """All coefficient vectors c with ``lo <= c B <= hi`` (float box, inclusive up to
    a small slack; callers decide boundary cases exactly)."""
    n = S.n
    B = S.bfloat
    Binv = np.linalg.inv(B)
    cmin, cmax = _coeff_ranges(Binv, lo, hi)
    if coeff_bound is not None and (np.any(cmin < -coeff_bound) or np.any(cmax > coeff_bound)):
        raise EnumerationTooSmall(
            f"coefficient ranges {cmin.tolist()}..{cmax.tolist()} exceed bound {coeff_bound}")
    slack = 1e-9 * (1.0 + np.abs(np.concatenate([lo, hi])).max())
    out = []
    last = B[n - 1]
    prefix_ranges = [np.arange(cmin[i], cmax[i] + 1) for i in range(n - 1)]
    outer = prefix_ranges[0] if n >= 3 else [None]
    for c0 in outer:
        if n == 1:
            pref = np.zeros((1, 0), dtype=np.int64)
        elif n == 2:
            pref = prefix_ranges[0][:, None]
        else:
            rest = np.meshgrid(*prefix_ranges[1:], indexing="ij")
            pref = np.stack([np.full(rest[0].size, c0)] + [g.ravel() for g in rest], axis=1)
        base = pref @ B[: n - 1] if n > 1 else np.zeros((1, n))
        tmin = np.full(len(pref), -np.inf)
        tmax = np.full(len(pref), np.inf)
        for k in range(n):
            if abs(last[k]) < 1e-300:
                ok = (base[:, k] >= lo[k] - slack) & (base[:, k] <= hi[k] + slack)
                tmax = np.where(ok, tmax, -np.inf)
                continue
            a = (lo[k] - slack - base[:, k]) / last[k]
            b = (hi[k] + slack - base[:, k]) / last[k]
            tmin = np.maximum(tmin, np.minimum(a, b))
            tmax = np.minimum(tmax, np.maximum(a, b))
        tmin = np.ceil(tmin - 1e-9)
        tmax = np.floor(tmax + 1e-9)
        cnt = np.where(tmax >= tmin, tmax - tmin + 1, 0).astype(np.int64)
        if cnt.sum() == 0:
            continue
        rows = np.repeat(np.arange(len(pref)), cnt)
        offs = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        lastc = (tmin[rows] + offs).astype(np.int64)
        out.append(np.concatenate([pref[rows], lastc[:, None]], axis=1))
    if not out:
        return np.zeros((0, n), dtype=np.int64)
    return np.concatenate(out)


def _internal_in_window(S: CutProjectScheme, W: Window, C: np.ndarray,
                        keys: np.ndarray | None) -> np.ndarray:
    if W.kind == "point":
        return np.ones(len(C), dtype=bool)
    if S.exact:
        Y = _keys_float(keys[:, S.d:, :], S.bden, S.disc)
    else:
        Y = C @ S.bfloat[:, S.d:]
    mar = W.margin(Y)
    scale = 1.0 + np.abs(Y).max(axis=1)
    tol = (1e-9 if S.exact else S.tol) * scale
    inside = mar > tol
    amb = np.flatnonzero(np.abs(mar) <= tol)
    if S.exact and W.exact:
        for i in amb:
            y = tuple(key_scalar(P, Q, S.bden, S.disc) for P, Q in keys[i, S.d:])
            inside[i] = W.contains(y)
    else:
        inside[amb] = mar[amb] >= 0
    return inside


def model_set(S: CutProjectScheme, W: Window, region: Region, coeff_bound: int | None = None,
              check_window: bool = True, meta: dict | None = None) -> PointSet:
    """All pi_1(l) with pi_2(l) in W and pi_1(l) in the region."""
    if region.dim != S.d:
        raise UsageError(f"region is {region.dim}-d, physical space is {S.d}-d")
    if check_window:
        rep = window_checks(S, W, min(S.enum_bound or 10, 10))
        if not rep.interior_nonempty:
            return _empty(S, region, meta)
    elif not W.interior_nonempty():
        return _empty(S, region, meta)
    wlo, whi = W.bbox()
    lo = np.concatenate([np.asarray(region.lo), wlo])
    hi = np.concatenate([np.asarray(region.hi), whi])
    C = enumerate_box(S, lo, hi, coeff_bound)
    if S.exact:
        keys = _lattice_keys(S, C) if len(C) else np.zeros((0, S.n, 2), dtype=np.int64)
        phys = _keys_float(keys[:, : S.d, :], S.bden, S.disc)
    else:
        keys = None
        phys = C @ S.bfloat[:, : S.d]
    mask = region.contains_coords(phys) if len(C) else np.zeros(0, dtype=bool)
    mask &= _internal_in_window(S, W, C, keys) if len(C) else mask
    info = dict(meta or {})
    info.setdefault("scheme", S.to_json())
    info.setdefault("window", W.to_json())
    if S.exact:
        ps = PointSet(region, keys=keys[mask, : S.d, :], den=S.bden, disc=S.disc, meta=info)
    else:
        ps = PointSet(region, coords=phys[mask], tol=S.tol, meta=info)
    return ps


def _empty(S, region, meta):
    if S.exact:
        return PointSet(region, keys=np.zeros((0, S.d, 2), dtype=np.int64), disc=S.disc,
                        meta=dict(meta or {}))
    return PointSet(region, coords=np.zeros((0, S.d)), meta=dict(meta or {}))


def delone_certificate(D: PointSet) -> dict:
    """Certified (r, R): pairwise distances > r, every window ball of radius R meets D."""
    r = D.min_distance()
    R = D.covering_radius()
    return {"r": r * (1 - 1e-9) if math.isfinite(r) else r,
            "R": R * (1 + 1e-9) if math.isfinite(R) else R}


# -- characters from the dual lattice ----------------------------------------------------


@dataclass(frozen=True)
class Character:
    """Frequency vector a (and optional internal partner a*)."""

    a: tuple
    a_star: tuple | None = None
    provenance: str = "user"
    coeffs: tuple | None = None

    @property
    def dim(self) -> int:
        return len(self.a)

    @property
    def exact(self) -> bool:
        return all(is_exact_scalar(c) for c in self.a)

    def a_float(self) -> np.ndarray:
        return to_float_vec(self.a)

    def norm(self) -> float:
        return float(np.linalg.norm(self.a_float()))

    def star_norm(self) -> float:
        if not self.a_star:
            return 0.0
        return float(np.linalg.norm(to_float_vec(self.a_star)))

    def to_json(self) -> dict:
        return {"a": [_num_json(v) for v in self.a],
                "a_float": self.a_float().tolist(),
                "a_star": None if self.a_star is None else [_num_json(v) for v in self.a_star],
                "norm": self.norm(), "star_norm": self.star_norm(),
                "provenance": self.provenance,
                "coeffs": None if self.coeffs is None else list(self.coeffs)}

    @classmethod
    def from_json(cls, obj: dict) -> "Character":
        return cls(tuple(num_from_json(v) for v in obj["a"]),
                   None if obj.get("a_star") is None
                   else tuple(num_from_json(v) for v in obj["a_star"]),
                   obj.get("provenance", "user"),
                   None if obj.get("coeffs") is None else tuple(obj["coeffs"]))


def eigen_enumerate(S: CutProjectScheme, phys_norm_max: float, internal_norm_max: float,
                    dual: DualScheme | None = None, include_zero: bool = True,
                    coeff_bound: int | None = None) -> list[Character]:
    """Physical parts a of dual-lattice points with |a| <= phys, |a*| <= internal."""
    DS = dual or dual_scheme(S)
    T = DS.scheme
    pm = float(phys_norm_max)
    im = float(internal_norm_max)
    lo = np.concatenate([np.full(T.d, -pm), np.full(T.m, -im)])
    hi = -lo
    C = enumerate_box(T, lo, hi, coeff_bound)
    out = []
    if not len(C):
        return out
    if T.exact:
        keys = _lattice_keys(T, C)
        F = _keys_float(keys, T.bden, T.disc)
    else:
        keys = None
        F = C @ T.bfloat
    pn = np.linalg.norm(F[:, : T.d], axis=1)
    inn = np.linalg.norm(F[:, T.d:], axis=1) if T.m else np.zeros(len(C))
    cand = np.flatnonzero((pn <= pm * (1 + 1e-9) + 1e-12) & (inn <= im * (1 + 1e-9) + 1e-12))
    for i in cand:
        if T.exact:
            a_keys = keys[i, : T.d]
            s_keys = keys[i, T.d:]
            if not sq_norm_le(a_keys, T.bden, T.disc or 2, Fraction(pm)):
                continue
            if T.m and not sq_norm_le(s_keys, T.bden, T.disc or 2, Fraction(im)):
                continue
            a = tuple(_simplify(key_scalar(P, Q, T.bden, T.disc)) for P, Q in a_keys)
            s = tuple(_simplify(key_scalar(P, Q, T.bden, T.disc)) for P, Q in s_keys)
        else:
            if pn[i] > pm or inn[i] > im:
                continue
            a = tuple(F[i, : T.d].tolist())
            s = tuple(F[i, T.d:].tolist())
        if not include_zero and all(v == 0 for v in a):
            continue
        out.append(Character(a, s, "dual-lattice", tuple(int(c) for c in C[i])))
    out.sort(key=lambda ch: (ch.norm(), ch.star_norm(), tuple(-x for x in ch.a_float())))
    return out


def find_small_eigenvalue(S: CutProjectScheme, target: float, eps: float,
                          internal_cap: float = 4096.0, dual: DualScheme | None = None
                          ) -> Character:
    """Character with |1/|a| - target| < eps and the smallest |a*| among candidates.

    Internal bounds double from 1 up to ``internal_cap``; the first bound that
    yields a candidate gives the global minimiser of |a*| for that window.
    """
    target = float(target)
    eps = float(eps)
    if target <= eps:
        raise UsageError("target period must exceed eps")
    hi_norm = 1.0 / (target - eps)
    DS = dual or dual_scheme(S)
    bound = 1.0
    while True:
        im = min(bound, internal_cap) if S.m else 0.0
        chars = eigen_enumerate(S, hi_norm, im, DS, include_zero=False)
        good = [c for c in chars if abs(1.0 / c.norm() - target) < eps]
        if good:
            good.sort(key=lambda c: (c.star_norm(), abs(1.0 / c.norm() - target),
                                     tuple(-x for x in c.a_float())))
            return good[0]
        if S.m == 0 or bound >= internal_cap:
            raise NotFound(
                f"no eigenvalue a with |1/|a| - {target}| < {eps} "
                f"(internal norm <= {im:g}); the spectrum may be discrete at this scale")
        bound *= 2


# -- built-in schemes ----------------------------------------------------------------------


def fibonacci_scheme(enum_bound: int = 20) -> CutProjectScheme:
    """Rows (1, 1), (tau, 1 - tau): physical x = a + b tau, internal its conjugate."""
    return build_scheme([[Fraction(1), Fraction(1)], [TAU, 1 - TAU]], 1, 1, enum_bound,
                        name="fibonacci")


def fibonacci_window(lo=None, hi=None) -> Window:
    """Default closed window [-tau/2, tau/2] (length tau, generic)."""
    return Window.interval(-TAU / 2 if lo is None else lo, TAU / 2 if hi is None else hi)


SILVER = QuadReal(1, 1, 2)


def silver_scheme(enum_bound: int = 20) -> CutProjectScheme:
    """Rows (1, 1), (lambda, 1 - sqrt2) with lambda = 1 + sqrt2."""
    return build_scheme([[Fraction(1), Fraction(1)], [SILVER, SILVER.conj()]], 1, 1,
                        enum_bound, name="silver-mean")


def silver_window(lo=None, hi=None) -> Window:
    """Default closed window [-sqrt2/2, sqrt2/2] (length sqrt2, generic)."""
    return Window.interval(-SQRT2 / 2 if lo is None else lo, SQRT2 / 2 if hi is None else hi)


def _cos_sin_eighth(k: int):
    """Exact (cos k pi/4, sin k pi/4) in Q(sqrt2)."""
    h = SQRT2 / 2
    table = [(1, 0), (h, h), (0, 1), (-h, h), (-1, 0), (-h, -h), (0, -1), (h, -h)]
    c, s = table[k % 8]
    return as_quad(c, 2), as_quad(s, 2)


def ammann_beenker_scheme(enum_bound: int = 8) -> CutProjectScheme:
    """Z^4 with rows (cos k pi/4, sin k pi/4, cos 3k pi/4, sin 3k pi/4), k = 0..3."""
    rows = []
    for k in range(4):
        c1, s1 = _cos_sin_eighth(k)
        c3, s3 = _cos_sin_eighth(3 * k)
        rows.append([c1, s1, c3, s3])
    return build_scheme(rows, 2, 2, enum_bound, name="ammann-beenker")


def ammann_beenker_window(S: CutProjectScheme | None = None) -> Window:
    """Octagon: internal projection of the unit cube [-1/2, 1/2]^4."""
    S = S or ammann_beenker_scheme()
    vecs = [tuple(r[S.d:]) for r in S.basis]
    pts = []
    for signs in itertools.product((-1, 1), repeat=4):
        x = sum((Fraction(s, 2) * v[0] for s, v in zip(signs, vecs)), as_quad(0, 2))
        y = sum((Fraction(s, 2) * v[1] for s, v in zip(signs, vecs)), as_quad(0, 2))
        pts.append((x, y))
    from scipy.spatial import ConvexHull
    fl = np.array([[float(x), float(y)] for x, y in pts])
    hull = ConvexHull(fl)
    return Window.polygon([pts[i] for i in hull.vertices])


def lattice_scheme(basis, d: int | None = None) -> CutProjectScheme:
    """Degenerate scheme with m = 0: the model set is the lattice itself."""
    basis = [list(r) for r in basis]
    d = d or len(basis)
    return build_scheme(basis, d, 0, 10, name="lattice")


BUILTIN = {
    "fibonacci": (fibonacci_scheme, lambda S: fibonacci_window()),
    "silver-mean": (silver_scheme, lambda S: silver_window()),
    "ammann-beenker": (ammann_beenker_scheme, ammann_beenker_window),
}


def scheme_from_meta(meta: dict):
    """(scheme, window) recorded in a point set's metadata, if any."""
    if not meta or "scheme" not in meta:
        return None, None
    S = CutProjectScheme.from_json(meta["scheme"])
    S = build_scheme(S.basis, S.d, S.m, S.enum_bound or 10, name=S.name, check_density=False)
    W = Window.from_json(meta["window"]) if meta.get("window") else None
    return S, W


def load_scheme(path) -> CutProjectScheme:
    with open(path) as fh:
        obj = json.load(fh)
    if obj.get("format") == "apk-cps-v1":
        S = CutProjectScheme.from_json(obj)
        return build_scheme(S.basis, S.d, S.m, S.enum_bound or 10, name=S.name)
    raise UsageError("not an apk-cps-v1 file")


def parse_basis(rows: Sequence[Sequence[str]]):
    return [[parse_exact(v) if isinstance(v, str) else v for v in r] for r in rows]
