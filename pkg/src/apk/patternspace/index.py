"""Patch-equivalence classes and matched sets for a fixed point set.

For an exact point set every point gets a multiplicative set hash
``h(k) = prod_j g_j^{k_j} mod P`` of its integer key, so that the hash of a
translated patch ``sum_{p in patch} h(p - x)`` equals ``h(x)^{-1} sum h(p)``.
Points are grouped by two such hashes (two primes), the patch size and, in
1D, the position of the anchor inside its patch; every group is then
confirmed by comparing the relative key arrays exactly.  Hashes only ever
propose candidates, equality is always decided on the integer keys.

Float point sets fall back to a tolerance comparison seeded by patch sizes.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import EmptyPatch
from ..exactnum import QuadReal, sq_norm_le
from ..rng import SplitMix64
from .patterns import PointSet, vec_to_keys, merge_disc, align
from .region import is_exact_vec, to_float_vec

PRIMES = (2147483647, 2147483629)
_CHUNK = 1 << 22


def _generators(count: int, prime: int, seed: int) -> list[int]:
    rng = SplitMix64(seed)
    return [2 + rng.next_u64() % (prime - 3) for _ in range(count)]


def _point_hashes(flat: np.ndarray, prime: int, seed: int, sign: int = 1) -> np.ndarray:
    n, k = flat.shape
    gens = _generators(k, prime, seed)
    out = np.ones(n, dtype=np.int64)
    for c in range(k):
        col = flat[:, c]
        vals, inv = np.unique(col, return_inverse=True)
        pw = np.array([pow(gens[c], (sign * int(v)) % (prime - 1), prime) for v in vals],
                      dtype=np.int64)
        out = (out * pw[inv]) % prime
    return out


def as_radius(R) -> Fraction:
    if isinstance(R, QuadReal):
        if R.q != 0:
            raise TypeError("patch radii must be rational")
        return R.p
    return Fraction(R)


@dataclass
class PatchClasses:
    """Exact patch classes of all covered points at one radius."""

    R: Fraction
    label: np.ndarray        # (N,) class id, -1 where B(p, R) is not covered
    members: list            # class id -> sorted point indices

    @property
    def count(self) -> int:
        return len(self.members)

    def sizes(self) -> np.ndarray:
        return np.array([len(m) for m in self.members], dtype=int)


@dataclass
class Matches:
    """Matched positions ``y = x + (p_q - p_anchor)`` for one anchor."""

    x: np.ndarray            # float anchor
    anchor: int              # index of the reference point inside the patch
    qs: np.ndarray           # indices q; y = x + coords[q] - coords[anchor]
    ys: np.ndarray           # (k, d) float positions

    def shifts(self) -> np.ndarray:
        return self.ys - self.x[None, :]


class PatchIndex:
    """Neighbourhood and patch-class queries on one point set."""

    def __init__(self, D: PointSet, seed: int = 0x5EED5EED):
        self.D = D
        self.coords = D.coords
        self.n = len(D)
        self.dim = D.dim
        self.region = D.region
        self.exact = D.exact
        self._tree = None
        self._classes: dict[Fraction, PatchClasses] = {}
        if self.exact and self.n:
            self.flat = np.ascontiguousarray(D.flat_keys)
            self.hash = [_point_hashes(self.flat, P, seed + i) for i, P in enumerate(PRIMES)]
            self.ihash = [_point_hashes(self.flat, P, seed + i, -1)
                          for i, P in enumerate(PRIMES)]

    # -- geometry helpers -------------------------------------------------------
    @property
    def tree(self):
        if self._tree is None:
            from scipy.spatial import cKDTree
            self._tree = cKDTree(self.coords if self.n else np.zeros((0, self.dim)))
        return self._tree

    def _disc(self) -> int:
        return self.D.disc or 2

    def _exact_in_ball(self, j: int, i: int, R: Fraction) -> bool:
        diff = (self.flat[j] - self.flat[i]).reshape(self.dim, 2)
        return sq_norm_le(diff, self.D.den, self._disc(), R)

    def _ranges_1d(self, R: Fraction, idx: np.ndarray | None = None):
        """Index ranges ``[lo, hi)`` of points within distance R of each point."""
        x = self.coords[:, 0]
        if idx is None:
            idx = np.arange(self.n)
        c = x[idx]
        Rf = float(R)
        s = 1e-9 * (1.0 + np.abs(c) + Rf)
        lo_out = np.searchsorted(x, c - Rf - s, "left")
        lo_in = np.searchsorted(x, c - Rf + s, "left")
        hi_in = np.searchsorted(x, c + Rf - s, "right")
        hi_out = np.searchsorted(x, c + Rf + s, "right")
        lo = lo_in.copy()
        hi = hi_in.copy()
        for t in np.flatnonzero(lo_out < lo_in):
            i = int(idx[t])
            for j in range(int(lo_out[t]), int(lo_in[t])):
                if self._exact_in_ball(j, i, R):
                    lo[t] = j
                    break
        for t in np.flatnonzero(hi_out > hi_in):
            i = int(idx[t])
            for j in range(int(hi_out[t]) - 1, int(hi_in[t]) - 1, -1):
                if self._exact_in_ball(j, i, R):
                    hi[t] = j + 1
                    break
        return lo, hi

    def _neighbors_nd(self, R: Fraction, idx: np.ndarray) -> list:
        Rf = float(R)
        pts = self.coords[idx]
        lists = self.tree.query_ball_point(pts, Rf * (1 + 1e-9) + 1e-9)
        out = []
        for t, nb in enumerate(lists):
            nb = np.asarray(sorted(nb), dtype=np.int64)
            if self.exact and len(nb):
                d = np.linalg.norm(self.coords[nb] - pts[t], axis=1)
                amb = np.abs(d - Rf) <= 1e-9 * (1.0 + Rf + np.abs(pts[t]).max())
                keep = d < Rf
                for j in np.flatnonzero(amb):
                    keep[j] = self._exact_in_ball(int(nb[j]), int(idx[t]), R)
                nb = nb[keep]
            elif len(nb):
                d = np.linalg.norm(self.coords[nb] - pts[t], axis=1)
                nb = nb[d <= Rf]
            out.append(nb)
        return out

    def covered(self, R) -> np.ndarray:
        if not self.n:
            return np.zeros(0, dtype=bool)
        return self.region.covers(self.coords, float(R))

    # -- exact classes ----------------------------------------------------------
    def classes(self, R) -> PatchClasses:
        """Translation classes of the patches ``(D - p) ^ B(0, R)`` over covered p."""
        R = as_radius(R)
        if R in self._classes:
            return self._classes[R]
        label = np.full(self.n, -1, dtype=np.int64)
        idx = np.flatnonzero(self.covered(R))
        members: list = []
        if len(idx):
            if self.exact:
                groups = self._exact_groups(R, idx)
            else:
                groups = self._float_groups(R, idx)
            groups.sort(key=lambda g: int(g[0]))
            for cid, g in enumerate(groups):
                label[g] = cid
                members.append(g)
        pc = PatchClasses(R, label, members)
        self._classes[R] = pc
        return pc

    def _hash_groups(self, keys: np.ndarray) -> list:
        _, inv = np.unique(keys, axis=0, return_inverse=True)
        inv = inv.ravel()
        order = np.argsort(inv, kind="stable")
        bounds = np.flatnonzero(np.diff(inv[order])) + 1
        return np.split(order, bounds)

    def _exact_groups(self, R: Fraction, idx: np.ndarray) -> list:
        out = []
        if self.dim == 1:
            lo, hi = self._ranges_1d(R, idx)
            rel = []
            for P, h, ih in zip(PRIMES, self.hash, self.ihash):
                pref = np.concatenate([[0], np.cumsum(h)])
                S = (pref[hi] - pref[lo]) % P
                rel.append((S * ih[idx]) % P)
            gkeys = np.stack(rel + [hi - lo, idx - lo], axis=1)
            for grp in self._hash_groups(gkeys):
                out.extend(self._confirm_1d(idx[grp], lo[grp], int(hi[grp[0]] - lo[grp[0]])))
            return out
        nbrs = self._neighbors_nd(R, idx)
        counts = np.array([len(nb) for nb in nbrs])
        rel = []
        for P, h, ih in zip(PRIMES, self.hash, self.ihash):
            S = np.array([int(h[nb].sum() % P) for nb in nbrs], dtype=np.int64)
            rel.append((S * ih[idx]) % P)
        gkeys = np.stack(rel + [counts], axis=1)
        for grp in self._hash_groups(gkeys):
            buckets: dict[bytes, list] = {}
            for t in grp:
                relk = self.flat[nbrs[t]] - self.flat[idx[t]]
                relk = relk[np.lexsort(relk.T[::-1])]
                buckets.setdefault(relk.tobytes(), []).append(int(idx[t]))
            out.extend(np.array(sorted(v), dtype=np.int64) for v in buckets.values())
        return out

    def _confirm_1d(self, pts: np.ndarray, lo: np.ndarray, L: int) -> list:
        if len(pts) == 1:
            return [pts]
        ref = self.flat[lo[0]:lo[0] + L] - self.flat[pts[0]]
        same = np.ones(len(pts), dtype=bool)
        step = max(1, _CHUNK // max(1, L * self.flat.shape[1]))
        ar = np.arange(L)
        for s in range(1, len(pts), step):
            e = min(len(pts), s + step)
            rows = self.flat[lo[s:e, None] + ar] - self.flat[pts[s:e]][:, None, :]
            same[s:e] = np.all(rows == ref[None], axis=(1, 2))
        if same.all():
            return [pts]
        # hash collision: split the rest exactly
        out = [pts[same]]
        rest = np.flatnonzero(~same)
        buckets: dict[bytes, list] = {}
        for t in rest:
            rows = self.flat[lo[t]:lo[t] + L] - self.flat[pts[t]]
            buckets.setdefault(rows.tobytes(), []).append(int(pts[t]))
        out.extend(np.array(v, dtype=np.int64) for v in buckets.values())
        return out

    def _float_groups(self, R: Fraction, idx: np.ndarray) -> list:
        nbrs = self._neighbors_nd(R, idx)
        tol = self.D.tol
        counts = np.array([len(nb) for nb in nbrs])
        out = []
        for c in np.unique(counts):
            pend = [t for t in np.flatnonzero(counts == c)]
            reps: list = []
            for t in pend:
                relc = self.coords[nbrs[t]] - self.coords[idx[t]]
                for rep in reps:
                    if patch_close(rep[0], relc, tol):
                        rep[1].append(int(idx[t]))
                        break
                else:
                    reps.append((relc, [int(idx[t])]))
            out.extend(np.array(sorted(r[1]), dtype=np.int64) for r in reps)
        return out

    # -- patches and matches ----------------------------------------------------
    def patch_indices(self, x, R) -> np.ndarray:
        """Indices of points in B(x, R); exact decisions for exact anchors."""
        R = as_radius(R)
        xf = to_float_vec(x)
        if not self.n:
            return np.zeros(0, dtype=np.int64)
        Rf = float(R)
        if self.dim == 1:
            s = 1e-9 * (1.0 + abs(xf[0]) + Rf)
            xs = self.coords[:, 0]
            lo = int(np.searchsorted(xs, xf[0] - Rf - s, "left"))
            hi = int(np.searchsorted(xs, xf[0] + Rf + s, "right"))
            cand = np.arange(lo, hi)
        else:
            cand = np.asarray(sorted(self.tree.query_ball_point(xf, Rf * (1 + 1e-9) + 1e-9)),
                              dtype=np.int64)
        if not len(cand):
            return cand
        d = np.linalg.norm(self.coords[cand] - xf, axis=1)
        amb = np.abs(d - Rf) <= 1e-9 * (1.0 + Rf + np.abs(xf).max())
        keep = d <= Rf
        if amb.any() and self.exact and is_exact_vec(x):
            xk, xden, xdisc = vec_to_keys(x, self.D.disc)
            disc = merge_disc(self.D.disc, xdisc) or 2
            for j in np.flatnonzero(amb):
                pk = self.flat[cand[j]].reshape(self.dim, 2)
                a, b, den = align(pk, self.D.den, xk, xden)
                keep[j] = sq_norm_le(a - b, den, disc, R)
        return cand[keep]

    def matches(self, x, R, search_radius=None, anchor: int | None = None,
                inner: Fraction | None = None) -> Matches:
        """All y with ``(D - x) ^ B(0,R) = (D - y) ^ B(0,R)`` and B(y, R) covered.

        ``anchor`` marks x as the point ``coords[anchor]``.  Off-point anchors
        draw candidates from the patch class of the nearest point at the
        ``inner`` radius (default ``R - covering radius``).
        """
        R = as_radius(R)
        xf = to_float_vec(x) if anchor is None else self.coords[anchor].copy()
        self.region.require_covered(xf, float(R))
        if anchor is not None:
            p0 = anchor
            if self.exact:
                pc = self.classes(R)
                qs = pc.members[pc.label[p0]]
            else:
                qs = self._float_candidates(xf, R, p0)
        else:
            patch = self.patch_indices(x, R)
            if not len(patch):
                raise EmptyPatch(f"no points of D in B({xf.tolist()}, {float(R)})")
            dist = np.linalg.norm(self.coords[patch] - xf, axis=1)
            p0 = int(patch[np.argmin(dist)])
            if self.exact:
                qs = self._exact_offpoint(xf, R, p0, patch, inner)
            else:
                qs = self._float_candidates(xf, R, p0)
        ys = xf[None, :] + (self.coords[qs] - self.coords[p0])
        if search_radius is not None:
            keep = np.linalg.norm(ys - xf, axis=1) <= float(search_radius) * (1 + 1e-12)
            qs, ys = qs[keep], ys[keep]
        return Matches(xf, int(p0), np.asarray(qs, dtype=np.int64), ys)

    def covering_bound(self) -> float:
        """Float upper bound for the distance from a window point to D."""
        if self.dim == 1 and self.n > 1:
            return float(np.diff(self.coords[:, 0]).max()) / 2
        return self.D.covering_radius()

    def _exact_offpoint(self, xf, R: Fraction, p0: int, patch: np.ndarray,
                        inner: Fraction | None) -> np.ndarray:
        if inner is None:
            inner = R - Fraction(self.covering_bound()).limit_denominator(10 ** 6) \
                - Fraction(1, 10 ** 6)
        if inner > 0 and self.covered(inner)[p0]:
            pc = self.classes(inner)
            cand = pc.members[pc.label[p0]]
        else:
            cand = np.arange(self.n)
        ys = xf[None, :] + (self.coords[cand] - self.coords[p0])
        cand = cand[self.region.covers(ys, float(R))]
        ref = self.flat[patch] - self.flat[p0]
        if self.dim == 1:
            return self._check_1d(xf, R, p0, cand, ref, int(patch[0]))
        out = []
        order = np.lexsort(ref.T[::-1])
        ref = ref[order]
        for q in cand:
            y = xf + self.coords[q] - self.coords[p0]
            pi = self.patch_indices(y, R)
            if len(pi) != len(ref):
                continue
            rel = self.flat[pi] - self.flat[q]
            rel = rel[np.lexsort(rel.T[::-1])]
            if np.array_equal(rel, ref):
                out.append(int(q))
        return np.array(out, dtype=np.int64)

    def _check_1d(self, xf, R: Fraction, p0: int, cand: np.ndarray, ref: np.ndarray,
                  a_lo: int) -> np.ndarray:
        if not len(cand):
            return cand
        xs = self.coords[:, 0]
        Rf = float(R)
        L = len(ref)
        ys = xf[0] + (xs[cand] - xs[p0])
        lo = np.searchsorted(xs, ys - Rf, "left")
        hi = np.searchsorted(xs, ys + Rf, "right")
        ok = ((hi - lo) == L) & ((cand - lo) == (p0 - a_lo))
        cand, lo = cand[ok], lo[ok]
        if not len(cand):
            return cand
        same = np.ones(len(cand), dtype=bool)
        ar = np.arange(L)
        step = max(1, _CHUNK // max(1, L * self.flat.shape[1]))
        for s in range(0, len(cand), step):
            e = min(len(cand), s + step)
            rows = self.flat[lo[s:e, None] + ar] - self.flat[cand[s:e]][:, None, :]
            same[s:e] = np.all(rows == ref[None], axis=(1, 2))
        return cand[same]

    def _float_candidates(self, xf, R: Fraction, p0: int) -> np.ndarray:
        Rf = float(R)
        ys = xf[None, :] + (self.coords - self.coords[p0])
        cov = np.flatnonzero(self.region.covers(ys, Rf))
        ref = self.coords[self.patch_indices(xf, R)] - self.coords[p0]
        counts = self.tree.query_ball_point(ys[cov], Rf, return_length=True)
        cov = cov[counts == len(ref)]
        out = []
        for q in cov:
            pi = self.patch_indices(ys[q], R)
            if patch_close(ref, self.coords[pi] - self.coords[q], self.D.tol):
                out.append(int(q))
        return np.array(out, dtype=np.int64)


def patch_close(A: np.ndarray, B: np.ndarray, tol: float) -> bool:
    """Greedy nearest matching of two small float point arrays within ``tol``."""
    if len(A) != len(B):
        return False
    if not len(A):
        return True
    A = A[np.lexsort(A.T[::-1])]
    B = B[np.lexsort(B.T[::-1])]
    used = np.zeros(len(B), dtype=bool)
    for a in A:
        d = np.linalg.norm(B - a, axis=1)
        d[used] = np.inf
        j = int(np.argmin(d))
        if d[j] > tol:
            return False
        used[j] = True
    return True


def index_for(D: PointSet) -> PatchIndex:
    """Cached index per point set object."""
    idx = getattr(D, "_patch_index", None)
    if idx is None:
        idx = PatchIndex(D)
        D._patch_index = idx
    return idx
