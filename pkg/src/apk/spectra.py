"""Characters, the circle metric, empirical weak-equivariance moduli, the
V-space rank estimator and Pisot shrinking of eigenvalues.

Phases are measured in turns: ``phase(a, x) = <x, a> mod 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cps import Character
from .errors import (DimMismatch, NoPairs, NotExpansive, PreconditionError, SingularMap)
from .exactnum import QuadReal, as_quad, is_exact_scalar, qmat_det, qmat_inv
from .patternspace.index import as_radius, index_for
from .patternspace.patterns import PointSet
from .patternspace.region import is_exact_vec, to_float_vec

__all__ = ["Character", "EquivarianceReport", "rho_T", "character_phase", "circular_diameter",
           "equivariance_modulus", "vspace_rank", "pisot_shrink"]


def rho_T(theta1, theta2):
    """Distance on R/Z in turns: ``min_n |theta1 - theta2 + n|``."""
    d = np.asarray(theta1, dtype=float) - np.asarray(theta2, dtype=float)
    out = np.abs(d - np.round(d))
    return float(out) if out.ndim == 0 else out


def _as_char(a) -> Character:
    if isinstance(a, Character):
        return a
    if is_exact_scalar(a) or isinstance(a, (int, float)):
        return Character((a,))
    return Character(tuple(a))


def _exact_frac(v) -> float:
    """Fractional part of an exact real, as a float in [0, 1)."""
    f = math.floor(float(v))
    # float floor may be off by one next to an integer; settle it exactly
    while v - f < 0:
        f -= 1
    while v - f >= 1:
        f += 1
    return float(v - f)


def character_phase(a, x) -> float:
    """``<x, a> mod 1`` in turns; exact when both a and x are exact."""
    ch = _as_char(a)
    if len(x) != ch.dim:
        raise DimMismatch(f"point has dimension {len(x)}, character {ch.dim}")
    if ch.exact and is_exact_vec(x):
        s = 0
        for u, v in zip(x, ch.a):
            s = s + u * v
        return _exact_frac(s)
    return float(np.mod(to_float_vec(x) @ ch.a_float(), 1.0))


def phases(a, coords: np.ndarray) -> np.ndarray:
    return np.mod(np.atleast_2d(coords) @ _as_char(a).a_float(), 1.0)


def circular_diameter(theta: np.ndarray) -> float:
    """Largest circle distance between two of the given phases."""
    t = np.sort(np.mod(np.asarray(theta, dtype=float), 1.0))
    if len(t) < 2:
        return 0.0
    target = np.mod(t + 0.5, 1.0)
    j = np.searchsorted(t, target)
    best = 0.0
    for jj in (j % len(t), (j - 1) % len(t)):
        best = max(best, float(rho_T(t, t[jj]).max()))
    return best


def band_counts(theta: np.ndarray, r: float) -> np.ndarray:
    """For each phase, how many phases lie within circle distance r (itself included)."""
    t = np.sort(np.mod(np.asarray(theta, dtype=float), 1.0))
    if r >= 0.5:
        return np.full(len(theta), len(theta))
    ext = np.concatenate([t - 1.0, t, t + 1.0])
    q = np.mod(np.asarray(theta, dtype=float), 1.0)
    lo = np.searchsorted(ext, q - r - 1e-12, "left")
    hi = np.searchsorted(ext, q + r + 1e-12, "right")
    return hi - lo


@dataclass
class EquivarianceReport:
    R_grid: list
    omega: list                       # nonincreasing envelope, None where no pairs
    omega_raw: list
    pair_counts: list
    anchors: list
    character: Character | None = None
    notes: dict = field(default_factory=dict)

    def first_below(self, threshold: float):
        for R, w in zip(self.R_grid, self.omega):
            if w is not None and w < threshold:
                return R
        return None

    def is_nonincreasing(self) -> bool:
        vals = [w for w in self.omega if w is not None]
        return all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))

    def to_json(self) -> dict:
        return {"R_grid": [float(R) for R in self.R_grid], "omega": self.omega,
                "omega_raw": self.omega_raw, "pair_counts": self.pair_counts,
                "anchors": self.anchors,
                "character": None if self.character is None else self.character.to_json(),
                **self.notes}


def _upper_envelope(raw: list) -> list:
    out = [None] * len(raw)
    run = None
    for i in range(len(raw) - 1, -1, -1):
        if raw[i] is not None:
            run = raw[i] if run is None else max(run, raw[i])
        out[i] = run if raw[i] is not None else None
    return out


def _class_modulus(D: PointSet, a, R, search_radius=None) -> tuple[float, int, int]:
    """(max rho over matched on-point pairs, ordered pair count, anchors)."""
    idx = index_for(D)
    pc = idx.classes(R)
    anchors = int(np.count_nonzero(pc.label >= 0))
    af = _as_char(a).a_float()
    worst = 0.0
    pairs = 0
    for m in pc.members:
        k = len(m)
        if k < 2:
            continue
        th = np.mod(D.coords[m] @ af, 1.0)
        if search_radius is None:
            worst = max(worst, circular_diameter(th))
            pairs += k * (k - 1)
            continue
        pts = D.coords[m]
        for s in range(0, k, 256):
            dist = np.linalg.norm(pts[s:s + 256, None, :] - pts[None, :, :], axis=2)
            close = (dist <= float(search_radius)) & (dist > 0)
            if close.any():
                rho = rho_T(th[s:s + 256, None], th[None, :])
                worst = max(worst, float(rho[close].max()))
                pairs += int(close.sum())
    return worst, pairs, anchors


def _offpoint_modulus(D: PointSet, a, R, xs, search_radius=None) -> tuple[float, int, int]:
    idx = index_for(D)
    af = _as_char(a).a_float()
    worst = 0.0
    pairs = 0
    used = 0
    for x in xs:
        if not idx.region.covers(to_float_vec(x)[None, :], float(R))[0]:
            continue
        m = idx.matches(x, R, search_radius)
        used += 1
        if len(m.qs) < 2:
            continue
        rho = rho_T(m.x @ af, m.ys @ af)
        worst = max(worst, float(np.max(rho)))
        pairs += len(m.qs) - 1
    return worst, pairs, used


def equivariance_modulus(D: PointSet, a, R_grid: Sequence, sample_xs=None,
                         search_radius=None, on_point: bool = True,
                         allow_empty: bool = False) -> EquivarianceReport:
    """omega(R): worst circle distance of the character between matched positions.

    Anchors are all covered points of D (``on_point``) plus ``sample_xs``;
    matched positions come from exact patch classes.  ``omega`` is the upper
    envelope ``max_{R' >= R} raw(R')`` over radii with at least one pair.
    """
    ch = _as_char(a)
    if ch.dim != D.dim:
        raise DimMismatch(f"character is {ch.dim}-d, point set {D.dim}-d")
    raw, counts, anchors = [], [], []
    for R in R_grid:
        worst, pairs, used = 0.0, 0, 0
        if on_point:
            w, p, u = _class_modulus(D, ch, R, search_radius)
            worst, pairs, used = max(worst, w), pairs + p, used + u
        if sample_xs is not None and len(sample_xs):
            w, p, u = _offpoint_modulus(D, ch, R, sample_xs, search_radius)
            worst, pairs, used = max(worst, w), pairs + p, used + u
        if pairs == 0:
            if not allow_empty:
                raise NoPairs(f"no matched pairs at R={float(R)}")
            raw.append(None)
        else:
            raw.append(worst)
        counts.append(pairs)
        anchors.append(used)
    return EquivarianceReport([R for R in R_grid], _upper_envelope(raw), raw, counts, anchors,
                              ch)


# -- V-space rank -------------------------------------------------------------------------


def vspace_rank(generators: Sequence, r_grid: Sequence, coeff_bound: int,
                max_enum: int = 5_000_000, keep: int = 20000) -> int:
    """Rank of the span of short integer combinations, minimised over the r grid.

    A maximal independent subset of the generators serves as a basis; the
    remaining coefficients run over the full box and the basis coefficients
    are the floor/ceil neighbours of the real solution that cancels them.
    """
    G = np.array([to_float_vec(g) if not np.isscalar(g) and not is_exact_scalar(g)
                  else np.array([float(g)]) for g in generators], dtype=float)
    if G.ndim == 1:
        G = G[:, None]
    k, d = G.shape
    basis_idx = _independent_rows(G)
    rest_idx = [i for i in range(k) if i not in basis_idx]
    Bm = G[basis_idx]
    free = len(rest_idx)
    box = (2 * coeff_bound + 1) ** free
    if box > max_enum:
        raise PreconditionError(
            f"{box} coefficient combinations exceed max_enum={max_enum}; lower coeff_bound")
    rank_by_r = []
    vecs = _short_combinations(G, Bm, basis_idx, rest_idx, coeff_bound, max(map(float, r_grid)))
    norms = np.linalg.norm(vecs, axis=1) if len(vecs) else np.zeros(0)
    for r in r_grid:
        V = vecs[norms <= float(r)]
        V = V[np.argsort(np.linalg.norm(V, axis=1))][:keep] if len(V) else V
        if not len(V):
            rank_by_r.append(0)
            continue
        s = np.linalg.svd(V / np.linalg.norm(V, axis=1, keepdims=True), compute_uv=False)
        rank_by_r.append(int(np.count_nonzero(s > 1e-8 * s.max())))
    return min(rank_by_r) if rank_by_r else 0


def _independent_rows(G: np.ndarray) -> list:
    chosen: list = []
    for i in range(len(G)):
        trial = G[chosen + [i]]
        if np.linalg.matrix_rank(trial, tol=1e-10 * max(1.0, np.abs(G).max())) > len(chosen):
            chosen.append(i)
    return chosen


def _short_combinations(G, Bm, basis_idx, rest_idx, bound: int, rmax: float) -> np.ndarray:
    d = G.shape[1]
    nb = len(basis_idx)
    if rest_idx:
        axes = [np.arange(-bound, bound + 1)] * len(rest_idx)
        R = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(rest_idx))
    else:
        R = np.zeros((1, 0), dtype=np.int64)
    partial = R @ G[rest_idx] if rest_idx else np.zeros((1, d))
    # least-squares basis coefficients cancelling the partial sum
    sol, *_ = np.linalg.lstsq(Bm.T, -partial.T, rcond=None)
    sol = sol.T
    out = []
    for signs in np.ndindex(*(2,) * nb):
        cb = np.where(np.array(signs, bool), np.ceil(sol), np.floor(sol))
        ok = np.all(np.abs(cb) <= bound, axis=1)
        v = partial + cb @ Bm
        nrm = np.linalg.norm(v, axis=1)
        scale = 1.0 + np.abs(partial).max(axis=1) + (np.abs(cb) @ np.abs(Bm)).max(axis=1)
        good = ok & (nrm <= rmax) & (nrm > 1e-12 * scale)
        out.append(v[good])
    if not out:
        return np.zeros((0, d))
    V = np.concatenate(out)
    return np.unique(np.round(V, 15), axis=0) if len(V) else V


# -- Pisot shrinking ------------------------------------------------------------------------


def _is_exact_matrix(M) -> bool:
    return all(is_exact_scalar(v) for r in M for v in r)


def _as_matrix(phi):
    if is_exact_scalar(phi) or isinstance(phi, (int, float)):
        return [[phi]]
    return [list(r) for r in phi]


def _disc_of(M):
    for r in M:
        for v in r:
            if isinstance(v, QuadReal) and v.q != 0:
                return v.disc
    return None


def pisot_shrink(phi, a, k: int, phi_internal=None) -> Character:
    """``(phi^T)^{-k} a`` for an invertible expansive map phi.

    If ``a`` has an internal partner, it is carried along by ``phi_internal``
    (default: the entrywise Galois conjugate of an exact phi when d = m).
    """
    M = _as_matrix(phi)
    ch = _as_char(a)
    d = len(M)
    if d != ch.dim or any(len(r) != d for r in M):
        raise DimMismatch("phi must be a d x d matrix matching the character")
    Mf = np.array([[float(v) for v in r] for r in M])
    if abs(np.linalg.det(Mf)) < 1e-14:
        raise SingularMap("phi is singular")
    ev = np.linalg.eigvals(Mf)
    if not np.all(np.abs(ev) > 1 + 1e-12):
        raise NotExpansive(f"eigenvalue moduli {np.abs(ev).tolist()} are not all > 1")
    if k < 0:
        raise PreconditionError("k must be nonnegative")
    if k == 0:
        return ch
    exact = _is_exact_matrix(M) and ch.exact
    a_new = _apply_inverse_transpose(M, ch.a, k, exact)
    star = ch.a_star
    if star:
        if phi_internal is None and exact and len(star) == d:
            phi_internal = [[v.conj() if isinstance(v, QuadReal) else v for v in r] for r in M]
        if phi_internal is not None:
            Mi = _as_matrix(phi_internal)
            star = _apply_inverse_transpose(Mi, star, k, exact and _is_exact_matrix(Mi)
                                            and all(is_exact_scalar(c) for c in star))
        else:
            star = None
    return Character(tuple(a_new), None if star is None else tuple(star), "pisot-shrink")


def _apply_inverse_transpose(M, v, k, exact):
    d = len(M)
    if exact:
        disc = _disc_of(M) or _disc_of([list(v)]) or 5
        Q = [[as_quad(x, disc) for x in r] for r in M]
        if qmat_det(Q) == 0:
            raise SingularMap("phi is singular")
        inv = qmat_inv(Q)
        invT = [[inv[j][i] for j in range(d)] for i in range(d)]
        out = [as_quad(x, disc) for x in v]
        for _ in range(k):
            out = [sum((invT[i][j] * out[j] for j in range(d)), as_quad(0, disc))
                   for i in range(d)]
        return [x.p if x.q == 0 else x for x in out]
    Mf = np.array([[float(x) for x in r] for r in M])
    step = np.linalg.inv(Mf.T)
    out = to_float_vec(v)
    for _ in range(k):
        out = step @ out
    return out.tolist()
