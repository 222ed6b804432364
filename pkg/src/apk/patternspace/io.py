"""JSON encodings of patterns.

Point sets use ``apk-pointset-v1``; labeled point sets add a ``labels`` list;
patches use ``apk-patch-v1`` with ``tiles`` and combs ``apk-comb-v1`` with
``atoms``.  Exact coordinates are QuadReal objects (``{"p","q","disc"}``) or
rational strings; float coordinates are plain numbers.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from ..exactnum import QuadReal, is_exact_scalar
from .patterns import LabeledPointSet, Patch, PointSet, WeightedComb, key_scalar
from .region import Region, num_from_json

POINTSET = "apk-pointset-v1"
PATCH = "apk-patch-v1"
COMB = "apk-comb-v1"


def _num(v):
    if isinstance(v, QuadReal):
        return str(v.p) if v.q == 0 else v.to_json()
    if is_exact_scalar(v):
        return str(Fraction(v))
    return float(v)


def _weight(w):
    if isinstance(w, complex):
        return {"re": w.real, "im": w.imag}
    return _num(w)


def _weight_from(v):
    if isinstance(v, dict) and "re" in v:
        return complex(v["re"], v["im"])
    return num_from_json(v)


def _points_json(ps: PointSet) -> list:
    if ps.exact:
        return [[_num(key_scalar(P, Q, ps.den, ps.disc)) for P, Q in row] for row in ps.keys]
    return ps.coords.tolist()


def to_json(P) -> dict:
    if isinstance(P, Patch):
        return {"format": PATCH, "dim": P.dim, "arith": "exact" if P.exact else "float",
                "region": P.region.to_json(),
                "tiles": [{"lo": [_num(v) for v in lo], "hi": [_num(v) for v in hi],
                           **({"label": lab} if lab is not None else {})}
                          for lo, hi, lab in P.tiles]}
    if isinstance(P, WeightedComb):
        base = P.base
        return {"format": COMB, "dim": base.dim, "arith": base.arith, "disc": base.disc,
                "region": base.region.to_json(), "meta": base.meta,
                "atoms": [{"x": x, "w": _weight(w)}
                          for x, w in zip(_points_json(base), P.weights)]}
    base = P.base if isinstance(P, LabeledPointSet) else P
    out = {"format": POINTSET, "dim": base.dim, "arith": base.arith, "disc": base.disc,
           "region": base.region.to_json(), "points": _points_json(base)}
    if not base.exact:
        out["tol"] = base.tol
    if isinstance(P, LabeledPointSet):
        out["labels"] = list(P.labels)
    if base.meta:
        out["meta"] = base.meta
    return out


def _pointset_from(obj: dict, pts: list) -> PointSet:
    region = Region.from_json(obj["region"])
    meta = obj.get("meta") or {}
    if obj.get("arith", "exact") == "exact":
        vecs = [tuple(num_from_json(v) for v in p) for p in pts]
        return PointSet.from_exact(vecs, region, obj.get("disc"), meta=meta)
    coords = np.asarray(pts, dtype=float).reshape(-1, region.dim)
    return PointSet.from_floats(coords, region, tol=float(obj.get("tol", 1e-9)), meta=meta)


def from_json(obj: dict):
    fmt = obj.get("format")
    if fmt == POINTSET:
        ps = _pointset_from(obj, obj["points"])
        if "labels" in obj:
            return _realign(ps, obj["labels"], LabeledPointSet)
        return ps
    if fmt == COMB:
        pts = [a["x"] for a in obj["atoms"]]
        ps = _pointset_from(obj, pts)
        return _realign(ps, [_weight_from(a["w"]) for a in obj["atoms"]], WeightedComb)
    if fmt == PATCH:
        region = Region.from_json(obj["region"])
        tiles = [(tuple(num_from_json(v) for v in t["lo"]),
                  tuple(num_from_json(v) for v in t["hi"]), t.get("label"))
                 for t in obj["tiles"]]
        return Patch(tiles, region)
    raise ValueError(f"unknown pattern format {fmt!r}")


def _realign(ps: PointSet, payload: list, cls):
    # the point set is stored sorted; carry the payload along
    order = ps.input_order if ps.input_order is not None else range(len(ps))
    return cls(ps, [payload[i] for i in order])


def dump(P, path) -> None:
    Path(path).write_text(json.dumps(to_json(P), sort_keys=True) + "\n")


def load(path):
    return from_json(json.loads(Path(path).read_text()))
