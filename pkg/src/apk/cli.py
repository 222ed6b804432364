"""Command-line front end.

Every subcommand prints ``{"manifest": ..., "result": ...}`` (or writes it to
``--out``).  Exit codes: 0 success, 1 violations found, 2 usage error,
3 window / enumeration / hypothesis failure, 4 internal error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ApkError, UsageError, WindowError

SUBCOMMANDS = ("gen", "stripe-verify", "stripe-search", "eigenvalues", "equivariance",
               "metric", "locator", "axioms-test", "round-trip", "report")

EXIT_OK, EXIT_VIOLATIONS, EXIT_USAGE, EXIT_WINDOW, EXIT_INTERNAL = 0, 1, 2, 3, 4


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    version: str = __version__
    inputs: dict = field(default_factory=dict)
    threads: int | None = None
    wall_time_s: float = 0.0

    def to_json(self) -> dict:
        return {"subcommand": self.subcommand, "config": self.config, "version": self.version,
                "inputs": self.inputs, "threads": self.threads,
                "wall_time_s": round(self.wall_time_s, 3)}


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _threads() -> int | None:
    v = os.environ.get("APK_THREADS")
    if v is None:
        return None
    try:
        n = int(v)
    except ValueError as exc:
        raise UsageError(f"APK_THREADS must be an integer, got {v!r}") from exc
    if n < 1:
        raise UsageError("APK_THREADS must be >= 1")
    return n


def _num(s: str):
    from .exactnum import parse_exact
    try:
        return parse_exact(s)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"cannot parse number {s!r}") from exc


def _fnum(s: str) -> float:
    return float(_num(s))


def _load_points(path):
    from .patternspace import from_json
    from .patternspace.patterns import LabeledPointSet, PointSet, WeightedComb
    try:
        obj = json.loads(Path(path).read_text())
        if "format" not in obj and isinstance(obj.get("result"), dict):
            obj = obj["result"]  # a document written by `apk gen`
        P = from_json(obj)
    except FileNotFoundError as exc:
        raise UsageError(f"no such file: {path}") from exc
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise UsageError(f"{path}: not a pattern file ({exc})") from exc
    if isinstance(P, (LabeledPointSet, WeightedComb)):
        return P.base
    if not isinstance(P, PointSet):
        raise UsageError(f"{path}: expected a point set")
    return P


def _unwrap(path) -> dict:
    try:
        obj = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise UsageError(f"no such file: {path}") from exc
    if "format" not in obj and isinstance(obj.get("result"), dict):
        obj = obj["result"]
    return obj


def _region(vals, dim):
    from .patternspace.region import Region
    nums = [_fnum(v) for v in vals]
    if len(nums) == 2 and dim and dim > 1:
        return Region.cube(nums[0], nums[1], dim)
    if len(nums) % 2:
        raise UsageError("--region takes lo hi pairs per axis")
    return Region(tuple(nums[0::2]), tuple(nums[1::2]))


def _rgrid(vals):
    from fractions import Fraction
    out = []
    for v in vals:
        x = _num(v)
        out.append(x if isinstance(x, (int, Fraction)) else Fraction(float(x)).limit_denominator(10 ** 6))
    return out


# -- subcommands --------------------------------------------------------------------------


def cmd_gen(args, man):
    from .generators import GeneratorConfig, generate
    from .patternspace import to_json
    if args.config:
        cfg = GeneratorConfig.load(args.config)
        man.inputs[args.config] = _sha256(args.config)
    else:
        if not args.family:
            raise UsageError("gen needs --family or --config")
        dim = args.dim or (2 if args.family == "ammann-beenker" else 1)
        reg = _region(args.region or ["-100", "100"], dim)
        params = {}
        if args.iterations is not None:
            params["iterations"] = args.iterations
        if args.window:
            params["window"] = args.window
        if args.basis:
            params["basis"] = [row.split(",") for row in args.basis.split(";")]
        if args.offset:
            params["offset"] = args.offset
        if args.r is not None:
            params["r"] = args.r
        if args.R is not None:
            params["R"] = args.R
        cfg = GeneratorConfig(args.family, (reg.lo, reg.hi), args.seed, params)
    man.config["generator"] = cfg.to_json()
    D = generate(cfg)
    svg = None
    if args.svg:
        from .svg import points_svg
        svg = points_svg(D)
    return to_json(D), EXIT_OK, svg


def _cert_svg(D, cert, spec):
    from .stripe import _central_point, matched_set
    from .svg import stripe_svg
    if cert.violations:
        x = cert.violations[0][0]
    else:
        x = _central_point(D, spec.R)
    ys = matched_set(D, x, spec.R).coords
    title = f"(L1, L2) = ({float(spec.L1):.4g}, {float(spec.L2):.4g}), R = {float(spec.R):.4g}"
    return stripe_svg(D, spec, x, ys, title=title)


def cmd_stripe_verify(args, man):
    from .stripe import StripeSpec, stripe_verify
    D = _load_points(args.file)
    man.inputs[args.file] = _sha256(args.file)
    spec = StripeSpec(tuple(_fnum(v) for v in args.a), _fnum(args.L1), _fnum(args.L2),
                      _fnum(args.R))
    cert = stripe_verify(D, spec, search_radius=_fnum(args.search_radius)
                         if args.search_radius else None,
                         on_point=not args.no_on_point, n_offpoint=args.offpoint)
    svg = _cert_svg(D, cert, spec) if args.svg else None
    return cert.to_json(), EXIT_OK if cert.holds else EXIT_VIOLATIONS, svg


def _char_source(args, D):
    from .cps import BUILTIN, Character, load_scheme
    if getattr(args, "chars", None):
        obj = json.loads(Path(args.chars).read_text())
        items = obj["characters"] if isinstance(obj, dict) else obj
        return [Character.from_json(c) if isinstance(c, dict) else Character(tuple(c))
                for c in items]
    if getattr(args, "scheme", None):
        if args.scheme in BUILTIN:
            return BUILTIN[args.scheme][0]()
        return load_scheme(args.scheme)
    return None


def cmd_stripe_search(args, man):
    from .stripe import stripe_search
    D = _load_points(args.file)
    man.inputs[args.file] = _sha256(args.file)
    cert = stripe_search(D, _char_source(args, D), _fnum(args.target_period),
                         _fnum(args.target_halfwidth), _fnum(args.eps),
                         _rgrid(args.R_grid) if args.R_grid else None,
                         n_offpoint=args.offpoint)
    svg = _cert_svg(D, cert, cert.spec) if args.svg else None
    return cert.to_json(), EXIT_OK if cert.holds else EXIT_VIOLATIONS, svg


def _scheme_for(args):
    from .cps import BUILTIN, load_scheme, scheme_from_meta
    if args.scheme:
        if args.scheme in BUILTIN:
            return BUILTIN[args.scheme][0]()
        return load_scheme(args.scheme)
    if args.file:
        D = _load_points(args.file)
        S, _ = scheme_from_meta(D.meta)
        if S is not None:
            return S
    raise UsageError("eigenvalues needs --scheme or a point-set file produced from a scheme")


def cmd_eigenvalues(args, man):
    from .cps import eigen_enumerate, find_small_eigenvalue
    if args.file:
        man.inputs[args.file] = _sha256(args.file)
    S = _scheme_for(args)
    if args.target is not None:
        ch = find_small_eigenvalue(S, _fnum(args.target), _fnum(args.eps))
        return {"scheme": S.name, "character": ch.to_json(), "period": 1 / ch.norm()}, \
            EXIT_OK, None
    chars = eigen_enumerate(S, _fnum(args.phys_max), _fnum(args.int_max))
    return {"scheme": S.name, "count": len(chars),
            "characters": [c.to_json() for c in chars[: args.limit]]}, EXIT_OK, None


def cmd_equivariance(args, man):
    from .cps import Character
    from .spectra import equivariance_modulus
    from .stripe import StripeCertificate, offpoint_anchors
    D = _load_points(args.file)
    man.inputs[args.file] = _sha256(args.file)
    if args.cert:
        ch = StripeCertificate.from_json(_unwrap(args.cert)).source_character
        man.inputs[args.cert] = _sha256(args.cert)
        if ch is None:
            raise UsageError("certificate carries no character")
    elif args.a:
        ch = Character(tuple(_num(v) for v in args.a))
    else:
        raise UsageError("equivariance needs --a or --cert")
    grid = _rgrid(args.R_grid)
    xs = None
    if args.offpoint:
        xs = offpoint_anchors(D, max(float(g) for g in grid), args.offpoint)
    rep = equivariance_modulus(D, ch, grid, sample_xs=xs, allow_empty=True)
    return rep.to_json(), EXIT_OK, None


def cmd_metric(args, man):
    from .patternspace import local_match_dist
    D1, D2 = _load_points(args.file1), _load_points(args.file2)
    man.inputs[args.file1] = _sha256(args.file1)
    man.inputs[args.file2] = _sha256(args.file2)
    grid = [_fnum(v) for v in args.r_grid]
    return {"rho": local_match_dist(D1, D2, grid), "r_grid": grid}, EXIT_OK, None


def cmd_locator(args, man):
    from .patternspace import to_json
    from .stripe import locator_derivability, locator_set
    D = _load_points(args.file)
    man.inputs[args.file] = _sha256(args.file)
    x0 = tuple(_num(v) for v in args.x0)
    R0 = _rgrid([args.R0])[0]
    E, info = locator_set(D, x0, R0)
    out = {"locator": info.to_json(), "E": to_json(E)}
    if args.derivability:
        rep = locator_derivability(D, E, x0, R0, args.derivability)
        out["derivability"] = rep.to_json()
    return out, EXIT_OK, None


def cmd_axioms(args, man):
    from .patternspace.axioms import run_axioms
    reps = run_axioms(args.cases, args.seed)
    bad = sum(r.failures for r in reps)
    return {"reports": [r.to_json() for r in reps], "failures": bad}, \
        EXIT_VIOLATIONS if bad else EXIT_OK, None


def cmd_round_trip(args, man):
    from .stripe import StripeCertificate, eigen_from_stripe, stripe_search
    D = _load_points(args.file)
    man.inputs[args.file] = _sha256(args.file)
    if args.cert:
        cert = StripeCertificate.from_json(_unwrap(args.cert))
        man.inputs[args.cert] = _sha256(args.cert)
        # re-verify rather than trusting the file
        from .stripe import stripe_verify
        cert2 = stripe_verify(D, cert.spec, source=cert.source_character)
        if not cert2.holds:
            return {"certificate": cert2.to_json()}, EXIT_VIOLATIONS, None
        cert = cert2
    else:
        if args.target_period is None:
            raise UsageError("round-trip needs --cert or --target-period")
        cert = stripe_search(D, None, _fnum(args.target_period), _fnum(args.target_halfwidth),
                             _fnum(args.eps))
    eps_grid = [_fnum(v) for v in args.eps_grid] if args.eps_grid else None
    res = eigen_from_stripe(D, cert, eps_grid) if eps_grid else eigen_from_stripe(D, cert)
    ch = res.character
    return {"certificate": cert.to_json(), "converse": res.to_json(),
            "period_error": abs(1 / ch.norm() - float(cert.spec.L1))}, EXIT_OK, None


def cmd_report(args, man):
    from .patternspace import flc_census
    from .patternspace.index import index_for
    D = _load_points(args.file)
    man.inputs[args.file] = _sha256(args.file)
    out = {"count": len(D), "dim": D.dim, "arith": D.arith, "disc": D.disc,
           "region": D.region.to_json(), "family": D.meta.get("family"),
           "delone": D.delone_certificate() if len(D) > 1 else None}
    if D.dim == 1 and len(D) > 1:
        gaps = np.round(np.diff(D.coords[:, 0]), 9)
        vals, counts = np.unique(gaps, return_counts=True)
        out["gaps"] = {f"{v:.9g}": int(c) for v, c in zip(vals[:20], counts[:20])}
        out["distinct_gaps"] = int(len(vals))
    idx = index_for(D)
    census = {}
    for R in args.flc_R:
        cov = np.flatnonzero(idx.covered(_fnum(R)))[: args.flc_samples]
        if len(cov):
            census[R] = flc_census(D, _fnum(R), [D.vec(int(i)) for i in cov])
    out["flc_census"] = census
    return out, EXIT_OK, None


HANDLERS = {"gen": cmd_gen, "stripe-verify": cmd_stripe_verify,
            "stripe-search": cmd_stripe_search, "eigenvalues": cmd_eigenvalues,
            "equivariance": cmd_equivariance, "metric": cmd_metric, "locator": cmd_locator,
            "axioms-test": cmd_axioms, "round-trip": cmd_round_trip, "report": cmd_report}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write the JSON document here instead of stdout")
    common.add_argument("--svg", help="write an SVG figure here")
    p = _Parser(prog="apk", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="generate a point set")
    g.add_argument("--family")
    g.add_argument("--config", help="GeneratorConfig JSON")
    g.add_argument("--region", nargs="+", help="lo hi per axis, or lo hi with --dim")
    g.add_argument("--dim", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--iterations", type=int)
    g.add_argument("--window", nargs=2, metavar=("LO", "HI"))
    g.add_argument("--basis", help='rows separated by ";", entries by ","')
    g.add_argument("--offset", nargs="+")
    g.add_argument("--r", type=float)
    g.add_argument("--R", type=float)

    v = sub.add_parser("stripe-verify", parents=[common], help="verify a stripe spec")
    v.add_argument("file")
    v.add_argument("--a", nargs="+", required=True)
    v.add_argument("--L1", required=True)
    v.add_argument("--L2", required=True)
    v.add_argument("--R", required=True)
    v.add_argument("--search-radius")
    v.add_argument("--offpoint", type=int, default=1000)
    v.add_argument("--no-on-point", action="store_true")

    s = sub.add_parser("stripe-search", parents=[common], help="eigenvalue-driven search")
    s.add_argument("file")
    s.add_argument("--target-period", required=True)
    s.add_argument("--target-halfwidth", required=True)
    s.add_argument("--eps", required=True)
    s.add_argument("--R-grid", nargs="+")
    s.add_argument("--offpoint", type=int, default=1000)
    s.add_argument("--scheme", help="builtin name or apk-cps-v1 file")
    s.add_argument("--chars", help="JSON list of characters")

    e = sub.add_parser("eigenvalues", parents=[common], help="dual-lattice eigenvalues")
    e.add_argument("file", nargs="?")
    e.add_argument("--scheme")
    e.add_argument("--phys-max", default="1")
    e.add_argument("--int-max", default="4")
    e.add_argument("--target")
    e.add_argument("--eps", default="0.05")
    e.add_argument("--limit", type=int, default=50)

    q = sub.add_parser("equivariance", parents=[common], help="weak-equivariance modulus")
    q.add_argument("file")
    q.add_argument("--a", nargs="+")
    q.add_argument("--cert")
    q.add_argument("--R-grid", nargs="+", default=["5", "10", "20", "50", "100"])
    q.add_argument("--offpoint", type=int, default=0)

    m = sub.add_parser("metric", parents=[common], help="local matching distance")
    m.add_argument("file1")
    m.add_argument("file2")
    m.add_argument("--r-grid", nargs="+", default=["0.05", "0.1", "0.15", "0.2", "0.3", "0.5"])

    lo = sub.add_parser("locator", parents=[common], help="locator set of a patch")
    lo.add_argument("file")
    lo.add_argument("--x0", nargs="+", required=True)
    lo.add_argument("--R0", required=True)
    lo.add_argument("--derivability", type=int, default=0, help="sampled pairs to check")

    a = sub.add_parser("axioms-test", parents=[common], help="randomized axiom checks")
    a.add_argument("--cases", type=int, default=1000)
    a.add_argument("--seed", type=int, default=0)

    r = sub.add_parser("round-trip", parents=[common], help="forward then converse chain")
    r.add_argument("file")
    r.add_argument("--cert")
    r.add_argument("--target-period")
    r.add_argument("--target-halfwidth", default="0.5")
    r.add_argument("--eps", default="0.05")
    r.add_argument("--eps-grid", nargs="+")

    rep = sub.add_parser("report", parents=[common], help="summary statistics")
    rep.add_argument("file")
    rep.add_argument("--flc-R", nargs="+", default=["2", "5"])
    rep.add_argument("--flc-samples", type=int, default=2000)
    return p


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("cmd", "out", "svg")}


def run(argv=None) -> int:
    t0 = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        if args.cmd is None:
            raise UsageError(f"choose a subcommand: {', '.join(SUBCOMMANDS)}")
        man = RunManifest(args.cmd, _config(args), threads=_threads())
        result, code, svg = HANDLERS[args.cmd](args, man)
    except UsageError as exc:
        print(f"apk: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WindowError as exc:
        print(f"apk: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_WINDOW
    except ApkError as exc:
        print(f"apk: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_WINDOW
    except Exception as exc:  # report, never mask as a verification result
        print(f"apk: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    man.wall_time_s = time.perf_counter() - t0
    doc = json.dumps({"manifest": man.to_json(), "result": result}, sort_keys=True,
                     default=_default) + "\n"
    if args.out:
        Path(args.out).write_text(doc)
    else:
        sys.stdout.write(doc)
    if args.svg and svg is not None:
        Path(args.svg).write_text(svg)
    return code


def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    from fractions import Fraction
    if isinstance(o, Fraction):
        return str(o)
    if hasattr(o, "to_json"):
        return o.to_json()
    raise TypeError(f"not serialisable: {type(o).__name__}")


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
