"""Forward search then converse recovery on the Fibonacci model set.

    python scripts/forward_converse.py --half 10000 --targets 10:0.5 3:0.2 25:1.0
"""
from __future__ import annotations

import argparse
import json
import time
from dataclasses import asdict, dataclass, field

from apk.errors import ApkError
from apk.generators import gen_fibonacci_cps
from apk.patternspace import Region
from apk.stripe import eigen_from_stripe, stripe_search


@dataclass
class Config:
    half: float = 10_000
    targets: list = field(default_factory=lambda: [(10, 0.5), (3, 0.2), (25, 1.0)])
    eps: float = 0.05
    offpoint: int = 1000
    out: str | None = None


def run(cfg: Config) -> list:
    D = gen_fibonacci_cps(Region((-cfg.half,), (cfg.half,)))
    rows = []
    for T1, T2 in cfg.targets:
        row = {"T1": T1, "T2": T2}
        t0 = time.perf_counter()
        try:
            cert = stripe_search(D, None, T1, T2, cfg.eps, n_offpoint=cfg.offpoint)
        except ApkError as exc:
            row.update(error=type(exc).__name__, detail=str(exc))
            rows.append(row)
            continue
        row.update(L1=cert.spec.L1, L2=cert.spec.L2, R=float(cert.spec.R),
                   a_star=cert.source_character.star_norm(),
                   violations=cert.violation_count, anchors=cert.samples_checked,
                   pairs=cert.pairs_checked, search_s=round(time.perf_counter() - t0, 2))
        try:
            res = eigen_from_stripe(D, cert)
            rep = res.report_D
            row.update(period_error=abs(1 / res.character.norm() - cert.spec.L1),
                       band_max=res.band_max, locator_size=res.locator.count,
                       omega_first_below_005=None if rep.first_below(0.05) is None
                       else float(rep.first_below(0.05)))
        except ApkError as exc:
            row.update(converse_error=type(exc).__name__)
        rows.append(row)
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--half", type=float, default=Config.half)
    p.add_argument("--targets", nargs="+", default=["10:0.5", "3:0.2", "25:1.0"])
    p.add_argument("--eps", type=float, default=Config.eps)
    p.add_argument("--out")
    a = p.parse_args()
    cfg = Config(a.half, [tuple(map(float, t.split(":"))) for t in a.targets], a.eps, out=a.out)
    rows = run(cfg)
    for r in rows:
        print(json.dumps(r))
    if cfg.out:
        with open(cfg.out, "w") as fh:
            json.dump({"config": asdict(cfg), "rows": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
